//! Local Kudla-Rapoport divisors on the Bruhat-Tits tree of `SU(V)` and their
//! intersection numbers.
//!
//! A divisor `Z(b)` with `m = ord_p (b, b)` is a horizontal component meeting
//! the projective line of its central vertex, plus the vertical part
//! `sum m(b, L) P_L` over the ball of radius `m` around that vertex. Two such
//! divisors are described by [`TreeConfig`]: the two radii, the distance
//! between the centres and, when the centres coincide, the horizontal pairing
//! `e = ord_p (beta_2, beta_1')`.
//!
//! [`intersect_bruteforce`] expands the pairing bilinearly over an explicit
//! finite piece of the tree; [`intersect_closed`] is the closed form. They are
//! independent code paths.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localfield::require_odd_prime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub p: u64,
    pub m1: u32,
    pub m2: u32,
    /// Distance between the two central vertices.
    pub d: u32,
    /// Horizontal-horizontal pairing; present exactly when `d = 0`.
    pub e: Option<u32>,
}

impl TreeConfig {
    pub fn new(p: u64, m1: u32, m2: u32, d: u32, e: Option<u32>) -> Result<Self> {
        require_odd_prime(p)?;
        if m1 > m2 {
            return Err(Error::pre(format!("need m1 <= m2, got m1 = {m1}, m2 = {m2}")));
        }
        if !(m1 + m2 + d).is_multiple_of(2) {
            return Err(Error::pre(format!(
                "m1 + m2 must be congruent to d mod 2 (central vertex types), got {m1} + {m2} vs {d}"
            )));
        }
        match (d, e) {
            (0, None) => Err(Error::pre(
                "e = ord_p(beta_2, beta_1') is required when the central vertices coincide (d = 0)",
            )),
            (1.., Some(_)) => Err(Error::pre("e is only meaningful when d = 0")),
            _ => Ok(TreeConfig { p, m1, m2, d, e }),
        }
    }

    pub fn balls_meet(&self) -> bool {
        self.d <= self.m1 + self.m2
    }

    /// `B(b1)` is contained in `B(b2)`.
    pub fn nested(&self) -> bool {
        self.d + self.m1 <= self.m2
    }
}

/// Vertical multiplicity `m(b, L)` of the line `P_L` at distance `dist` from
/// the centre of a divisor with `ord_p (b,b) = m`. Zero outside the ball and
/// for negative `m`.
pub fn multiplicity(m: i64, dist: i64) -> i64 {
    if m < 0 || dist > m {
        return 0;
    }
    if (m - dist) % 2 == 0 {
        (m - dist) / 2
    } else {
        (m - dist + 1) / 2
    }
}

/// `<P_L, P_L'>` for vertices at distance `dist`.
pub fn pairing_pp(dist: u32, p: u64) -> i64 {
    match dist {
        0 => -(p as i64 + 1),
        1 => 1,
        _ => 0,
    }
}

/// `<P_L, Z(b)>` for `L` at distance `dist` from the centre of `Z(b)`.
pub fn pairing_p_z(dist: i64, m: i64, p: u64) -> i64 {
    if m < 0 || dist > m {
        0
    } else if (dist - m) % 2 == 0 {
        1
    } else {
        -(p as i64)
    }
}

/// `p + p^2 + ... + p^n`.
fn geo(p: u64, n: u32) -> i64 {
    let p = p as i64;
    (1..=n).fold((0i64, 1i64), |(acc, pw), _| (acc + pw * p, pw * p)).0
}

/// An explicit finite subtree covering both balls.
///
/// Vertex `spine[i]` lies on the geodesic at distance `i` from the first
/// centre. Every vertex strictly inside either ball carries all of its `p+1`
/// neighbours.
#[derive(Clone, Debug)]
pub struct TruncatedTree {
    pub adjacency: Vec<Vec<usize>>,
    pub spine: Vec<usize>,
    pub dist1: Vec<u32>,
    pub dist2: Vec<u32>,
}

impl TruncatedTree {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn center1(&self) -> usize {
        self.spine[0]
    }

    pub fn center2(&self) -> usize {
        *self.spine.last().expect("spine is never empty")
    }

    /// Breadth-first distances from `start`, within the tree.
    pub fn distances_from(&self, start: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn multiplicities(&self, config: &TreeConfig) -> (Vec<i64>, Vec<i64>) {
        let m1 = self.dist1.iter().map(|&x| multiplicity(config.m1 as i64, x as i64)).collect();
        let m2 = self.dist2.iter().map(|&x| multiplicity(config.m2 as i64, x as i64)).collect();
        (m1, m2)
    }

    /// `<P_v, Z(b2)>` summed explicitly: the horizontal term plus
    /// `sum m(b2, w) <P_v, P_w>` over `v` and its neighbours.
    pub fn explicit_p_z(&self, v: usize, mult2: &[i64], p: u64) -> i64 {
        let horizontal = i64::from(v == self.center2());
        let own = mult2[v] * pairing_pp(0, p);
        let around: i64 = self.adjacency[v].iter().map(|&w| mult2[w] * pairing_pp(1, p)).sum();
        horizontal + own + around
    }

    /// Graphviz rendering with per-vertex multiplicities.
    pub fn to_dot(&self, config: &TreeConfig) -> String {
        let (mult1, mult2) = self.multiplicities(config);
        let mut out = String::from("graph bruhat_tits {\n  node [shape=circle];\n");
        for v in 0..self.len() {
            let shape = if v == self.center1() || v == self.center2() { ", shape=doublecircle" } else { "" };
            let _ = writeln!(
                out,
                "  v{v} [label=\"{v}\\nm1={}\\nm2={}\"{shape}];",
                mult1[v], mult2[v]
            );
        }
        for (v, nbrs) in self.adjacency.iter().enumerate() {
            for &w in nbrs.iter().filter(|&&w| w > v) {
                let _ = writeln!(out, "  v{v} -- v{w};");
            }
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_tree(config: &TreeConfig) -> TruncatedTree {
    let TreeConfig { p, m1, m2, d, .. } = *config;
    let degree = p as usize + 1;
    let spine_len = d as usize + 1;
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); spine_len];
    let mut dist1: Vec<u32> = (0..=d).collect();
    let mut dist2: Vec<u32> = (0..=d).map(|i| d - i).collect();
    for i in 1..spine_len {
        adjacency[i - 1].push(i);
        adjacency[i].push(i - 1);
    }

    let mut queue: VecDeque<usize> = (0..spine_len).collect();
    while let Some(v) = queue.pop_front() {
        if dist1[v] >= m1 && dist2[v] >= m2 {
            continue;
        }
        // Branches leaving v away from the spine move away from both centres.
        while adjacency[v].len() < degree {
            let w = adjacency.len();
            adjacency.push(vec![v]);
            adjacency[v].push(w);
            dist1.push(dist1[v] + 1);
            dist2.push(dist2[v] + 1);
            queue.push_back(w);
        }
    }

    let tree = TruncatedTree { adjacency, spine: (0..spine_len).collect(), dist1, dist2 };
    assert_eq!(tree.distances_from(tree.center1()), tree.dist1, "dist1 bookkeeping");
    assert_eq!(tree.distances_from(tree.center2()), tree.dist2, "dist2 bookkeeping");
    tree
}

/// `<Z(b1), Z(b2)>` by expanding both divisors over the explicit tree.
pub fn intersect_bruteforce(config: &TreeConfig) -> i64 {
    let tree = build_tree(config);
    let (mult1, mult2) = tree.multiplicities(config);
    let p = config.p;

    let hh = if config.d == 0 { config.e.unwrap_or(0) as i64 } else { 0 };
    // <Z(b1)^h, P_L> is 1 exactly on the first centre.
    let h_v: i64 = (0..tree.len()).filter(|&v| v == tree.center1()).map(|v| mult2[v]).sum();
    let mut vertical = 0i64;
    for (v, &m) in mult1.iter().enumerate().filter(|(_, &m)| m != 0) {
        assert_eq!(tree.adjacency[v].len(), p as usize + 1, "vertex {v} is truncated");
        vertical += m * tree.explicit_p_z(v, &mult2, p);
    }
    hh + h_v + vertical
}

/// `<Z(b1), Z(b2)>` in closed form.
pub fn intersect_closed(config: &TreeConfig) -> i64 {
    let TreeConfig { p, m1, m2, d, e } = *config;
    if !config.balls_meet() {
        return 0;
    }
    if config.nested() {
        let hh = if d == 0 { e.unwrap_or(0) as i64 } else { 0 };
        ((m1 + m2 - d) / 2) as i64 - geo(p, m1) + hh
    } else {
        let r = (m1 + m2 - d) / 2;
        r as i64 - geo(p, r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overlap {
    pub radius: u32,
    /// Position of the centre of `B(b1) n B(b2)` along the spine, from the
    /// first centre.
    pub center_position: u32,
}

pub fn overlap_ball(config: &TreeConfig) -> Result<Overlap> {
    let TreeConfig { m1, m2, d, .. } = *config;
    if !config.balls_meet() {
        return Err(Error::pre(format!("empty overlap: d = {d} > m1 + m2 = {}", m1 + m2)));
    }
    let radius = ((m1 + m2 - d) / 2).min(m1);
    Ok(Overlap { radius, center_position: m1 - radius })
}

/// The `GL_2`-class `diag(p^a, p^b)` of the Gram matrix `T`, or "not integral"
/// when the balls are disjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiagInvariants {
    Integral { a: u32, b: u32 },
    NotIntegral,
}

pub fn diag_invariants(config: &TreeConfig) -> DiagInvariants {
    let TreeConfig { m1, m2, d, e, .. } = *config;
    if d == 0 {
        DiagInvariants::Integral { a: m2 + 2 * e.unwrap_or(0), b: m1 }
    } else if config.nested() {
        DiagInvariants::Integral { a: m2 - d, b: m1 }
    } else if config.balls_meet() {
        let r = (m1 + m2 - d) / 2;
        DiagInvariants::Integral { a: r, b: r }
    } else {
        DiagInvariants::NotIntegral
    }
}

/// Every admissible configuration with `m1 <= m2 <= max_m`, `d <= m1+m2+extra_d`
/// and `e` in `es` when `d = 0`.
pub fn sweep_configs(p: u64, max_m: u32, extra_d: u32, es: &[u32]) -> Vec<TreeConfig> {
    let mut out = Vec::new();
    for m2 in 0..=max_m {
        for m1 in 0..=m2 {
            for d in (0..=m1 + m2 + extra_d).filter(|d| (m1 + m2 + d) % 2 == 0) {
                if d == 0 {
                    out.extend(es.iter().map(|&e| TreeConfig { p, m1, m2, d, e: Some(e) }));
                } else {
                    out.push(TreeConfig { p, m1, m2, d, e: None });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localfield::mu;

    fn cfg(p: u64, m1: u32, m2: u32, d: u32, e: Option<u32>) -> TreeConfig {
        TreeConfig::new(p, m1, m2, d, e).unwrap()
    }

    #[test]
    fn config_guards() {
        assert!(TreeConfig::new(3, 2, 1, 1, None).is_err());
        assert!(TreeConfig::new(3, 1, 1, 1, None).is_err());
        assert!(TreeConfig::new(3, 1, 1, 0, None).is_err());
        assert!(TreeConfig::new(3, 1, 1, 2, Some(0)).is_err());
        assert!(TreeConfig::new(2, 1, 1, 2, None).is_err());
        assert!(TreeConfig::new(3, 1, 2, 1, None).is_ok());
    }

    #[test]
    fn multiplicity_values() {
        assert_eq!(multiplicity(3, 0), 2);
        assert_eq!(multiplicity(4, 4), 0);
        assert_eq!(multiplicity(4, 1), 2);
        assert_eq!(multiplicity(4, 5), 0);
        assert_eq!(multiplicity(-1, 0), 0);
        // boundary zeros, one step inside is non-zero
        for m in 1..8 {
            assert_eq!(multiplicity(m, m), 0);
            assert!(multiplicity(m, m - 1) > 0);
        }
    }

    #[test]
    fn base_pairings() {
        assert_eq!(pairing_pp(0, 3), -4);
        assert_eq!(pairing_pp(1, 3), 1);
        assert_eq!(pairing_pp(7, 3), 0);
        assert_eq!(pairing_p_z(0, 2, 3), 1);
        assert_eq!(pairing_p_z(1, 2, 3), -3);
        assert_eq!(pairing_p_z(3, 2, 3), 0);
        assert_eq!(pairing_p_z(0, -1, 3), 0);
    }

    #[test]
    fn tree_sizes() {
        let t = build_tree(&cfg(3, 0, 0, 0, Some(0)));
        assert_eq!((t.len(), t.edge_count()), (1, 0));
        let t = build_tree(&cfg(3, 1, 1, 2, None));
        assert_eq!(t.len(), 5 + 5 - 1);
        let t = build_tree(&cfg(3, 2, 2, 0, Some(0)));
        assert_eq!(t.len(), 1 + 4 + 4 * 3);
        assert_eq!(t.edge_count(), t.len() - 1);
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(intersect_bruteforce(&cfg(3, 0, 0, 0, Some(0))), 0);
        assert_eq!(intersect_bruteforce(&cfg(3, 1, 1, 2, None)), 0);
        assert_eq!(intersect_bruteforce(&cfg(3, 2, 2, 0, Some(0))), -10);
    }

    #[test]
    fn closed_examples() {
        assert_eq!(intersect_closed(&cfg(3, 2, 6, 10, None)), 0);
        assert_eq!(intersect_closed(&cfg(3, 2, 4, 2, None)), -10);
        assert_eq!(intersect_closed(&cfg(3, 2, 2, 2, None)), -2);
    }

    #[test]
    fn overlap_examples() {
        let o = |m1, m2, d, e| overlap_ball(&cfg(3, m1, m2, d, e)).unwrap();
        assert_eq!(o(2, 2, 2, None), Overlap { radius: 1, center_position: 1 });
        assert_eq!(o(1, 3, 0, Some(0)), Overlap { radius: 1, center_position: 0 });
        assert_eq!(o(2, 4, 2, None), Overlap { radius: 2, center_position: 0 });
        assert!(overlap_ball(&cfg(3, 1, 1, 4, None)).is_err());
    }

    #[test]
    fn invariants_examples() {
        use DiagInvariants::*;
        assert_eq!(diag_invariants(&cfg(3, 2, 4, 2, None)), Integral { a: 2, b: 2 });
        assert_eq!(diag_invariants(&cfg(3, 2, 2, 2, None)), Integral { a: 1, b: 1 });
        assert_eq!(diag_invariants(&cfg(3, 2, 2, 0, Some(3))), Integral { a: 8, b: 2 });
        assert_eq!(diag_invariants(&cfg(3, 1, 1, 4, None)), NotIntegral);
    }

    #[test]
    fn explicit_sums_reproduce_base_pairing() {
        for p in [3u64, 5] {
            for c in sweep_configs(p, 4, 2, &[0]) {
                let tree = build_tree(&c);
                let (_, mult2) = tree.multiplicities(&c);
                for v in 0..tree.len() {
                    assert_eq!(
                        tree.explicit_p_z(v, &mult2, p),
                        pairing_p_z(tree.dist2[v] as i64, c.m2 as i64, p),
                        "{c:?} vertex {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn overlap_is_a_ball() {
        for c in sweep_configs(3, 4, 0, &[0]) {
            let tree = build_tree(&c);
            let o = overlap_ball(&c).unwrap();
            let from_gamma = tree.distances_from(tree.spine[o.center_position as usize]);
            for (v, &g) in from_gamma.iter().enumerate() {
                let in_both = tree.dist1[v] <= c.m1 && tree.dist2[v] <= c.m2;
                assert_eq!(in_both, g <= o.radius, "{c:?} vertex {v}");
            }
        }
    }

    #[test]
    fn bruteforce_matches_closed_form() {
        for p in [3u64, 5] {
            for c in sweep_configs(p, 5, 2, &[0, 1, 2]) {
                assert_eq!(intersect_bruteforce(&c), intersect_closed(&c), "{c:?}");
            }
        }
    }

    #[test]
    fn closed_form_agrees_with_mu() {
        for p in [3u64, 5, 7] {
            for c in sweep_configs(p, 6, 2, &[0, 1, 2, 3]) {
                if let DiagInvariants::Integral { a, b } = diag_invariants(&c) {
                    assert_eq!(mu(a, b, p).unwrap(), crate::exact::int(intersect_closed(&c)), "{c:?}");
                }
            }
        }
    }

    #[test]
    fn dot_output_mentions_every_edge() {
        let c = cfg(3, 1, 1, 2, None);
        let dot = build_tree(&c).to_dot(&c);
        assert_eq!(dot.matches(" -- ").count(), 8);
        assert!(dot.starts_with("graph"));
    }
}
