//! Local Hermitian representation densities at an inert prime.
//!
//! Two independent routes are provided for the rank-two targets
//! `T = diag(p^a, p^b)`:
//!
//! * [`alpha_general`] evaluates Hironaka's explicit formula for one
//!   `(S, T)` pair, summing over partitions `mu <= tilde(lambda)`.
//! * [`f_poly_nonsplit`], [`f_poly_closed`] and [`f_poly_nagaoka`] build the
//!   polynomial `F(S, T; X)` with `alpha(S + Id_r, T) = F((-p)^{-r})`, for
//!   `S = diag(p, 1)` (the first two) and `S = Id_2` (the last).
//!
//! The derivative at `X = 1` of the `diag(p, 1)` polynomial, combined with the
//! `Id_2` value, recovers the geometric invariant `mu_p(T)`
//! (see [`mu_from_densities`]).

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, neg_p_pow, pow, Polynomial, Rational};
use crate::localfield::{p_geometric, require_odd_prime};

/// A non-increasing tuple of non-negative integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::pre(format!("{parts:?} is not non-increasing")));
        }
        Ok(Partition { parts })
    }

    pub fn zeros(len: usize) -> Self {
        Partition { parts: vec![0; len] }
    }

    /// `(1, 0, ..., 0)` of the given length.
    pub fn unit_vector(len: usize) -> Self {
        let mut parts = vec![0; len];
        if let Some(first) = parts.first_mut() {
            *first = 1;
        }
        Partition { parts }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn largest(&self) -> u32 {
        self.parts.first().copied().unwrap_or(0)
    }

    /// Every part increased by one.
    pub fn tilde(&self) -> Self {
        Partition { parts: self.parts.iter().map(|x| x + 1).collect() }
    }

    /// `a'_i = #{j : a_j >= i}`.
    pub fn conj(&self, i: u32) -> i64 {
        self.parts.iter().filter(|&&x| x >= i).count() as i64
    }

    /// `|a|`.
    pub fn size(&self) -> i64 {
        self.parts.iter().map(|&x| x as i64).sum()
    }

    /// `n(a) = sum (i-1) a_i`.
    pub fn weight(&self) -> i64 {
        self.parts.iter().enumerate().map(|(i, &x)| i as i64 * x as i64).sum()
    }

    /// All partitions of the same length bounded componentwise by `self`.
    pub fn dominated(&self) -> Vec<Partition> {
        fn go(bound: &[u32], cap: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
            match bound.split_first() {
                None => out.push(Partition { parts: prefix.clone() }),
                Some((&b, rest)) => {
                    for v in 0..=b.min(cap) {
                        prefix.push(v);
                        go(rest, v, prefix, out);
                        prefix.pop();
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(&self.parts, u32::MAX, &mut Vec::new(), &mut out);
        out
    }
}

/// `T = diag(p^a, p^b)` with `a >= b >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityTarget {
    pub a: u32,
    pub b: u32,
    pub p: u64,
}

impl DensityTarget {
    pub fn new(a: u32, b: u32, p: u64) -> Result<Self> {
        require_odd_prime(p)?;
        if a < b {
            return Err(Error::pre(format!("need a >= b, got a = {a}, b = {b}")));
        }
        Ok(DensityTarget { a, b, p })
    }

    pub fn lambda(&self) -> Partition {
        Partition { parts: vec![self.a, self.b] }
    }

    fn require_even(&self) -> Result<()> {
        if !(self.a + self.b).is_multiple_of(2) {
            return Err(Error::pre(format!(
                "a+b must be even (ord_p det T even), got a = {}, b = {}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    fn pr(&self) -> Rational {
        int(self.p as i64)
    }
}

fn bracket_factor(p: u64, i: i64) -> Rational {
    int(1) - neg_p_pow(p, -i)
}

fn bracket_prod(p: u64, upto: i64) -> Rational {
    (1..=upto).fold(int(1), |acc, i| acc * bracket_factor(p, i))
}

/// The Gaussian-binomial style symbol with argument `(-p)^{-i}`; zero when
/// `v` lies outside `[0, u]`.
pub fn bracket(u: i64, v: i64, p: u64) -> Rational {
    if v < 0 || v > u {
        return Rational::zero();
    }
    if v == 0 || v == u {
        return int(1);
    }
    bracket_prod(p, u) / (bracket_prod(p, v) * bracket_prod(p, u - v))
}

/// The factor `I_j(mu, lambda)` of Hironaka's formula, with the tilde in the
/// exponent of `(-p)`.
pub fn i_j(mu: &Partition, lambda: &Partition, p: u64, j: u32) -> Rational {
    assert!(j >= 1, "I_j is defined for j >= 1");
    let lt = lambda.tilde();
    let top_next = lt.conj(j + 1);
    let top = lt.conj(j);
    let mu_next = mu.conj(j + 1);
    let mu_here = mu.conj(j);
    let mut acc = Rational::zero();
    let hi = top_next.min(mu_here);
    for i in mu_next..=hi {
        let twice = i * (2 * top_next + 1 - i);
        assert!(twice % 2 == 0, "half-integral exponent in I_j");
        let term = neg_p_pow(p, twice / 2)
            * bracket(top_next - mu_next, top_next - i, p)
            * bracket(top - i, top - mu_here, p);
        acc += term;
    }
    acc
}

/// `prod_{j >= 1} I_j(mu, lambda)`, truncated where the factors become 1.
pub fn i_product(mu: &Partition, lambda: &Partition, p: u64) -> Rational {
    let last = lambda.largest().max(mu.largest()) + 1;
    let prod = (1..=last).fold(int(1), |acc, j| acc * i_j(mu, lambda, p, j));
    assert!(i_j(mu, lambda, p, last + 1).is_one(), "I_j beyond the truncation point must be 1");
    prod
}

/// `alpha(S_xi, T_lambda)` by Hironaka's explicit formula.
pub fn alpha_general(xi: &Partition, lambda: &Partition, p: u64) -> Result<Rational> {
    require_odd_prime(p)?;
    let (m, n) = (xi.len() as i64, lambda.len() as i64);
    if m < n {
        return Err(Error::pre(format!("need rank(S) = {m} >= rank(T) = {n}")));
    }
    let mut total = Rational::zero();
    for mu in lambda.tilde().dominated() {
        let size = mu.size();
        let pairing: i64 = (1..=xi.largest().max(mu.largest()))
            .map(|i| xi.conj(i) * mu.conj(i))
            .sum();
        let exponent = -mu.weight() + (n - m - 1) * size + pairing;
        let sign = if size % 2 == 0 { int(1) } else { int(-1) };
        let prod = i_product(&mu, lambda, p);
        if prod.is_zero() {
            continue;
        }
        total += sign * neg_p_pow(p, exponent) * prod;
    }
    Ok(total)
}

/// `F(diag(p,1), T; X)` as the explicit double sum over `mu = (c, d)`.
pub fn f_poly_nonsplit(target: &DensityTarget) -> Result<Polynomial> {
    target.require_even()?;
    let DensityTarget { a, b, p } = *target;
    let lambda = target.lambda();
    let mut coeffs = vec![Rational::zero(); (a + b + 3) as usize];
    for c in 0..=a + 1 {
        for d in 0..=c.min(b + 1) {
            let mu = Partition { parts: vec![c, d] };
            let eps = (c > 0) as i64 + (d > 0) as i64;
            let sign = if d % 2 == 0 { int(1) } else { int(-1) };
            let scalar = sign
                * pow(&target.pr(), -(2 * d as i64) - c as i64)
                * neg_p_pow(p, eps)
                * i_product(&mu, &lambda, p);
            coeffs[(c + d) as usize] += scalar;
        }
    }
    Ok(Polynomial::from_coeffs(coeffs))
}

fn lin(c0: Rational, c1: Rational) -> Polynomial {
    Polynomial::from_coeffs(vec![c0, c1])
}

fn mono(c: Rational, deg: u32) -> Polynomial {
    Polynomial::monomial(c, deg as usize)
}

/// `(1 - X)(X + p)/p`.
fn base_factor(p: &Rational) -> Polynomial {
    (&lin(int(1), int(-1)) * &lin(p.clone(), int(1))).scale(&p.recip())
}

/// `F(diag(p,1), p^eps Id_2; X)` for `eps` in {0, 1}.
pub fn f_eps(p: u64, eps: u32) -> Polynomial {
    let pr = int(p as i64);
    let quad = Polynomial::from_coeffs(vec![int(1), -(&pr * &pr - &pr), int(1)]);
    &base_factor(&pr) * &quad.pow(eps)
}

/// The bracket `-p^{b+1}(X-1) + p X^{b+1} - p^{-1} X^{b+2}` shared by the
/// closed form and the first recursion.
fn step_a_bracket(p: &Rational, b: u32) -> Polynomial {
    let pb1 = pow(p, b as i64 + 1);
    let head = lin(pb1.clone(), -pb1);
    &(&head + &mono(p.clone(), b + 1)) - &mono(p.recip(), b + 2)
}

/// `F(diag(p,1), T; X)` assembled from the closed form with exact divisions.
pub fn f_poly_closed(target: &DensityTarget) -> Result<Polynomial> {
    target.require_even()?;
    let DensityTarget { a, b, p } = *target;
    let pr = target.pr();
    let eps = b % 2;
    let x2_minus_1 = Polynomial::from_ints(&[-1, 0, 1]);

    // (pX)(1-p) ((pX)^b - (pX)^eps)/(pX - 1)
    let px_diff = &mono(pow(&pr, b as i64), b) - &mono(pow(&pr, eps as i64), eps);
    let first = &mono(&pr * (int(1) - &pr), 1) * &px_diff.div_exact(&lin(int(-1), pr.clone()))?;

    // X^2 (p - X/p) (X^{2b} - X^{2eps})/(X^2 - 1)
    let x_diff = &mono(int(1), 2 * b) - &mono(int(1), 2 * eps);
    let second = &(&mono(int(1), 2) * &lin(pr.clone(), -pr.recip()))
        * &x_diff.div_exact(&x2_minus_1)?;

    // (...)(X^{a+1} - X^{b+1})/(X^2 - 1)
    let tail = &mono(int(1), a + 1) - &mono(int(1), b + 1);
    let third = &step_a_bracket(&pr, b) * &tail.div_exact(&x2_minus_1)?;

    let braces = &(&first + &second) + &third;
    let outer = &(&lin(int(-1), int(1)) * &lin(pr.clone(), int(1))) * &braces;
    let correction = outer.div_exact(&lin(-pr, int(1)))?;
    Ok(&f_eps(p, eps) + &correction)
}

/// `F(Id_2, T; X)` from Nagaoka's closed form.
pub fn f_poly_nagaoka(target: &DensityTarget) -> Result<Polynomial> {
    let DensityTarget { a, b, .. } = *target;
    let pr = target.pr();
    let front = &lin(int(1), pr.recip()) * &lin(int(1), -pow(&pr, -2));
    let mut sum = Polynomial::zero();
    for l in 0..=b {
        let top = (a + b - 2 * l) as usize;
        let alternating = Polynomial::from_coeffs(
            (0..=top).map(|k| if k % 2 == 0 { int(1) } else { int(-1) }).collect(),
        );
        sum = &sum + &(&mono(pow(&pr, l as i64), l) * &alternating);
    }
    Ok(&front * &sum)
}

/// `F(S, diag(p^{a+2}, p^b)) - F(S, diag(p^a, p^b))` for `S = diag(p, 1)`, in
/// closed form.
pub fn recursion_delta_a(target: &DensityTarget) -> Result<Polynomial> {
    target.require_even()?;
    let pr = target.pr();
    let bracket = step_a_bracket(&pr, target.b);
    if !bracket.eval(&pr).is_zero() {
        return Err(Error::InexactDivision("step bracket does not vanish at X = p".into()));
    }
    let numer = &(&(&mono(int(1), target.a + 1) * &lin(pr.clone(), int(1)))
        * &lin(int(-1), int(1)))
        * &bracket;
    numer.div_exact(&lin(-pr, int(1)))
}

/// `F(S, diag(p^{b+2}, p^{b+2})) - F(S, diag(p^{b+2}, p^b))` for
/// `S = diag(p, 1)`, in closed form.
pub fn recursion_delta_b(b: u32, p: u64) -> Result<Polynomial> {
    require_odd_prime(p)?;
    let pr = int(p as i64);
    let lead = lin(-&pr, int(1) + &pr - &pr * &pr).scale(&pow(&pr, b as i64 + 1));
    let tail = &lin(pr.clone(), -pr.recip()) * &mono(int(1), b + 3);
    let bracket = &lead + &tail;
    if !bracket.eval(&pr).is_zero() {
        return Err(Error::InexactDivision("step bracket does not vanish at X = p".into()));
    }
    let numer = &(&(&mono(int(1), b + 1) * &lin(pr.clone(), int(1))) * &lin(int(-1), int(1)))
        * &bracket;
    numer.div_exact(&lin(-pr, int(1)))
}

/// `alpha'(diag(p,1), T) = -dF/dX at X = 1`.
pub fn alpha_prime(target: &DensityTarget) -> Result<Rational> {
    Ok(-f_poly_nonsplit(target)?.derivative().eval(&int(1)))
}

/// `p/(p+1)^2 [alpha'(diag(p,1), T) + p^2/(1-p^2) alpha(Id_2, T)]`.
pub fn mu_from_densities(target: &DensityTarget) -> Result<Rational> {
    target.require_even()?;
    let pr = target.pr();
    let self_dual = f_poly_nagaoka(target)?.eval(&int(1));
    let p2 = &pr * &pr;
    let inner = alpha_prime(target)? + &p2 / (int(1) - &p2) * self_dual;
    let scale = &pr / ((&pr + int(1)) * (&pr + int(1)));
    Ok(scale * inner)
}

/// `alpha(Id_2, T)` in closed form: `(1+1/p)(1-1/p^2)(p^{b+1}-1)/(p-1)`.
pub fn alpha_self_dual_closed(target: &DensityTarget) -> Rational {
    let pr = target.pr();
    (int(1) + pr.recip()) * (int(1) - pow(&pr, -2)) * (int(1) + p_geometric(target.p, target.b))
}

/// `(-p)^{-r}`, the point at which `F` yields `alpha(S + Id_r, T)`.
pub fn x_at(p: u64, r: u32) -> Rational {
    neg_p_pow(p, -(r as i64))
}
