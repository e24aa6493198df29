//! The residue rings `o/p^k` of the unramified quadratic extension of `Q_p`
//! and the local intersection invariant `mu_p`.
//!
//! An element `a + b*delta` with `delta^2 = eps` is stored as the residue pair
//! `(a, b)`; conjugation flips the sign of `b`.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, Rational};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub(crate) fn require_odd_prime(p: u64) -> Result<()> {
    if p == 2 {
        return Err(Error::pre("p = 2 is not supported; p must be an odd prime"));
    }
    if !is_prime(p) {
        return Err(Error::pre(format!("p = {p} must be an odd prime")));
    }
    Ok(())
}

pub fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut acc: u128 = 1 % m;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Legendre symbol `(a | p)` for an odd prime `p`, via Euler's criterion.
pub fn legendre(a: i64, p: u64) -> i32 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

pub fn smallest_nonresidue(p: u64) -> u64 {
    (2..p).find(|&e| legendre(e as i64, p) == -1).expect("odd primes have non-residues")
}

/// `o_{k,p} / p^k` for the unramified quadratic extension, presented as
/// `(Z/p^k)[delta]` with `delta^2 = eps`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InertLocalRing {
    p: u64,
    k: u32,
    eps: u64,
    modulus: u64,
}

impl InertLocalRing {
    /// Uses the smallest positive quadratic non-residue as `eps`.
    pub fn new(p: u64, k: u32) -> Result<Self> {
        require_odd_prime(p)?;
        Self::with_eps(p, k, smallest_nonresidue(p))
    }

    pub fn with_eps(p: u64, k: u32, eps: u64) -> Result<Self> {
        require_odd_prime(p)?;
        if k == 0 {
            return Err(Error::pre("precision k must be at least 1"));
        }
        if !(1..p).contains(&eps) || legendre(eps as i64, p) != -1 {
            return Err(Error::pre(format!(
                "eps = {eps} must be a quadratic non-residue modulo {p} in [1, p)"
            )));
        }
        let modulus = p
            .checked_pow(k)
            .filter(|m| *m < (1 << 31))
            .ok_or_else(|| Error::pre(format!("p^k = {p}^{k} is too large")))?;
        // A non-residue mod p stays a non-residue mod p^k: any square root mod
        // p^k would reduce to one mod p.
        debug_assert!((0..p).all(|x| x * x % p != eps % p));
        Ok(InertLocalRing { p, k, eps, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn eps(&self) -> u64 {
        self.eps
    }

    /// `p^k`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Number of ring elements, `p^{2k}`.
    pub fn size(&self) -> u64 {
        self.modulus * self.modulus
    }

    pub fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.modulus as i64) as u64
    }

    pub fn elem(&self, a: i64, b: i64) -> ResidueRingElem {
        ResidueRingElem { a: self.reduce(a), b: self.reduce(b) }
    }

    pub fn delta(&self) -> ResidueRingElem {
        self.elem(0, 1)
    }

    pub fn is_valid(&self, x: &ResidueRingElem) -> bool {
        x.a < self.modulus && x.b < self.modulus
    }

    /// The element with mixed-radix index `i` in `[0, p^{2k})`.
    pub fn from_index(&self, i: u64) -> ResidueRingElem {
        ResidueRingElem { a: i % self.modulus, b: i / self.modulus }
    }

    pub fn add(&self, x: &ResidueRingElem, y: &ResidueRingElem) -> ResidueRingElem {
        let m = self.modulus;
        ResidueRingElem { a: (x.a + y.a) % m, b: (x.b + y.b) % m }
    }

    pub fn mul(&self, x: &ResidueRingElem, y: &ResidueRingElem) -> ResidueRingElem {
        let m = self.modulus;
        let bb = x.b * y.b % m;
        ResidueRingElem {
            a: (x.a * y.a % m + self.eps * bb % m) % m,
            b: (x.a * y.b % m + x.b * y.a % m) % m,
        }
    }

    pub fn conj(&self, x: &ResidueRingElem) -> ResidueRingElem {
        ResidueRingElem { a: x.a, b: (self.modulus - x.b) % self.modulus }
    }

    /// `N(a + b delta) = a^2 - eps b^2 mod p^k`.
    pub fn norm(&self, x: &ResidueRingElem) -> u64 {
        let m = self.modulus;
        let a2 = x.a * x.a % m;
        let b2 = self.eps * (x.b * x.b % m) % m;
        (a2 + m - b2) % m
    }

    pub fn is_unit(&self, x: &ResidueRingElem) -> bool {
        !self.norm(x).is_multiple_of(self.p)
    }

    pub fn elements(&self) -> impl Iterator<Item = ResidueRingElem> + '_ {
        (0..self.size()).map(|i| self.from_index(i))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueRingElem {
    pub a: u64,
    pub b: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RingOp {
    Add,
    Mul,
    Conj,
    Norm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RingValue {
    Elem(ResidueRingElem),
    Residue(u64),
}

/// Dispatch form of the ring operations; `conj` and `norm` ignore `y`.
pub fn ring_ops(
    ring: &InertLocalRing,
    x: &ResidueRingElem,
    y: &ResidueRingElem,
    kind: RingOp,
) -> Result<RingValue> {
    if !ring.is_valid(x) || !ring.is_valid(y) {
        return Err(Error::pre("operands must be reduced residues modulo p^k"));
    }
    Ok(match kind {
        RingOp::Add => RingValue::Elem(ring.add(x, y)),
        RingOp::Mul => RingValue::Elem(ring.mul(x, y)),
        RingOp::Conj => RingValue::Elem(ring.conj(x)),
        RingOp::Norm => RingValue::Residue(ring.norm(x)),
    })
}

/// `S = diag(p^{e_1}, ..., p^{e_m})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalHermitianSpec {
    diag_exponents: Vec<u32>,
}

impl LocalHermitianSpec {
    pub fn new(diag_exponents: Vec<u32>) -> Result<Self> {
        if diag_exponents.is_empty() {
            return Err(Error::pre("a local Hermitian form needs at least one diagonal entry"));
        }
        Ok(LocalHermitianSpec { diag_exponents })
    }

    /// The identity form of rank `m`.
    pub fn identity(m: usize) -> Result<Self> {
        Self::new(vec![0; m])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.diag_exponents
    }

    pub fn rank(&self) -> usize {
        self.diag_exponents.len()
    }

    /// Exponents sorted non-increasingly, as a partition.
    pub fn sorted_exponents(&self) -> Vec<u32> {
        let mut e = self.diag_exponents.clone();
        e.sort_unstable_by(|a, b| b.cmp(a));
        e
    }
}

/// `p + p^2 + ... + p^b = p (p^b - 1)/(p - 1)`.
pub(crate) fn p_geometric(p: u64, b: u32) -> Rational {
    let pr = int(p as i64);
    let mut term = int(1);
    let mut acc = Rational::zero();
    for _ in 0..b {
        term *= &pr;
        acc += &term;
    }
    acc
}

/// `mu_p(T) = (a+b)/2 - p (p^b - 1)/(p - 1)` for `T ~ diag(p^a, p^b)`.
pub fn mu(a: u32, b: u32, p: u64) -> Result<Rational> {
    require_odd_prime(p)?;
    if a < b {
        return Err(Error::pre(format!("need a >= b, got a = {a}, b = {b}")));
    }
    if !(a + b).is_multiple_of(2) {
        return Err(Error::pre(format!("a+b must be even, got a = {a}, b = {b}")));
    }
    Ok(int(((a + b) / 2) as i64) - p_geometric(p, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::to_integer;

    #[test]
    fn primes_and_symbols() {
        assert!(is_prime(3) && is_prime(7) && is_prime(101));
        assert!(!is_prime(1) && !is_prime(9) && !is_prime(91));
        assert_eq!(smallest_nonresidue(3), 2);
        assert_eq!(smallest_nonresidue(7), 3);
        assert_eq!(legendre(-4, 3), -1);
        assert_eq!(legendre(-4, 5), 1);
    }

    #[test]
    fn ring_construction_guards() {
        assert!(InertLocalRing::new(2, 1).is_err());
        assert!(InertLocalRing::new(9, 1).is_err());
        assert!(InertLocalRing::with_eps(5, 1, 4).is_err());
        assert!(InertLocalRing::new(3, 0).is_err());
        assert_eq!(InertLocalRing::new(5, 2).unwrap().eps(), 2);
    }

    #[test]
    fn ring_examples() {
        let r = InertLocalRing::with_eps(3, 1, 2).unwrap();
        for x in r.elements() {
            assert_eq!(r.conj(&r.conj(&x)), x);
        }
        let d = r.delta();
        assert_eq!(ring_ops(&r, &d, &d, RingOp::Norm).unwrap(), RingValue::Residue(1));
        let x = r.elem(1, 1);
        let y = r.elem(1, -1);
        assert_eq!(r.mul(&x, &y), r.elem(1 - 2, 0));
        assert!(ring_ops(&r, &ResidueRingElem { a: 3, b: 0 }, &x, RingOp::Add).is_err());
    }

    #[test]
    fn norm_is_multiplicative_exhaustively() {
        for k in 1..=2 {
            let r = InertLocalRing::new(3, k).unwrap();
            let m = r.modulus();
            for x in r.elements() {
                for y in r.elements() {
                    assert_eq!(r.norm(&r.mul(&x, &y)), r.norm(&x) * r.norm(&y) % m);
                }
            }
        }
    }

    #[test]
    fn norm_fibres_over_units() {
        for k in 1..=2u32 {
            let r = InertLocalRing::new(3, k).unwrap();
            let m = r.modulus() as usize;
            let units = r.elements().filter(|x| r.is_unit(x)).count() as u64;
            assert_eq!(units, 3u64.pow(2 * k) - 3u64.pow(2 * k - 2));
            let mut fibres = vec![0u64; m];
            for x in r.elements().filter(|x| r.is_unit(x)) {
                fibres[r.norm(&x) as usize] += 1;
            }
            let expected = 3u64.pow(k - 1) * 4;
            for (t, &count) in fibres.iter().enumerate() {
                if t % 3 != 0 {
                    assert_eq!(count, expected, "fibre over {t} at k = {k}");
                }
            }
        }
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu(0, 0, 3).unwrap(), int(0));
        assert_eq!(mu(2, 0, 3).unwrap(), int(1));
        assert_eq!(mu(2, 2, 3).unwrap(), int(-10));
        assert_eq!(mu(4, 2, 5).unwrap(), int(-27));
        assert!(mu(1, 0, 3).is_err());
        assert!(mu(0, 2, 3).is_err());
        assert!(mu(2, 0, 2).is_err());
    }

    #[test]
    fn mu_is_integral() {
        for p in [3u64, 5, 7, 11] {
            for a in 0..14u32 {
                for b in (0..=a).filter(|b| (a + b) % 2 == 0) {
                    assert!(to_integer(&mu(a, b, p).unwrap()).is_some());
                }
            }
        }
    }
}
