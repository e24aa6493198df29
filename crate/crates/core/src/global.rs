//! Global bookkeeping over an imaginary quadratic field `k = Q(sqrt Delta)`.
//!
//! Elements of `k` are written `x + y w` with `w = (Delta + sqrt Delta) / 2`,
//! so `o_k = Z + Z w`, `w + w' = Delta` and `w w' = (Delta^2 - Delta) / 4`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, int, Rational};
use crate::localfield::{is_prime, legendre, mu, require_odd_prime, LocalHermitianSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadField {
    disc: i64,
}

fn is_squarefree(n: u64) -> bool {
    factorize(n).iter().all(|&(_, e)| e == 1)
}

impl QuadField {
    pub fn new(disc: i64) -> Result<Self> {
        if disc >= 0 {
            return Err(Error::pre(format!("discriminant must be negative, got {disc}")));
        }
        let m = disc.unsigned_abs();
        let fundamental = match disc.rem_euclid(4) {
            1 => is_squarefree(m),
            0 => matches!((disc / 4).rem_euclid(4), 2 | 3) && is_squarefree(m / 4),
            _ => false,
        };
        if !fundamental {
            return Err(Error::pre(format!("{disc} is not a fundamental discriminant")));
        }
        Ok(QuadField { disc })
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    /// `w w' = (Delta^2 - Delta) / 4`.
    fn omega_norm(&self) -> i64 {
        (self.disc * self.disc - self.disc) / 4
    }

    pub fn omega(&self) -> FieldElem {
        FieldElem::integral(0, 1)
    }

    pub fn conj(&self, z: &FieldElem) -> FieldElem {
        FieldElem { x: &z.x + &z.y * int(self.disc), y: -z.y.clone() }
    }

    pub fn mul(&self, u: &FieldElem, v: &FieldElem) -> FieldElem {
        let yy = &u.y * &v.y;
        FieldElem {
            x: &u.x * &v.x - &yy * int(self.omega_norm()),
            y: &u.x * &v.y + &u.y * &v.x + &yy * int(self.disc),
        }
    }

    pub fn norm(&self, z: &FieldElem) -> Rational {
        &z.x * &z.x + int(self.disc) * &z.x * &z.y + int(self.omega_norm()) * &z.y * &z.y
    }

    fn oint(&self) -> OkArith {
        OkArith { disc: self.disc, c: self.omega_norm() }
    }
}

/// `x + y w` with rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElem {
    #[serde(with = "exact::rational_str")]
    pub x: Rational,
    #[serde(with = "exact::rational_str")]
    pub y: Rational,
}

impl FieldElem {
    pub fn new(x: Rational, y: Rational) -> Self {
        FieldElem { x, y }
    }

    pub fn integral(x: i64, y: i64) -> Self {
        FieldElem { x: int(x), y: int(y) }
    }

    pub fn is_integral(&self) -> bool {
        self.x.is_integer() && self.y.is_integer()
    }

    fn to_oint(&self) -> Result<(i64, i64)> {
        let conv = |r: &Rational| exact::to_integer(r).and_then(|v| i64::try_from(v).ok());
        match (conv(&self.x), conv(&self.y)) {
            (Some(x), Some(y)) => Ok((x, y)),
            _ => Err(Error::pre(format!("{self} is not an integral element of o_k"))),
        }
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*w", exact::format_rational(&self.x), exact::format_rational(&self.y))
    }
}

/// Integer arithmetic on `o_k` for the enumeration loops.
#[derive(Clone, Copy)]
struct OkArith {
    disc: i64,
    c: i64,
}

/// `(x, y)` standing for `x + y w` in `o_k`.
pub type Oint = (i64, i64);

impl OkArith {
    fn mul(self, u: Oint, v: Oint) -> Oint {
        (u.0 * v.0 - self.c * u.1 * v.1, u.0 * v.1 + u.1 * v.0 + self.disc * u.1 * v.1)
    }

    fn conj(self, u: Oint) -> Oint {
        (u.0 + self.disc * u.1, -u.1)
    }

    fn add(u: Oint, v: Oint) -> Oint {
        (u.0 + v.0, u.1 + v.1)
    }

    fn norm(self, u: Oint) -> i64 {
        u.0 * u.0 + self.disc * u.0 * u.1 + self.c * u.1 * u.1
    }
}

/// `((t1, a), (a', t2))` with `t1, t2` rational integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalHermitianMatrix {
    pub t1: i64,
    pub t2: i64,
    pub a: FieldElem,
}

impl GlobalHermitianMatrix {
    pub fn new(t1: i64, t2: i64, a: FieldElem) -> Self {
        GlobalHermitianMatrix { t1, t2, a }
    }

    pub fn diag(t1: i64, t2: i64) -> Self {
        Self::new(t1, t2, FieldElem::integral(0, 0))
    }

    pub fn det(&self, field: &QuadField) -> Rational {
        int(self.t1) * int(self.t2) - field.norm(&self.a)
    }

    fn det_integer(&self, field: &QuadField) -> Result<BigInt> {
        let det = self.det(field);
        if !det.is_integer() {
            return Err(Error::pre(format!("det T = {} is not an integer", exact::format_rational(&det))));
        }
        Ok(det.to_integer())
    }

    pub fn is_positive_definite(&self, field: &QuadField) -> bool {
        self.t1 > 0 && self.det(field).is_positive()
    }

    fn require_positive_definite(&self, field: &QuadField, what: &str) -> Result<()> {
        if !self.is_positive_definite(field) {
            return Err(Error::pre(format!("{what} must be positive definite (t1 > 0, det > 0)")));
        }
        Ok(())
    }

    /// `U'^t M U` for `U = ((u11, u12), (u21, u22))` over `o_k`.
    pub fn transform(&self, field: &QuadField, u: [[FieldElem; 2]; 2]) -> Result<Self> {
        let ar = field.oint();
        let g = [[(self.t1, 0), self.a.to_oint()?], [ar.conj(self.a.to_oint()?), (self.t2, 0)]];
        let u = [[u[0][0].to_oint()?, u[0][1].to_oint()?], [u[1][0].to_oint()?, u[1][1].to_oint()?]];
        let entry = |i: usize, j: usize| {
            let mut acc = (0, 0);
            for r in 0..2 {
                for s in 0..2 {
                    acc = OkArith::add(acc, ar.mul(ar.conj(u[r][i]), ar.mul(g[r][s], u[s][j])));
                }
            }
            acc
        };
        let (t1, t2, a) = (entry(0, 0), entry(1, 1), entry(0, 1));
        debug_assert!(t1.1 == 0 && t2.1 == 0);
        Ok(Self::new(t1.0, t2.0, FieldElem::integral(a.0, a.1)))
    }
}

/// Parses `"t1,t2,ax,ay"`.
impl FromStr for GlobalHermitianMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("expected \"t1,t2,ax,ay\", got {s:?}")));
        }
        let t = |i: usize| {
            parts[i].parse::<i64>().map_err(|e| Error::Parse(format!("{:?}: {e}", parts[i])))
        };
        Ok(Self::new(
            t(0)?,
            t(1)?,
            FieldElem::new(exact::parse_rational(parts[2])?, exact::parse_rational(parts[3])?),
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStructure {
    d: u64,
}

impl LevelStructure {
    pub fn new(field: &QuadField, d: u64) -> Result<Self> {
        if d == 0 || !is_squarefree(d) {
            return Err(Error::pre(format!("level d = {d} must be a positive squarefree integer")));
        }
        for (l, _) in factorize(d) {
            if classify_prime(field, l)? != PrimeKind::Inert {
                return Err(Error::pre(format!("prime {l} | d is not inert in Q(sqrt {})", field.disc)));
            }
        }
        Ok(LevelStructure { d })
    }

    pub fn d(&self) -> u64 {
        self.d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimeKind {
    Split,
    Inert,
    Ramified,
}

pub fn classify_prime(field: &QuadField, l: u64) -> Result<PrimeKind> {
    if !is_prime(l) {
        return Err(Error::pre(format!("{l} is not prime")));
    }
    let disc = field.disc;
    if disc.rem_euclid(l as i64) == 0 {
        return Ok(PrimeKind::Ramified);
    }
    let symbol = if l == 2 {
        if disc.rem_euclid(8) == 1 { 1 } else { -1 }
    } else {
        legendre(disc, l)
    };
    Ok(if symbol == 1 { PrimeKind::Split } else { PrimeKind::Inert })
}

/// Trial-division factorization, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q * q <= n {
        if n.is_multiple_of(q) {
            let mut e = 0;
            while n.is_multiple_of(q) {
                n /= q;
                e += 1;
            }
            out.push((q, e));
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Place {
    Infinity,
    Prime(u64),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Prime(l) => write!(f, "{l}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "oo" => Ok(Place::Infinity),
            t => t
                .parse::<u64>()
                .map(Place::Prime)
                .map_err(|_| Error::Parse(format!("place must be a prime or \"inf\", got {s:?}"))),
        }
    }
}

fn valuation(n: &BigInt, p: u64) -> (u32, BigInt) {
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while !n.is_zero() && (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    (v, n)
}

/// `ord_p` of a nonzero rational.
pub fn ord(x: &Rational, p: u64) -> i64 {
    valuation(x.numer(), p).0 as i64 - valuation(x.denom(), p).0 as i64
}

/// A nonzero rational's square class as an integer `n * d`.
fn square_class(x: &Rational) -> BigInt {
    x.numer() * x.denom()
}

fn mod_small(n: &BigInt, m: u64) -> u64 {
    n.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits")
}

/// The local Hilbert symbol `(a, b)_v`.
pub fn hilbert_symbol(a: &Rational, b: &Rational, place: Place) -> Result<i32> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::pre("Hilbert symbol arguments must be nonzero"));
    }
    let (a, b) = (square_class(a), square_class(b));
    let p = match place {
        Place::Infinity => return Ok(if a.is_negative() && b.is_negative() { -1 } else { 1 }),
        Place::Prime(p) if !is_prime(p) => return Err(Error::pre(format!("{p} is not prime"))),
        Place::Prime(p) => p,
    };
    let (alpha, u) = valuation(&a, p);
    let (beta, v) = valuation(&b, p);
    if p == 2 {
        let (u8_, v8) = (mod_small(&u, 8), mod_small(&v, 8));
        let eps = |x: u64| ((x - 1) / 2) % 2;
        let omega = |x: u64| ((x * x - 1) / 8) % 2;
        let e = eps(u8_) * eps(v8) + alpha as u64 * omega(v8) + beta as u64 * omega(u8_);
        return Ok(if e.is_multiple_of(2) { 1 } else { -1 });
    }
    let mut sign = if (alpha as u64 * beta as u64 * ((p - 1) / 2)).is_multiple_of(2) { 1 } else { -1 };
    let leg = |x: &BigInt| legendre(mod_small(x, p) as i64, p);
    if beta % 2 == 1 {
        sign *= leg(&u);
    }
    if alpha % 2 == 1 {
        sign *= leg(&v);
    }
    Ok(sign)
}

/// `inv_v(V) = (det V, Delta)_v`.
pub fn inv_v(det_v: &Rational, field: &QuadField, place: Place) -> Result<i32> {
    hilbert_symbol(det_v, &int(field.disc), place)
}

/// The places at which `(a, b)_v` can be `-1`: infinity and primes dividing
/// `2ab`.
pub fn relevant_places(a: &Rational, b: &Rational) -> Vec<Place> {
    let mut primes: BTreeSet<u64> = BTreeSet::from([2]);
    for x in [a.numer(), a.denom(), b.numer(), b.denom()] {
        let n = x.abs().to_u64().expect("desk-scale inputs");
        primes.extend(factorize(n).into_iter().map(|(q, _)| q));
    }
    std::iter::once(Place::Infinity).chain(primes.into_iter().map(Place::Prime)).collect()
}

/// `prod_v (a, b)_v` over [`relevant_places`].
pub fn hilbert_product(a: &Rational, b: &Rational) -> Result<i32> {
    relevant_places(a, b).into_iter().try_fold(1, |acc, v| Ok(acc * hilbert_symbol(a, b, v)?))
}

/// `{l inert, l !| d, ord_l det T odd} u {l | d, ord_l det T even}`.
pub fn diff_set(field: &QuadField, level: &LevelStructure, t: &GlobalHermitianMatrix) -> Result<BTreeSet<u64>> {
    let det = t.det_integer(field)?;
    if det.is_zero() {
        return Err(Error::pre("degenerate T: det T = 0"));
    }
    t.require_positive_definite(field, "T")?;
    let det_factors = factorize(det.to_u64().expect("desk-scale det T"));
    let ord_det = |l: u64| det_factors.iter().find(|&&(q, _)| q == l).map_or(0, |&(_, e)| e);

    let mut out = BTreeSet::new();
    for &(l, e) in &det_factors {
        if !level.d.is_multiple_of(l) && e % 2 == 1 && classify_prime(field, l)? == PrimeKind::Inert {
            out.insert(l);
        }
    }
    for (l, _) in factorize(level.d) {
        if ord_det(l) % 2 == 0 {
            out.insert(l);
        }
    }
    Ok(out)
}

/// `Diff(T)` recomputed from Hilbert symbols: the unramified primes where
/// `inv_l(V_T) = (det T, Delta)_l` differs from the target invariant, which
/// is `-1` exactly at `l | d`.
pub fn diff_set_via_invariants(
    field: &QuadField,
    level: &LevelStructure,
    t: &GlobalHermitianMatrix,
) -> Result<BTreeSet<u64>> {
    let det = t.det(field);
    if det.is_zero() {
        return Err(Error::pre("degenerate T: det T = 0"));
    }
    t.require_positive_definite(field, "T")?;
    let mut out = BTreeSet::new();
    for place in relevant_places(&det, &int(field.disc)).into_iter().chain(
        factorize(level.d).into_iter().map(|(l, _)| Place::Prime(l)),
    ) {
        let Place::Prime(l) = place else { continue };
        if classify_prime(field, l)? == PrimeKind::Ramified {
            continue;
        }
        let target = if level.d.is_multiple_of(l) { -1 } else { 1 };
        if inv_v(&det, field, place)? != target {
            out.insert(l);
        }
    }
    Ok(out)
}

/// The pair `(a, b)` with `T ~ diag(p^a, p^b)` over `o_{k,p}`, `a >= b`.
pub fn localize(field: &QuadField, t: &GlobalHermitianMatrix, p: u64) -> Result<(u32, u32)> {
    require_odd_prime(p)?;
    if classify_prime(field, p)? != PrimeKind::Inert {
        return Err(Error::pre(format!("p = {p} must be inert in Q(sqrt {})", field.disc)));
    }
    let det = t.det(field);
    if det.is_zero() {
        return Err(Error::pre("degenerate T: det T = 0"));
    }
    if !t.a.is_integral() {
        return Err(Error::pre("T must have entries in o_k"));
    }
    let mut vals = Vec::new();
    for ti in [t.t1, t.t2] {
        if ti != 0 {
            vals.push(ord(&int(ti), p));
        }
    }
    let n_a = field.norm(&t.a);
    if !n_a.is_zero() {
        let v = ord(&n_a, p);
        assert!(v % 2 == 0, "ord_p N(a) must be even at an inert prime");
        vals.push(v / 2);
    }
    let b = *vals.iter().min().expect("some entry of a nondegenerate T is nonzero");
    let a = ord(&det, p) - b;
    Ok((a as u32, b as u32))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassNumber {
    pub h: u64,
    pub unit_order: u64,
}

/// Reduced primitive positive definite forms `(a, b, c)` with `b^2 - 4ac = Delta`.
pub fn reduced_forms(field: &QuadField) -> Vec<(i64, i64, i64)> {
    let disc = field.disc;
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -disc {
        for b in -a + 1..=a {
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if a.gcd(&b).gcd(&c) == 1 {
                out.push((a, b, c));
            }
        }
        a += 1;
    }
    out
}

pub fn class_number(field: &QuadField) -> ClassNumber {
    let unit_order = match field.disc {
        -4 => 4,
        -3 => 6,
        _ => 2,
    };
    ClassNumber { h: reduced_forms(field).len() as u64, unit_order }
}

impl ClassNumber {
    /// `2 h / |o_k^x|`.
    pub fn constant(&self) -> Rational {
        Rational::new(BigInt::from(2 * self.h), BigInt::from(self.unit_order))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhittakerShell {
    /// `|N(det S)|_p^{n/2} alpha`; the root of unity `gamma^n` is not included.
    #[serde(with = "exact::rational_str")]
    pub value: Rational,
    /// Exponent of `|Delta|_p`, equal to `n(3n + 4r - 1)/4`; the factor is 1 at `p !| Delta`.
    #[serde(with = "exact::rational_str")]
    pub delta_exponent: Rational,
    /// Power of the Weil index carried symbolically, as in `gamma^n`.
    pub gamma_power: u32,
}

pub fn whittaker_shell(
    field: &QuadField,
    n: u32,
    r: u32,
    p: u64,
    s: &LocalHermitianSpec,
    alpha: &Rational,
) -> Result<WhittakerShell> {
    require_odd_prime(p)?;
    match classify_prime(field, p)? {
        PrimeKind::Ramified => return Err(Error::pre("ramified normalization out of scope (p | Delta)")),
        PrimeKind::Split => return Err(Error::pre(format!("p = {p} must be inert"))),
        PrimeKind::Inert => {}
    }
    // N(det S) = p^{2 sum e}, so |N(det S)|_p^{n/2} = p^{-n sum e}.
    let total: i64 = s.exponents().iter().map(|&e| e as i64).sum();
    let factor = exact::pow(&int(p as i64), -(n as i64) * total);
    let n_ = n as i64;
    Ok(WhittakerShell {
        value: factor * alpha,
        delta_exponent: Rational::new(BigInt::from(n_ * (3 * n_ + 4 * r as i64 - 1)), BigInt::from(4)),
        gamma_power: n,
    })
}

/// `(p+1)^2 / p^3 * mu(a, b, p)`, the coefficient of `gamma^2 log p` in the
/// derivative of the local Whittaker function.
pub fn whittaker_derivative_factor(a: u32, b: u32, p: u64) -> Result<Rational> {
    let m = mu(a, b, p)?;
    let p = p as i64;
    Ok(Rational::new(BigInt::from((p + 1) * (p + 1)), BigInt::from(p * p * p)) * m)
}

/// The rank-4 integral quadratic form `Q(x) = h(x, x)` on `o_k^2 = Z^4`, as a
/// symmetric matrix `M` with `Q(x) = x^t M x`. Coordinates are
/// `(u1, v1, u2, v2)` for `x = (u1 + v1 w, u2 + v2 w)`.
fn trace_form(field: &QuadField, g: &GlobalHermitianMatrix) -> Result<[[Rational; 4]; 4]> {
    let ar = field.oint();
    let (gx, gy) = g.a.to_oint()?;
    let basis: [(Oint, Oint); 4] = [((1, 0), (0, 0)), ((0, 1), (0, 0)), ((0, 0), (1, 0)), ((0, 0), (0, 1))];
    let h = |x: (Oint, Oint), y: (Oint, Oint)| -> Oint {
        let terms = [
            ar.mul(ar.conj(x.0), ar.mul((g.t1, 0), y.0)),
            ar.mul(ar.conj(x.0), ar.mul((gx, gy), y.1)),
            ar.mul(ar.conj(x.1), ar.mul(ar.conj((gx, gy)), y.0)),
            ar.mul(ar.conj(x.1), ar.mul((g.t2, 0), y.1)),
        ];
        terms.into_iter().fold((0, 0), OkArith::add)
    };
    // B(x, y) = (h(x, y) + h(y, x)) / 2 = Tr h(x, y) / 2.
    let mut m: [[Rational; 4]; 4] = Default::default();
    for i in 0..4 {
        for j in 0..4 {
            let z = h(basis[i], basis[j]);
            let trace = 2 * z.0 + field.disc * z.1;
            m[i][j] = Rational::new(BigInt::from(trace), BigInt::from(2));
        }
    }
    Ok(m)
}

fn inverse_diagonal(m: &[[Rational; 4]; 4]) -> Vec<Rational> {
    let n = 4;
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row = m[i].to_vec();
            row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).expect("positive definite form is invertible");
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(pivot_row) {
                    *x -= &f * y;
                }
            }
        }
    }
    (0..n).map(|i| a[i][n + i].clone()).collect()
}

fn isqrt_floor(x: &Rational) -> i64 {
    let fl = x.floor().to_integer().to_u64().expect("nonnegative bound");
    let mut r = (fl as f64).sqrt() as u64;
    while r * r > fl {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= fl {
        r += 1;
    }
    r as i64
}

/// All lattice vectors `x` with `h(x, x) = t`, as `((u1, v1), (u2, v2))`.
pub fn vectors_of_norm(field: &QuadField, gram: &GlobalHermitianMatrix, t: i64) -> Result<Vec<(Oint, Oint)>> {
    gram.require_positive_definite(field, "gramL")?;
    if t <= 0 {
        return Ok(if t == 0 { vec![((0, 0), (0, 0))] } else { Vec::new() });
    }
    let m = trace_form(field, gram)?;
    // x_i^2 <= Q(x) (M^{-1})_ii for a positive definite M.
    let bounds: Vec<i64> = inverse_diagonal(&m).iter().map(|d| isqrt_floor(&(d * int(t)))).collect();
    let mi: Vec<Vec<i64>> = m
        .iter()
        .map(|row| row.iter().map(|q| exact::to_integer(&(q * int(2))).unwrap() as i64).collect())
        .collect();
    let q2 = |x: [i64; 4]| -> i64 {
        (0..4).map(|i| (0..4).map(|j| x[i] * mi[i][j] * x[j]).sum::<i64>()).sum()
    };
    let mut out = Vec::new();
    for a in -bounds[0]..=bounds[0] {
        for b in -bounds[1]..=bounds[1] {
            for c in -bounds[2]..=bounds[2] {
                for d in -bounds[3]..=bounds[3] {
                    if q2([a, b, c, d]) == 2 * t {
                        out.push(((a, b), (c, d)));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `#{(x1, x2) in L^2 : h(x_i, x_j) = T_ij}` for `L = o_k^2` with Hermitian
/// form `h(x, y) = x'^t G y`.
pub fn count_lattice_reps(field: &QuadField, gram: &GlobalHermitianMatrix, t: &GlobalHermitianMatrix) -> Result<u64> {
    gram.require_positive_definite(field, "gramL")?;
    t.require_positive_definite(field, "T")?;
    let target = t.a.to_oint()?;
    let ar = field.oint();
    let g = [[(gram.t1, 0), gram.a.to_oint()?], [ar.conj(gram.a.to_oint()?), (gram.t2, 0)]];
    let h = |x: (Oint, Oint), y: (Oint, Oint)| -> Oint {
        let (x, y) = ([x.0, x.1], [y.0, y.1]);
        let mut acc = (0, 0);
        for i in 0..2 {
            for j in 0..2 {
                acc = OkArith::add(acc, ar.mul(ar.conj(x[i]), ar.mul(g[i][j], y[j])));
            }
        }
        acc
    };
    let first = vectors_of_norm(field, gram, t.t1)?;
    let second = vectors_of_norm(field, gram, t.t2)?;
    let count = first
        .par_iter()
        .map(|&x1| second.iter().filter(|&&x2| h(x1, x2) == target).count() as u64)
        .sum();
    Ok(count)
}

/// `N(x)` on `o_k`, exposed for cross-checks with integer coordinates.
pub fn norm_int(field: &QuadField, x: (i64, i64)) -> i64 {
    field.oint().norm(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(d: i64) -> QuadField {
        QuadField::new(d).unwrap()
    }

    fn r(n: i64) -> Rational {
        int(n)
    }

    #[test]
    fn fundamental_discriminants() {
        for d in [-3, -4, -7, -8, -15, -20, -23, -24, -84] {
            assert!(QuadField::new(d).is_ok(), "{d}");
        }
        for d in [-1, -2, -12, -16, -27, -36, 5, 0] {
            assert!(QuadField::new(d).is_err(), "{d}");
        }
    }

    #[test]
    fn omega_arithmetic() {
        let k = f(-4);
        // 1 + i = 3 + w
        let z = FieldElem::integral(3, 1);
        assert_eq!(k.norm(&z), r(2));
        assert_eq!(k.mul(&z, &k.conj(&z)), FieldElem::integral(2, 0));
        let w = k.omega();
        assert_eq!(k.mul(&w, &w), FieldElem::integral(-5, -4));
    }

    #[test]
    fn prime_classes() {
        let k = f(-4);
        assert_eq!(classify_prime(&k, 2).unwrap(), PrimeKind::Ramified);
        assert_eq!(classify_prime(&k, 3).unwrap(), PrimeKind::Inert);
        assert_eq!(classify_prime(&k, 5).unwrap(), PrimeKind::Split);
        assert!(classify_prime(&k, 9).is_err());
        assert_eq!(classify_prime(&f(-7), 2).unwrap(), PrimeKind::Split);
        assert_eq!(classify_prime(&f(-3), 2).unwrap(), PrimeKind::Inert);
    }

    #[test]
    fn hilbert_examples() {
        for v in [Place::Infinity, Place::Prime(2), Place::Prime(3), Place::Prime(7)] {
            for b in [-6, -1, 2, 5, 12] {
                assert_eq!(hilbert_symbol(&r(1), &r(b), v).unwrap(), 1);
            }
        }
        assert_eq!(hilbert_symbol(&r(3), &r(-4), Place::Prime(3)).unwrap(), -1);
        assert_eq!(hilbert_symbol(&r(-1), &r(-1), Place::Infinity).unwrap(), -1);
        assert_eq!(hilbert_symbol(&r(-1), &r(-1), Place::Prime(2)).unwrap(), -1);
        assert_eq!(hilbert_symbol(&r(2), &r(3), Place::Prime(2)).unwrap(), -1);
        assert!(hilbert_symbol(&r(0), &r(3), Place::Prime(3)).is_err());
    }

    #[test]
    fn invariant_examples() {
        let k = f(-4);
        assert_eq!(inv_v(&r(3), &k, Place::Prime(3)).unwrap(), -1);
        for v in [Place::Infinity, Place::Prime(2), Place::Prime(3), Place::Prime(5)] {
            assert_eq!(inv_v(&r(36), &k, v).unwrap(), 1);
        }
    }

    #[test]
    fn diff_examples() {
        let k = f(-4);
        let lvl = LevelStructure::new(&k, 3).unwrap();
        let d = |t: GlobalHermitianMatrix| diff_set(&k, &lvl, &t).unwrap();
        assert_eq!(d(GlobalHermitianMatrix::diag(1, 1)), BTreeSet::from([3]));
        assert_eq!(d(GlobalHermitianMatrix::diag(1, 9)), BTreeSet::from([3]));
        assert_eq!(d(GlobalHermitianMatrix::diag(1, 3)), BTreeSet::new());
        assert_eq!(d(GlobalHermitianMatrix::diag(1, 7)), BTreeSet::from([3, 7]));
        assert!(diff_set(&k, &lvl, &GlobalHermitianMatrix::new(1, 2, FieldElem::integral(3, 1))).is_err());
        assert!(LevelStructure::new(&k, 5).is_err());
        assert!(LevelStructure::new(&k, 9).is_err());
    }

    #[test]
    fn localize_examples() {
        let k = f(-4);
        assert_eq!(localize(&k, &GlobalHermitianMatrix::diag(1, 9), 3).unwrap(), (2, 0));
        assert_eq!(localize(&k, &GlobalHermitianMatrix::diag(3, 3), 3).unwrap(), (1, 1));
        let t = GlobalHermitianMatrix::new(1, 3, FieldElem::integral(3, 1));
        assert_eq!(t.det(&k), r(1));
        assert_eq!(localize(&k, &t, 3).unwrap(), (0, 0));
        assert!(localize(&k, &t, 5).is_err());
        assert!(localize(&k, &t, 2).is_err());
    }

    #[test]
    fn class_numbers() {
        let h = |d| class_number(&f(d));
        assert_eq!(h(-4), ClassNumber { h: 1, unit_order: 4 });
        assert_eq!(h(-3), ClassNumber { h: 1, unit_order: 6 });
        assert_eq!(h(-23), ClassNumber { h: 3, unit_order: 2 });
        assert_eq!(h(-15).h, 2);
        assert_eq!(h(-84).h, 4);
        assert_eq!(reduced_forms(&f(-23)), vec![(1, 1, 6), (2, -1, 3), (2, 1, 3)]);
    }

    #[test]
    fn whittaker_examples() {
        let k = f(-4);
        let s = LocalHermitianSpec::new(vec![1, 0]).unwrap();
        let w = whittaker_shell(&k, 2, 0, 3, &s, &exact::rat(16, 3)).unwrap();
        assert_eq!(w.value, exact::rat(16, 27));
        assert_eq!(w.delta_exponent, exact::rat(5, 2));
        assert_eq!(whittaker_shell(&k, 2, 0, 3, &s, &r(0)).unwrap().value, r(0));
        assert!(whittaker_shell(&f(-3), 2, 0, 3, &s, &r(1)).is_err());
        assert_eq!(whittaker_derivative_factor(2, 0, 3).unwrap(), exact::rat(16, 27));
        assert_eq!(whittaker_derivative_factor(0, 0, 5).unwrap(), r(0));
        assert_eq!(whittaker_derivative_factor(2, 2, 3).unwrap(), exact::rat(-160, 27));
        assert!(whittaker_derivative_factor(1, 0, 3).is_err());
    }

    #[test]
    fn lattice_counts() {
        let k = f(-4);
        let id = GlobalHermitianMatrix::diag(1, 1);
        assert_eq!(vectors_of_norm(&k, &id, 1).unwrap().len(), 8);
        assert_eq!(count_lattice_reps(&k, &id, &id).unwrap(), 32);
        assert_eq!(count_lattice_reps(&k, &id, &GlobalHermitianMatrix::diag(1, 2)).unwrap(), 32);
        // |a|^2 > t1 t2 is not positive definite; a lattice without norm-1 vectors gives 0
        assert!(count_lattice_reps(&k, &id, &GlobalHermitianMatrix::new(1, 1, FieldElem::integral(2, 0))).is_err());
        assert_eq!(count_lattice_reps(&k, &GlobalHermitianMatrix::diag(2, 2), &id).unwrap(), 0);
    }

    #[test]
    fn lattice_counts_basis_invariant() {
        let one = || FieldElem::integral(1, 0);
        let zero = || FieldElem::integral(0, 0);
        for disc in [-4, -3, -7, -15] {
            let k = f(disc);
            let w = k.omega();
            let grams = [
                GlobalHermitianMatrix::diag(1, 1),
                GlobalHermitianMatrix::diag(1, 2),
                GlobalHermitianMatrix::new(2, 3, FieldElem::integral(1, 0)),
            ];
            let us = [
                [[zero(), one()], [one(), zero()]],
                [[one(), w.clone()], [zero(), one()]],
                [[one(), zero()], [FieldElem::integral(1, 1), one()]],
            ];
            let ts = [GlobalHermitianMatrix::diag(1, 1), GlobalHermitianMatrix::diag(2, 3), GlobalHermitianMatrix::diag(1, 2)];
            for g in &grams {
                if !g.is_positive_definite(&k) {
                    continue;
                }
                for u in &us {
                    let g2 = g.transform(&k, u.clone()).unwrap();
                    assert_eq!(g2.det(&k), g.det(&k));
                    for t in &ts {
                        assert_eq!(
                            count_lattice_reps(&k, g, t).unwrap(),
                            count_lattice_reps(&k, &g2, t).unwrap(),
                            "disc {disc}, {g:?} -> {g2:?}, T = {t:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn parse_matrix() {
        let t: GlobalHermitianMatrix = "1, 3, 3, 1".parse().unwrap();
        assert_eq!(t, GlobalHermitianMatrix::new(1, 3, FieldElem::integral(3, 1)));
        assert!("1,2,3".parse::<GlobalHermitianMatrix>().is_err());
        assert_eq!("inf".parse::<Place>().unwrap(), Place::Infinity);
    }

    fn nonzero() -> impl Strategy<Value = i64> {
        (-50i64..=50).prop_filter("nonzero", |x| *x != 0)
    }

    proptest! {
        #[test]
        fn product_formula(a in nonzero(), b in nonzero()) {
            prop_assert_eq!(hilbert_product(&r(a), &r(b)).unwrap(), 1);
        }

        #[test]
        fn symmetric_and_bimultiplicative(a in nonzero(), b in nonzero(), c in nonzero()) {
            for v in relevant_places(&r(a * c), &r(b)) {
                let hs = |x: i64, y: i64| hilbert_symbol(&r(x), &r(y), v).unwrap();
                prop_assert_eq!(hs(a, b), hs(b, a));
                prop_assert_eq!(hs(a * c, b), hs(a, b) * hs(c, b));
                prop_assert_eq!(hs(a, -a), 1);
            }
        }

        #[test]
        fn localize_invariants(t1 in 1i64..60, t2 in 1i64..60, x in -6i64..6, y in -6i64..6) {
            let k = f(-4);
            let t = GlobalHermitianMatrix::new(t1, t2, FieldElem::integral(x, y));
            prop_assume!(t.is_positive_definite(&k));
            let (a, b) = localize(&k, &t, 3).unwrap();
            prop_assert!(a >= b);
            prop_assert_eq!((a + b) as i64, ord(&t.det(&k), 3));
            if (a + b) % 2 == 0 {
                prop_assert!(mu(a, b, 3).is_ok());
            }
        }

        #[test]
        fn diff_two_ways(t1 in 1i64..80, t2 in 1i64..80, x in -5i64..5, y in -5i64..5, lvl in prop::sample::select(vec![1u64, 3, 7, 21])) {
            let k = f(-4);
            let t = GlobalHermitianMatrix::new(t1, t2, FieldElem::integral(x, y));
            prop_assume!(t.is_positive_definite(&k));
            let level = LevelStructure::new(&k, lvl).unwrap();
            let det = t.det(&k);
            prop_assert_eq!(inv_v(&det, &k, Place::Infinity).unwrap(), 1);
            prop_assert_eq!(hilbert_product(&det, &int(k.disc())).unwrap(), 1);
            prop_assert_eq!(diff_set(&k, &level, &t).unwrap(), diff_set_via_invariants(&k, &level, &t).unwrap());
        }
    }
}
