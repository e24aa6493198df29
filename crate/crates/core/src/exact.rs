//! Exact rational scalars and dense univariate polynomials over `Q`.
//!
//! Rationals are `num_rational::BigRational`, which keeps every value in
//! lowest terms with a positive denominator, so equality is structural.
//! Polynomials are dense coefficient vectors, lowest degree first, with no
//! trailing zeros; the zero polynomial has no coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `base^exp` for any integer exponent. Panics on `0^negative`.
pub fn pow(base: &Rational, exp: i64) -> Rational {
    if exp < 0 {
        assert!(!base.is_zero(), "zero raised to a negative power");
        pow(&base.recip(), -exp)
    } else {
        num_traits::pow(base.clone(), exp as usize)
    }
}

/// `(-p)^exp`, the ubiquitous factor in density formulas.
pub fn neg_p_pow(p: u64, exp: i64) -> Rational {
    pow(&-int(p as i64), exp)
}

/// Renders as `"num/den"`, or `"num"` for integers.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        None => s.parse::<BigInt>().map(Rational::from_integer).map_err(|_| bad()),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// Converts an integral rational into `i128`, if it fits.
pub fn to_integer(x: &Rational) -> Option<i128> {
    if !x.is_integer() {
        return None;
    }
    i128::try_from(x.to_integer()).ok()
}

/// Approximate decimal rendering; only used behind explicit opt-in.
pub fn approx(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(int(1))
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The indeterminate `X`.
    pub fn x() -> Self {
        Self::monomial(int(1), 1)
    }

    pub fn monomial(c: Rational, degree: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); degree + 1];
        coeffs[degree] = c;
        Self::from_coeffs(coeffs)
    }

    /// Builds from coefficients, lowest degree first, trimming trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * int(i as i64))
                .collect(),
        )
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, exp: u32) -> Self {
        (0..exp).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Euclidean division: returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        let (Some(dd), Some(lead)) = (divisor.degree(), divisor.leading()) else {
            return Err(Error::pre("polynomial division by zero"));
        };
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return Ok((Self::zero(), Self::zero()));
        };
        if nd < dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![Rational::zero(); nd - dd + 1];
        for shift in (0..=nd - dd).rev() {
            let c = &rem[shift + dd] / lead;
            if c.is_zero() {
                continue;
            }
            for (i, dc) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] -= &c * dc;
            }
            quot[shift] = c;
        }
        Ok((Self::from_coeffs(quot), Self::from_coeffs(rem)))
    }

    /// Division that must leave no remainder.
    pub fn div_exact(&self, divisor: &Polynomial) -> Result<Polynomial> {
        let (q, r) = self.div_rem(divisor)?;
        if !r.is_zero() {
            return Err(Error::InexactDivision(format!(
                "({self}) / ({divisor}) leaves remainder {r}"
            )));
        }
        Ok(q)
    }

    /// Coefficients rendered as exact strings, lowest degree first.
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(format_rational).collect()
    }

    pub fn from_strings<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        let coeffs = items
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_coeffs(coeffs))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
    DivExact,
}

pub fn poly_arith(lhs: &Polynomial, rhs: &Polynomial, kind: PolyOp) -> Result<Polynomial> {
    Ok(match kind {
        PolyOp::Add => lhs + rhs,
        PolyOp::Sub => lhs - rhs,
        PolyOp::Mul => lhs * rhs,
        PolyOp::DivExact => lhs.div_exact(rhs)?,
    })
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::from_coeffs((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::from_coeffs((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::from_coeffs(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial { (&self).$m(&rhs) }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: &Polynomial) -> Polynomial { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            let body = match (i, mag.is_one()) {
                (0, _) => format_rational(&mag),
                (1, true) => "X".to_string(),
                (1, false) => format!("{}*X", format_rational(&mag)),
                (_, true) => format!("X^{i}"),
                (_, false) => format!("{}*X^{i}", format_rational(&mag)),
            };
            f.write_str(&body)?;
        }
        Ok(())
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(deserializer)?;
        Polynomial::from_strings(&items).map_err(D::Error::custom)
    }
}

/// Serde adapter storing a [`Rational`] as its exact string form.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

/// `sum_{k=lo}^{hi} x^k` as a polynomial (zero when `hi < lo`).
pub fn geometric_poly(lo: usize, hi: usize) -> Polynomial {
    if hi < lo {
        return Polynomial::zero();
    }
    let mut coeffs = vec![Rational::zero(); hi + 1];
    for c in &mut coeffs[lo..=hi] {
        *c = int(1);
    }
    Polynomial::from_coeffs(coeffs)
}

/// `true` when `x` is an integer with the given parity.
pub fn is_even_integer(x: &Rational) -> bool {
    x.is_integer() && x.numer().is_even()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_ints(c)
    }

    #[test]
    fn difference_of_squares() {
        let prod = poly_arith(&p(&[-1, 1]), &p(&[1, 1]), PolyOp::Mul).unwrap();
        assert_eq!(prod, p(&[-1, 0, 1]));
        let q = poly_arith(&prod, &p(&[-1, 1]), PolyOp::DivExact).unwrap();
        assert_eq!(q, p(&[1, 1]));
    }

    #[test]
    fn expanded_product_divides_back() {
        let f = &p(&[1, -1]) * &p(&[3, 1]);
        assert_eq!(f, p(&[3, -2, -1]));
        assert_eq!(f.div_exact(&p(&[1, -1])).unwrap(), p(&[3, 1]));
    }

    #[test]
    fn inexact_division_is_an_error() {
        let err = p(&[1, 0, 1]).div_exact(&p(&[-1, 1])).unwrap_err();
        assert!(matches!(err, Error::InexactDivision(_)));
        assert!(p(&[1]).div_exact(&Polynomial::zero()).is_err());
    }

    #[test]
    fn evaluation() {
        let f = (&p(&[1, -1]) * &p(&[3, 1])).scale(&rat(1, 3));
        assert_eq!(f.eval(&int(1)), int(0));
        assert_eq!(f.eval(&int(0)), int(1));
        assert_eq!(p(&[-1, 0, 1]).eval(&rat(1, 2)), rat(-3, 4));
    }

    #[test]
    fn derivatives() {
        assert!(p(&[7]).derivative().is_zero());
        assert_eq!(p(&[0, 0, 1]).derivative(), p(&[0, 2]));
        let f = (&p(&[1, -1]) * &p(&[3, 1])).scale(&rat(1, 3));
        assert_eq!(f.derivative().eval(&int(1)), rat(-4, 3));
    }

    #[test]
    fn canonical_form_and_strings() {
        assert_eq!(Polynomial::from_ints(&[1, 2, 0, 0]).degree(), Some(1));
        assert_eq!(Polynomial::from_ints(&[0, 0]), Polynomial::zero());
        assert_eq!(format_rational(&rat(6, -4)), "-3/2");
        assert_eq!(format_rational(&int(5)), "5");
        assert_eq!(parse_rational("-3/2").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("4/2").unwrap(), int(2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        let json = serde_json::to_string(&p(&[3, -2, -1])).unwrap();
        assert_eq!(json, r#"["3","-2","-1"]"#);
        assert_eq!(p(&[3, -2, -1]).to_string(), "3 - 2*X - X^2");
    }

    #[test]
    fn negative_powers() {
        assert_eq!(neg_p_pow(3, -2), rat(1, 9));
        assert_eq!(neg_p_pow(3, -3), rat(-1, 27));
        assert_eq!(pow(&rat(2, 3), 0), int(1));
    }

    fn small_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((-20i64..20, 1i64..6), 0..7).prop_map(|cs| {
            Polynomial::from_coeffs(cs.into_iter().map(|(n, d)| rat(n, d)).collect())
        })
    }

    proptest! {
        #[test]
        fn eval_is_multiplicative(f in small_poly(), g in small_poly(), n in -9i64..9, d in 1i64..5) {
            let x = rat(n, d);
            prop_assert_eq!((&f * &g).eval(&x), f.eval(&x) * g.eval(&x));
        }

        #[test]
        fn div_exact_inverts_mul(f in small_poly(), g in small_poly()) {
            prop_assume!(!g.is_zero());
            prop_assert_eq!((&f * &g).div_exact(&g).unwrap(), f);
        }

        #[test]
        fn serialization_round_trips(f in small_poly()) {
            let s = serde_json::to_string(&f).unwrap();
            let back: Polynomial = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
