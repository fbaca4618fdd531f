//! Exact arithmetic helpers: rational parsing and sums of square roots.
//!
//! k-median costs are sums of Euclidean distances, i.e. of square roots of
//! integer squared distances. [`RootSum`] keeps such values in the canonical
//! form `Σ cᵣ·√r` over distinct square-free radicands `r` with nonzero
//! rational coefficients. Square roots of distinct square-free integers are
//! linearly independent over ℚ, so two canonical sums are equal iff their
//! term maps are equal, and any nonzero difference can be separated from zero
//! by interval evaluation at sufficient precision.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parses `"p/q"`, `"p"` or a decimal such as `"1.05"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    let bad = || Error::Parse(format!("invalid rational {text:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = match int {
            "" | "-" | "+" => BigInt::zero(),
            _ => int.parse().map_err(|_| bad())?,
        };
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10u32), frac.len());
        let mut value = BigRational::from_integer(int_part.abs()) + BigRational::new(frac_part, den);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    let num: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(num))
}

/// Formats as `"p"` for integers and `"p/q"` otherwise.
pub fn format_rational(value: &BigRational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Splits `n = s² · r` with `r` square-free. `0` maps to `(0, 1)`.
pub fn square_free_split(n: u64) -> (u64, u64) {
    if n == 0 {
        return (0, 1);
    }
    let mut rest = n;
    let mut square = 1u64;
    let mut free = 1u64;
    let mut p = 2u64;
    while p.saturating_mul(p) <= rest {
        if rest % p == 0 {
            let mut exp = 0u32;
            while rest % p == 0 {
                rest /= p;
                exp += 1;
            }
            square *= p.pow(exp / 2);
            if exp % 2 == 1 {
                free *= p;
            }
        }
        if let Some(root) = exact_isqrt(rest) {
            square *= root;
            rest = 1;
            break;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    free *= rest;
    (square, free)
}

fn exact_isqrt(n: u64) -> Option<u64> {
    let r = n.isqrt();
    (r * r == n).then_some(r)
}

/// An exact value `Σ cᵣ·√r` in canonical form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RootSum {
    terms: BTreeMap<u64, BigRational>,
}

impl RootSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_rational(value: BigRational) -> Self {
        let mut out = Self::zero();
        out.add_canonical(1, value);
        out
    }

    pub fn from_integer(value: impl Into<BigInt>) -> Self {
        Self::from_rational(BigRational::from_integer(value.into()))
    }

    /// `√n` for an arbitrary non-negative integer.
    pub fn sqrt(n: u64) -> Self {
        Self::term(BigRational::one(), n)
    }

    /// `coef · √n`.
    pub fn term(coef: BigRational, n: u64) -> Self {
        let mut out = Self::zero();
        out.add_term(coef, n);
        out
    }

    /// Adds `coef · √n`, splitting `n` into its square-free part.
    pub fn add_term(&mut self, coef: BigRational, n: u64) {
        if n == 0 || coef.is_zero() {
            return;
        }
        let (s, r) = square_free_split(n);
        self.add_canonical(r, coef * BigInt::from(s));
    }

    /// Adds `coef · s · √r` where `r` is already known square-free.
    pub fn add_split(&mut self, coef: &BigRational, s: u64, r: u64) {
        if s == 0 || coef.is_zero() {
            return;
        }
        self.add_canonical(r, coef * BigInt::from(s));
    }

    fn add_canonical(&mut self, radicand: u64, coef: BigRational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(radicand) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += coef;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    /// Builds `Σ c·√r` from integer coefficients keyed by square-free radicands.
    pub(crate) fn from_square_free_counts(counts: BTreeMap<u64, u128>) -> Self {
        Self {
            terms: counts
                .into_iter()
                .filter(|(_, c)| *c != 0)
                .map(|(r, c)| (r, BigRational::from_integer(BigInt::from(c))))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value as a rational, when it has no irrational part.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.terms.iter().map(|(r, c)| (*r, c))
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(r, c)| (*r, c * factor)).collect(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(r, c)| c.to_f64().unwrap_or(f64::NAN) * (*r as f64).sqrt())
            .sum()
    }

    /// Exact sign of the value.
    pub fn signum(&self) -> Ordering {
        if self.terms.is_empty() {
            return Ordering::Equal;
        }
        if let Some(q) = self.as_rational() {
            return q.cmp(&BigRational::zero());
        }
        if let Some(sign) = self.float_sign() {
            return sign;
        }
        self.interval_sign()
    }

    fn float_sign(&self) -> Option<Ordering> {
        let mut approx = 0.0f64;
        let mut magnitude = 0.0f64;
        for (r, c) in &self.terms {
            let t = c.to_f64()? * (*r as f64).sqrt();
            approx += t;
            magnitude += t.abs();
        }
        if !approx.is_finite() || !magnitude.is_finite() {
            return None;
        }
        let err = magnitude * (self.terms.len() as f64 + 4.0) * 8.0 * f64::EPSILON + 1e-290;
        if approx > err {
            Some(Ordering::Greater)
        } else if approx < -err {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    fn interval_sign(&self) -> Ordering {
        // A nonzero canonical sum is never zero, so refining precision terminates.
        let mut bits = 64usize;
        loop {
            let den = BigInt::one() << bits;
            let mut lo = BigRational::zero();
            let mut hi = BigRational::zero();
            for (r, c) in &self.terms {
                if *r == 1 {
                    lo += c;
                    hi += c;
                    continue;
                }
                let floor = BigInt::from((BigUint::from(*r) << (2 * bits)).sqrt());
                let below = BigRational::new(floor.clone(), den.clone());
                let above = BigRational::new(floor + 1, den.clone());
                if c.is_positive() {
                    lo += c * below;
                    hi += c * above;
                } else {
                    lo += c * above;
                    hi += c * below;
                }
            }
            if lo.is_positive() {
                return Ordering::Greater;
            }
            if hi.is_negative() {
                return Ordering::Less;
            }
            bits *= 2;
        }
    }
}

impl Ord for RootSum {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Some(a), Some(b)) = (self.as_rational(), other.as_rational()) {
            return a.cmp(&b);
        }
        (self - other).signum()
    }
}

impl PartialOrd for RootSum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl AddAssign<&RootSum> for RootSum {
    fn add_assign(&mut self, rhs: &RootSum) {
        for (r, c) in &rhs.terms {
            self.add_canonical(*r, c.clone());
        }
    }
}

impl SubAssign<&RootSum> for RootSum {
    fn sub_assign(&mut self, rhs: &RootSum) {
        for (r, c) in &rhs.terms {
            self.add_canonical(*r, -c.clone());
        }
    }
}

impl Add<&RootSum> for &RootSum {
    type Output = RootSum;
    fn add(self, rhs: &RootSum) -> RootSum {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&RootSum> for &RootSum {
    type Output = RootSum;
    fn sub(self, rhs: &RootSum) -> RootSum {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for RootSum {
    type Output = RootSum;
    fn add(mut self, rhs: RootSum) -> RootSum {
        self += &rhs;
        self
    }
}

impl Sub for RootSum {
    type Output = RootSum;
    fn sub(mut self, rhs: RootSum) -> RootSum {
        self -= &rhs;
        self
    }
}

impl Neg for RootSum {
    type Output = RootSum;
    fn neg(self) -> RootSum {
        Self {
            terms: self.terms.into_iter().map(|(r, c)| (r, -c)).collect(),
        }
    }
}

impl fmt::Display for RootSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (r, c)) in self.terms.iter().enumerate() {
            let (sign, mag) = if c.is_negative() { ("-", -c.clone()) } else { ("+", c.clone()) };
            if idx == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            match (*r, mag.is_one()) {
                (1, _) => write!(f, "{}", format_rational(&mag))?,
                (r, true) => write!(f, "sqrt({r})")?,
                (r, false) => write!(f, "{}*sqrt({r})", format_rational(&mag))?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), rational(1, 2));
        assert_eq!(parse_rational("-6/4").unwrap(), rational(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), rational(7, 1));
        assert_eq!(parse_rational("1.05").unwrap(), rational(21, 20));
        assert_eq!(parse_rational("-0.5").unwrap(), rational(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn square_free_split_examples() {
        assert_eq!(square_free_split(0), (0, 1));
        assert_eq!(square_free_split(1), (1, 1));
        assert_eq!(square_free_split(12), (2, 3));
        assert_eq!(square_free_split(72), (6, 2));
        assert_eq!(square_free_split(49), (7, 1));
        assert_eq!(square_free_split(2 * 3 * 5 * 7), (1, 210));
        let p = 1_000_003u64;
        assert_eq!(square_free_split(p * p * 5), (p, 5));
    }

    #[test]
    fn canonical_equality_collapses_roots() {
        // √8 + √2 = 3√2 and √18 = 3√2.
        let mut a = RootSum::sqrt(8);
        a += &RootSum::sqrt(2);
        assert_eq!(a, RootSum::sqrt(18));
        assert_eq!(a.cmp(&RootSum::sqrt(18)), Ordering::Equal);
    }

    #[test]
    fn close_sums_compare_exactly() {
        // √2 + √3 ≈ 3.1463 sits just below √10 ≈ 3.1623.
        let lhs = RootSum::sqrt(2) + RootSum::sqrt(3);
        let rhs = RootSum::sqrt(10);
        assert_eq!(lhs.cmp(&rhs), Ordering::Less);
        // √1000001 - 1000 is about 0.0005; compare against 1/2000.
        let d = RootSum::sqrt(1_000_001) - RootSum::from_integer(1000);
        assert_eq!(d.cmp(&RootSum::from_rational(rational(1, 2000))), Ordering::Less);
        assert_eq!(d.cmp(&RootSum::from_rational(rational(1, 2001))), Ordering::Greater);
    }

    #[test]
    fn interval_path_agrees_with_float_path() {
        let v = RootSum::sqrt(5) - RootSum::sqrt(3) - RootSum::from_rational(rational(1, 3));
        assert_eq!(v.interval_sign(), v.float_sign().unwrap());
        let w = RootSum::term(rational(-7, 3), 6) + RootSum::from_integer(5);
        assert_eq!(w.interval_sign(), w.float_sign().unwrap());
    }

    #[test]
    fn display_is_readable() {
        let v = RootSum::from_integer(3) + RootSum::term(rational(1, 2), 8);
        assert_eq!(v.to_string(), "3 + sqrt(2)");
        assert_eq!(RootSum::zero().to_string(), "0");
    }
}
