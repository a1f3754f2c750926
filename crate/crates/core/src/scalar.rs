//! Scalar abstraction: every optimizer, LP, and graph routine in this crate is
//! generic over an ordered field, so the same code runs in exact rational
//! arithmetic (acceptance-grade equalities) and in floating point (large or
//! irrational data).

use std::fmt;

use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// An ordered field the solvers can compute in.
///
/// `EXACT` types compare with `==` and use zero tolerances; inexact types get
/// the crate-wide solver tolerance (1e-9) for feasibility and duality gaps.
pub trait Scalar:
    Num + Signed + PartialOrd + Clone + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    fn from_int(n: i64) -> Self;

    /// Exact ratio of two small integers. Panics if `den == 0`.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Lossy conversion for display, CSV output, and sampling weights.
    fn to_f64_lossy(&self) -> f64;

    /// Feasibility / duality-gap tolerance used by the LP layer.
    /// Zero for exact types.
    fn solver_tol() -> Self;

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }

    fn solver_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f32
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f32 / den as f32
    }

    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }

    fn solver_tol() -> Self {
        1e-5
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        BigRational::from_i64(n).expect("i64 -> BigRational")
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_int(num) / Self::from_int(den)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn solver_tol() -> Self {
        num_traits::Zero::zero()
    }
}

/// Fixed-width exact rationals. Fast, but arithmetic panics on overflow in
/// debug builds; suitable for small instances (weights with small numerators
/// and denominators, a few dozen edges).
impl Scalar for Ratio<i128> {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        Ratio::from_integer(n as i128)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Ratio::new(num as i128, den as i128)
    }

    fn to_f64_lossy(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn solver_tol() -> Self {
        num_traits::Zero::zero()
    }
}

/// Parse a scalar from the text forms accepted in system-spec files:
/// `"p/q"`, an integer, or a finite decimal (`"0.25"`), all exact for
/// rational scalars.
pub fn parse_scalar<S: Scalar>(text: &str) -> Option<S> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n: i64 = num.trim().parse().ok()?;
        let d: i64 = den.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(S::from_ratio(n, d));
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let i: i64 = if int_part.is_empty() || int_part == "-" {
            0
        } else {
            int_part.parse().ok()?
        };
        if frac_part.is_empty() || frac_part.len() > 15 || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let f: i64 = frac_part.parse().ok()?;
        let den = 10i64.checked_pow(frac_part.len() as u32)?;
        let frac = S::from_ratio(f, den);
        let whole = S::from_int(i);
        return Some(if negative { whole - frac } else { whole + frac });
    }
    let n: i64 = text.parse().ok()?;
    Some(S::from_int(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_scalar::<Rational>("3/4"), Some(Rational::from_ratio(3, 4)));
        assert_eq!(parse_scalar::<Rational>("-2"), Some(Rational::from_int(-2)));
        assert_eq!(parse_scalar::<Rational>("0.25"), Some(Rational::from_ratio(1, 4)));
        assert_eq!(parse_scalar::<Rational>("-1.5"), Some(Rational::from_ratio(-3, 2)));
        assert_eq!(parse_scalar::<f64>("1/2"), Some(0.5));
        assert!(parse_scalar::<Rational>("1/0").is_none());
    }

    #[test]
    fn exactness_flags() {
        assert!(Rational::EXACT);
        assert!(!f64::EXACT);
        assert_eq!(Rational::solver_tol(), num_traits::Zero::zero());
    }
}
