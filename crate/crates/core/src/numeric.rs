//! Dual-mode scalar arithmetic.
//!
//! Every quantity in this crate is generic over [`Scalar`], which has exactly
//! two implementations: arbitrary-precision rationals (`BigRational`, the
//! default for identity checks — equalities hold exactly) and `f64` with an
//! absolute tolerance of `1e-9` for iterative paths. Code written against the
//! trait never needs to know which mode it is running in; equality queries go
//! through [`Scalar::approx_eq`], which is exact in rational mode.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive};
use std::fmt::{Debug, Display};

/// Absolute tolerance used by the float mode for equality and null tests.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Scalar field shared by measures, densities and transition matrices.
pub trait Scalar:
    Num + Signed + PartialOrd + Clone + Debug + Display + Send + Sync + 'static
{
    /// True when arithmetic is exact (rational mode).
    const EXACT: bool;

    fn from_int(n: i64) -> Self;

    /// The exact fraction `num/den`. Panics if `den == 0`.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Closest `f64`; used only for reporting and entropy logarithms.
    fn to_f64(&self) -> f64;

    /// Mode-aware equality: exact in rational mode, within
    /// [`FLOAT_TOLERANCE`] in float mode.
    fn approx_eq(&self, other: &Self) -> bool;

    fn approx_zero(&self) -> bool {
        self.approx_eq(&Self::zero())
    }

    /// One half, the weight base of the dominating-measure series.
    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    /// Render for reports: exact fraction in rational mode, 12 significant
    /// digits in float mode.
    fn render(&self) -> String;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn render(&self) -> String {
        self.to_string()
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

    fn to_f64(&self) -> f64 {
        *self
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_TOLERANCE
    }

    fn render(&self) -> String {
        format!("{self:.11e}")
    }
}

/// Error produced when a textual weight cannot be read.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse scalar from {text:?}: {reason}")]
pub struct ParseScalarError {
    pub text: String,
    pub reason: String,
}

/// Parse `"3"`, `"-1/4"` or `"0.25"` into a scalar of the active mode.
///
/// Decimal literals are read exactly (`0.25` becomes `1/4` in rational mode),
/// so documents written with decimals keep exact semantics.
pub fn parse_scalar<S: Scalar>(text: &str) -> Result<S, ParseScalarError> {
    let trimmed = text.trim();
    let err = |reason: &str| ParseScalarError {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    if trimmed.is_empty() {
        return Err(err("empty string"));
    }
    if let Some((num, den)) = trimmed.split_once('/') {
        let n: i64 = num.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: i64 = den.trim().parse().map_err(|_| err("bad denominator"))?;
        if d == 0 {
            return Err(err("zero denominator"));
        }
        return Ok(S::from_ratio(n, d));
    }
    if let Some((int_part, frac_part)) = trimmed.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let i: i64 = if int_part == "-" || int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| err("bad integer part"))?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad fractional part"));
        }
        if frac_part.len() > 18 {
            return Err(err("fractional part too long"));
        }
        let f: i64 = frac_part.parse().map_err(|_| err("bad fractional part"))?;
        let den = 10i64.pow(frac_part.len() as u32);
        let frac = S::from_ratio(f, den);
        let whole = S::from_int(i);
        return Ok(if negative { whole - frac } else { whole + frac });
    }
    let n: i64 = trimmed.parse().map_err(|_| err("not an integer"))?;
    Ok(S::from_int(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parse_is_exact() {
        let q: BigRational = parse_scalar("1/4").unwrap();
        assert_eq!(q, BigRational::from_ratio(1, 4));
        let d: BigRational = parse_scalar("0.25").unwrap();
        assert_eq!(d, q);
        let n: BigRational = parse_scalar("-3").unwrap();
        assert_eq!(n, BigRational::from_int(-3));
        let m: BigRational = parse_scalar("-0.5").unwrap();
        assert_eq!(m, BigRational::from_ratio(-1, 2));
    }

    #[test]
    fn float_parse_and_tolerance() {
        let x: f64 = parse_scalar("1/8").unwrap();
        assert_eq!(x, 0.125);
        assert!(x.approx_eq(&(0.125 + 1e-12)));
        assert!(!x.approx_eq(&(0.125 + 1e-6)));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_scalar::<f64>("").is_err());
        assert!(parse_scalar::<f64>("1/0").is_err());
        assert!(parse_scalar::<BigRational>("abc").is_err());
        assert!(parse_scalar::<BigRational>("1.2.3").is_err());
    }

    #[test]
    fn render_modes() {
        assert_eq!(BigRational::from_ratio(7, 16).render(), "7/16");
        assert_eq!(BigRational::from_int(2).render(), "2");
        let s = 0.5f64.render();
        assert!(s.starts_with("5.0000000000"), "{s}");
    }
}
