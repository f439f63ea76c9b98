//! Numeric abstraction shared by the market checkers.
//!
//! Every checker is generic over [`Scalar`] so the same code runs in two modes:
//!
//! * `f64` — fast floating point. Comparisons against stated inequalities get a
//!   tiny relative whisker ([`FLOAT_WHISKER`]) so that values sitting exactly on
//!   a boundary do not flip on the last ulp.
//! * [`BigRational`] — exact arithmetic for inputs that are rational (decimal
//!   strings, fractions, or any finite double, which is itself a rational).
//!   The whisker is zero: pass/fail is decided exactly.

use num::bigint::BigInt;
use num::{One, Signed, Zero};
pub use num::rational::BigRational;
use std::fmt;
use std::str::FromStr;

/// Relative slack below which an f64 comparison is still considered satisfied.
///
/// Floating-point evaluation of an inequality that holds with equality lands
/// within a few ulps of zero; this margin absorbs that noise without masking
/// genuine violations (all tolerances used by callers are ≥ 1e-9).
pub const FLOAT_WHISKER: f64 = 1e-12;

/// Arithmetic required by the generic checkers.
///
/// Implemented for `f64` (approximate mode) and `BigRational` (exact mode).
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + num::Num
    + Signed
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact and comparisons need no whisker.
    const EXACT: bool;

    /// Converts a finite double without loss (every finite double is rational).
    ///
    /// Panics on NaN or infinity; inputs are validated before reaching this.
    fn from_f64(v: f64) -> Self;

    /// Nearest-double rendering, used for reporting only.
    fn to_f64(&self) -> f64;

    /// Comparison margin folded into `satisfied` decisions: [`FLOAT_WHISKER`]
    /// for floats, zero for rationals.
    fn whisker() -> Self;

    /// Exact-rational view of this value: identity for rationals, the exact
    /// value of the double for floats (every finite double is rational).
    ///
    /// Panics on non-finite floats; inputs are validated before reaching this.
    fn to_exact(&self) -> BigRational;

    /// Inverse of [`Scalar::to_exact`] up to rounding: identity for
    /// rationals, nearest double for floats. Rationals outside the double
    /// range come back non-finite; callers gate on [`Scalar::is_valid`].
    fn from_exact(v: BigRational) -> Self;

    /// False only for non-finite floats; rationals are always valid.
    fn is_valid(&self) -> bool {
        true
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "non-finite scalar: {v}");
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn whisker() -> Self {
        FLOAT_WHISKER
    }

    fn to_exact(&self) -> BigRational {
        BigRational::from_float(*self).unwrap_or_else(|| panic!("non-finite scalar: {self}"))
    }

    fn from_exact(v: BigRational) -> Self {
        num::ToPrimitive::to_f64(&v).unwrap_or(f64::NAN)
    }

    fn is_valid(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(|| panic!("non-finite scalar: {v}"))
    }

    fn to_f64(&self) -> f64 {
        num::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn whisker() -> Self {
        BigRational::zero()
    }

    fn to_exact(&self) -> BigRational {
        self.clone()
    }

    fn from_exact(v: BigRational) -> Self {
        v
    }
}

/// `max(1, |v|)` — the denominator of the relative-slack convention.
pub fn rel_scale<T: Scalar>(v: &T) -> T {
    let a = v.abs();
    if a > T::one() {
        a
    } else {
        T::one()
    }
}

/// Parses a decimal literal (`"1.25"`, `"-3e-2"`, `"7"`) or a fraction
/// (`"22/7"`) into an exact rational.
pub fn parse_exact(s: &str) -> Result<BigRational, ParseNumberError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseNumberError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| bad(s))?;
        let d = BigInt::from_str(den.trim()).map_err(|_| bad(s))?;
        if d.is_zero() {
            return Err(ParseNumberError::ZeroDenominator);
        }
        return Ok(BigRational::new(n, d));
    }
    parse_decimal(s).ok_or_else(|| bad(s))
}

fn bad(s: &str) -> ParseNumberError {
    ParseNumberError::Malformed(s.to_owned())
}

/// Decimal with optional sign, fraction part, and exponent: `[-+]?d*(.d*)?([eE][-+]?d+)?`.
fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exp_part) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let exp: i64 = match exp_part {
        Some(e) if !e.is_empty() => e.parse().ok()?,
        Some(_) => return None,
        None => 0,
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let unsigned = BigInt::from_str(if joined.is_empty() { "0" } else { &joined }).ok()?;
    let numer = BigInt::from(sign) * unsigned;
    let shift = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let value = if shift >= 0 {
        BigRational::from_integer(numer * ten.pow(shift as u32))
    } else {
        BigRational::new(numer, ten.pow((-shift) as u32))
    };
    Some(value)
}

/// Renders a rational as `"p/q"` (or `"p"` for integers).
pub fn format_exact(v: &BigRational) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParseNumberError {
    #[error("empty number literal")]
    Empty,
    #[error("malformed number literal: {0:?}")]
    Malformed(String),
    #[error("fraction with zero denominator")]
    ZeroDenominator,
}
