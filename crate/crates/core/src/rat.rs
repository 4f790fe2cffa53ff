//! Exact rational helpers.
//!
//! Every probability in the crate is a [`Rat`]; floating point only appears
//! when a value is rendered for humans or when Shannon entropy is reported.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always kept in lowest terms.
pub type Rat = BigRational;

/// Shorthand constructor, mostly for tests and built-in tables.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.125`.
///
/// Decimals are converted exactly (`0.1` is `1/10`), never through `f64`.
pub fn parse_rat(text: &str) -> Option<Rat> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = parse_int(n)?;
        let d: BigInt = parse_int(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{whole_digits}{frac}");
        let numer: BigInt = digits.parse().ok()?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        let value = Rat::new(numer, denom);
        return Some(if negative { -value } else { value });
    }
    parse_int(text).map(Rat::from_integer)
}

fn parse_int(text: &str) -> Option<BigInt> {
    let t = text.trim();
    let digits = t.trim_start_matches(['-', '+']);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    t.parse().ok()
}

pub fn to_f64(value: &Rat) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Renders `value` with at most `digits` fractional digits, rounding half to
/// even. Trailing zeros are trimmed but one fractional digit is kept, so
/// `1` renders as `1.0` and `2/3` as `0.6667` with four digits.
pub fn format_decimal(value: &Rat, digits: usize) -> String {
    let negative = value.is_negative();
    let magnitude = value.abs();
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = &magnitude * Rat::from_integer(scale.clone());
    let mut units = scaled.floor().to_integer();
    let remainder = &scaled - Rat::from_integer(units.clone());
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    if remainder > half || (remainder == half && units.is_odd()) {
        units += 1;
    }
    let (whole, frac) = units.div_rem(&scale);
    let sign = if negative && !(whole.is_zero() && frac.is_zero()) {
        "-"
    } else {
        ""
    };
    if digits == 0 {
        return format!("{sign}{whole}");
    }
    let mut frac_text = format!("{:0>width$}", frac.to_string(), width = digits);
    while frac_text.len() > 1 && frac_text.ends_with('0') {
        frac_text.pop();
    }
    format!("{sign}{whole}.{frac_text}")
}

/// True when `0 <= value <= 1`.
pub fn is_probability(value: &Rat) -> bool {
    !value.is_negative() && *value <= Rat::one()
}
