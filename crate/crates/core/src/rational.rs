//! Exact rational helpers shared by the analysis modules.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number.
pub type Rational = num_rational::BigRational;

/// Builds `numer / denom`. Panics if `denom` is zero.
pub fn ratio(numer: u64, denom: u64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Nearest `f64` to the rational value.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses a plain decimal literal such as `-0.125` or `42` into an exact
/// rational. Exponent notation is accepted (`1.5e-3`).
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer: BigInt = all_digits.parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, scale.unsigned_abs() as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

/// Exact rational equal to the shortest decimal string that round-trips to
/// `x`, so `0.8_f64` maps to `4/5` rather than to its binary expansion.
/// Returns `None` for non-finite input.
pub fn from_f64_decimal(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    parse_decimal(&format!("{x}"))
}

/// Decimal rendering of `r` with `places` fractional digits, rounding
/// half-to-even.
pub fn round_half_even(r: &Rational, places: u32) -> String {
    let scale = num_traits::pow(BigInt::from(10u32), places as usize);
    let scaled = r.abs() * Rational::from_integer(scale);
    let (mut whole, rem) = scaled.numer().div_rem(scaled.denom());
    let twice_rem = rem * 2u32;
    match twice_rem.cmp(scaled.denom()) {
        std::cmp::Ordering::Greater => whole += 1u32,
        std::cmp::Ordering::Equal if whole.is_odd() => whole += 1u32,
        _ => {}
    }
    let negative = r.numer().sign() == Sign::Minus && !whole.is_zero();
    let mut digits = whole.to_string();
    if places > 0 {
        let width = places as usize + 1;
        if digits.len() < width {
            digits = format!("{}{}", "0".repeat(width - digits.len()), digits);
        }
        digits.insert(digits.len() - places as usize, '.');
    }
    if negative {
        digits.insert(0, '-');
    }
    digits
}

/// Renders a distribution at `places` digits so the rendered values still
/// sum to the rounded total (largest-remainder rounding). Ties in the
/// remainder go to the earlier entry.
pub fn render_distribution(probs: &[Rational], places: u32) -> Vec<String> {
    let scale = Rational::from_integer(num_traits::pow(BigInt::from(10u32), places as usize));
    let scaled: Vec<Rational> = probs.iter().map(|p| p * &scale).collect();
    let mut units: Vec<BigInt> = scaled.iter().map(|s| s.floor().to_integer()).collect();
    let total: Rational = scaled.iter().sum();
    let extra = (total.round().to_integer() - units.iter().sum::<BigInt>())
        .to_usize()
        .unwrap_or(0);
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&i, &j| scaled[j].fract().cmp(&scaled[i].fract()).then(i.cmp(&j)));
    for &i in order.iter().take(extra) {
        units[i] += 1u32;
    }
    units
        .into_iter()
        .map(|u| round_half_even(&(Rational::from_integer(u) / &scale), places))
        .collect()
}

/// `"n/d"`, or just `"n"` for integers.
pub fn render_exact(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
