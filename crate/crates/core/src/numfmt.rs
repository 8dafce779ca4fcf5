//! Decimal rendering with round-half-even at a fixed number of decimals or
//! significant digits. Values are converted to exact rationals first so the
//! rounding decision never depends on binary-to-decimal conversion noise.

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

fn round_half_even(v: &Rational) -> Integer {
    let (frac, floor) = v.clone().fract_floor(Integer::new());
    let half = Rational::from((1, 2));
    match frac.cmp(&half) {
        std::cmp::Ordering::Less => floor,
        std::cmp::Ordering::Greater => floor + 1u32,
        std::cmp::Ordering::Equal if floor.is_even() => floor,
        std::cmp::Ordering::Equal => floor + 1u32,
    }
}

fn pow10(e: u32) -> Integer {
    Integer::from(10).pow(e)
}

fn with_point(digits: &Integer, decimals: u32, negative: bool) -> String {
    let mut s = digits.to_string();
    if decimals > 0 {
        let d = decimals as usize;
        if s.len() <= d {
            s = format!("{}{}", "0".repeat(d + 1 - s.len()), s);
        }
        s.insert(s.len() - d, '.');
    }
    if negative && digits != &0 {
        s.insert(0, '-');
    }
    s
}

/// Rational value rounded to `decimals` places after the point.
pub fn fixed_rational(v: &Rational, decimals: u32) -> String {
    let negative = *v < 0;
    let scaled = Rational::from(v.abs_ref()) * pow10(decimals);
    with_point(&round_half_even(&scaled), decimals, negative)
}

/// Float rounded to `decimals` places after the point.
pub fn fixed(v: &Float, decimals: u32) -> String {
    match v.to_rational() {
        Some(r) => fixed_rational(&r, decimals),
        None => v.to_string(),
    }
}

/// Float cut (not rounded) after `decimals` places, the way published
/// constants are usually quoted.
pub fn truncated(v: &Float, decimals: u32) -> String {
    let Some(r) = v.to_rational() else {
        return v.to_string();
    };
    let negative = r < 0;
    let scaled = Rational::from(r.abs_ref()) * pow10(decimals);
    let (_, floor) = scaled.fract_floor(Integer::new());
    with_point(&floor, decimals, negative)
}

/// Float rounded to `digits` significant digits. Moderate magnitudes are
/// printed positionally, others in `d.ddd e±x` form.
pub fn significant(v: &Float, digits: u32) -> String {
    assert!(digits > 0);
    let Some(r) = v.to_rational() else {
        return v.to_string();
    };
    if r == 0 {
        return "0".into();
    }
    let negative = r < 0;
    let mag = Rational::from(r.abs_ref());
    // decimal exponent estimate, corrected below
    let mut exp = Float::with_val(64, &mag).log10().floor().to_f64() as i64;
    let (mantissa, exp) = loop {
        let shift = exp - i64::from(digits) + 1;
        let scaled = if shift >= 0 {
            Rational::from(&mag / pow10(shift as u32))
        } else {
            Rational::from(&mag * pow10((-shift) as u32))
        };
        let m = round_half_even(&scaled);
        if m >= pow10(digits) {
            exp += 1;
        } else if m < pow10(digits - 1) {
            exp -= 1;
        } else {
            break (m, exp);
        }
    };
    let digits = i64::from(digits);
    if (-6..digits).contains(&exp) {
        // positional: value = mantissa * 10^(exp - digits + 1)
        let decimals = digits - 1 - exp;
        if decimals >= 0 {
            with_point(&mantissa, decimals as u32, negative)
        } else {
            let m = mantissa * pow10((-decimals) as u32);
            with_point(&m, 0, negative)
        }
    } else {
        let body = with_point(&mantissa, (digits - 1) as u32, negative);
        format!("{body}e{exp:+}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation() {
        let v = Float::with_val(128, Float::parse("0.0369078300648522021770").unwrap());
        assert_eq!(truncated(&v, 20), "0.03690783006485220217");
        assert_eq!(truncated(&Float::with_val(64, -2.99), 1), "-2.9");
        assert_eq!(truncated(&Float::with_val(64, 0.0004), 3), "0.000");
    }

    #[test]
    fn fixed_rounds_half_even() {
        assert_eq!(fixed_rational(&Rational::from((5, 2)), 0), "2");
        assert_eq!(fixed_rational(&Rational::from((7, 2)), 0), "4");
        assert_eq!(fixed_rational(&Rational::from((14, 5)), 6), "2.800000");
        assert_eq!(fixed_rational(&Rational::from((1, 8)), 2), "0.12");
        assert_eq!(fixed_rational(&Rational::from((3, 8)), 2), "0.38");
        assert_eq!(fixed_rational(&Rational::from((-1, 3)), 4), "-0.3333");
        assert_eq!(fixed_rational(&Rational::from((1, 3000)), 2), "0.00");
    }

    #[test]
    fn significant_digits() {
        let v = Float::with_val(128, 0.625);
        assert_eq!(significant(&v, 2), "0.62");
        let v = Float::with_val(128, 123456.0);
        assert_eq!(significant(&v, 3), "1.23e+5");
        assert_eq!(significant(&v, 7), "123456.0");
        assert_eq!(significant(&Float::with_val(128, 9.9996), 4), "10.00");
        let big = Float::with_val(128, 1.5e40);
        assert_eq!(significant(&big, 3), "1.50e+40");
        let small = Float::with_val(128, -2.5e-9);
        assert_eq!(significant(&small, 2), "-2.5e-9");
        assert_eq!(significant(&Float::new(64), 5), "0");
    }
}
