//! Exponential integral `E(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.

use rug::Float;

use super::euler_gamma;
use crate::error::{Error, Result};

/// Below this point the power series is used, above it the continued
/// fraction.
pub const SERIES_CUTOFF: f64 = 1.2;

const GUARD_BITS: u32 = 24;
const MAX_TERMS: u32 = 200_000;

pub fn exp_integral(x: &Float, prec: u32) -> Result<Float> {
    if !x.is_finite() || *x <= 0 {
        return Err(Error::InvalidArgument(format!(
            "exponential integral needs x > 0, got {x}"
        )));
    }
    let value = if *x <= SERIES_CUTOFF {
        series(x, prec + GUARD_BITS)
    } else {
        continued_fraction(x, prec + GUARD_BITS)
    };
    Ok(Float::with_val(prec, value))
}

/// `-γ - ln x + Σ_{k>=1} (-1)^{k+1} x^k / (k k!)`.
pub(crate) fn series(x: &Float, prec: u32) -> Float {
    let x = Float::with_val(prec, x);
    let mut sum = Float::new(prec);
    // (-1)^{k+1} x^k / k!
    let mut power = Float::with_val(prec, 1);
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32)));
    for k in 1..MAX_TERMS {
        power *= &x;
        power /= k;
        power = -power;
        let term = Float::with_val(prec, &power / k);
        sum -= &term;
        if Float::with_val(prec, term.abs_ref()) <= Float::with_val(prec, sum.abs_ref()) * &eps {
            break;
        }
    }
    sum - euler_gamma(prec) - x.ln()
}

/// `e^{-x} / (x+1 - 1²/(x+3 - 2²/(x+5 - ...)))`, evaluated with the
/// modified Lentz algorithm.
pub(crate) fn continued_fraction(x: &Float, prec: u32) -> Float {
    let x = Float::with_val(prec, x);
    let tiny = Float::with_val(prec, Float::i_exp(1, -(4 * prec as i32)));
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32)));
    let mut b = Float::with_val(prec, &x + 1u32);
    let mut c = Float::with_val(prec, 1u32) / &tiny;
    let mut d = Float::with_val(prec, 1u32) / &b;
    let mut h = d.clone();
    for i in 1..MAX_TERMS {
        let an = -(f64::from(i) * f64::from(i));
        b += 2u32;
        d = Float::with_val(prec, &d * an) + &b;
        if d.is_zero() {
            d = tiny.clone();
        }
        d.recip_mut();
        c = Float::with_val(prec, an / &c) + &b;
        if c.is_zero() {
            c = tiny.clone();
        }
        let delta = Float::with_val(prec, &c * &d);
        h *= &delta;
        if Float::with_val(prec, delta - 1u32).abs() <= eps {
            break;
        }
    }
    h * (-x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    fn f(v: f64) -> Float {
        Float::with_val(200, v)
    }

    /// Plain alternating series with a fixed 50 terms in 256-bit floats.
    fn series_oracle(x: f64) -> Float {
        let prec = 256;
        let x = Float::with_val(prec, x);
        let gamma = Float::with_val(prec, rug::float::Constant::Euler);
        let mut sum = Float::new(prec);
        let mut fact = Float::with_val(prec, 1);
        for k in 1..=50u32 {
            fact *= k;
            let term = Float::with_val(prec, x.clone().pow(k)) / (Float::with_val(prec, k) * &fact);
            if k % 2 == 1 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        sum - gamma - x.ln()
    }

    #[test]
    fn value_at_one() {
        let v = exp_integral(&f(1.0), 160).unwrap();
        let expected = series_oracle(1.0);
        assert!(Float::with_val(160, &v - &expected).abs() < 1e-40);
        assert_eq!(
            crate::numfmt::significant(&v, 20),
            "0.21938393439552027368"
        );
    }

    #[test]
    fn regimes_agree_across_cutoff() {
        for &x in &[0.9, 1.2, 1.5, 2.0, 3.0] {
            let s = series(&f(x), 256);
            let c = continued_fraction(&f(x), 256);
            let diff = Float::with_val(256, &s - &c).abs();
            assert!(diff < Float::with_val(256, &s * 1e-60), "x = {x}");
        }
    }

    #[test]
    fn matches_mpfr_eint() {
        for &x in &[1e-6, 0.3, 1.0, 1.19, 1.21, 4.0, 17.5, 60.0] {
            let ours = exp_integral(&f(x), 160).unwrap();
            // Ei(-x) = -E(x)
            let reference = -Float::with_val(200, -x).eint();
            let rel = Float::with_val(200, &ours - &reference).abs() / &reference;
            assert!(rel < 1e-45, "x = {x}: {ours} vs {reference}");
        }
    }

    #[test]
    fn small_and_large_x() {
        let tiny = exp_integral(&f(1e-8), 128).unwrap();
        let leading = -Float::with_val(128, rug::float::Constant::Euler) - f(1e-8).ln();
        assert!(Float::with_val(128, &tiny - &leading).abs() < 1e-7);
        assert!(tiny.to_f64() > 17.8434 && tiny.to_f64() < 17.8435);

        let x = f(50.0);
        let big = exp_integral(&x, 128).unwrap();
        let ratio = (big * &x * x.clone().exp()).to_f64();
        assert!((ratio - 1.0).abs() < 0.03, "{ratio}");
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(exp_integral(&f(0.0), 64).is_err());
        assert!(exp_integral(&f(-1.0), 64).is_err());
    }
}
