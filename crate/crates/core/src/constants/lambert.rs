//! Principal branch of Lambert's W on `(-1/e, 0)`.

use rug::Float;

use crate::error::{Error, Result};

const MAX_ITER: u32 = 100;

/// Solves `w e^w = z` with `w > -1` by Halley iteration.
pub fn lambert_w_principal(z: &Float, prec: u32) -> Result<Float> {
    let p = prec + 16;
    let z = Float::with_val(p, z);
    let e = Float::with_val(p, 1).exp();
    // e z + 1 > 0 strictly inside the domain
    let ez1 = Float::with_val(p, &e * &z) + 1u32;
    if !z.is_finite() || ez1 <= 0 || z >= 0 {
        return Err(Error::InvalidArgument(format!(
            "principal Lambert W needs -1/e < z < 0, got {z}"
        )));
    }

    let mut w = if ez1 < 0.25 {
        // branch-point series in q = sqrt(2 (e z + 1))
        let q = Float::with_val(p, &ez1 * 2u32).sqrt();
        let q2 = Float::with_val(p, q.square_ref());
        let q3 = Float::with_val(p, &q2 * &q);
        Float::with_val(p, &q - 1u32) - q2 / 3u32 + q3 * 11u32 / 72u32
    } else {
        Float::with_val(p, &z / Float::with_val(p, &z + 1u32))
    };

    let tol = Float::with_val(p, Float::i_exp(1, -(prec as i32) + 2));
    for _ in 0..MAX_ITER {
        let ew = w.clone().exp();
        let f = Float::with_val(p, &w * &ew) - &z;
        let w1 = Float::with_val(p, &w + 1u32);
        if w1.is_zero() {
            break;
        }
        // Halley: Δ = f / (e^w (w+1) - (w+2) f / (2 (w+1)))
        let denom = Float::with_val(p, &ew * &w1)
            - Float::with_val(p, &w + 2u32) * &f / Float::with_val(p, &w1 * 2u32);
        let delta = f / denom;
        w -= &delta;
        if delta.abs() <= Float::with_val(p, &tol * Float::with_val(p, w.abs_ref()).max(&Float::with_val(p, 1))) {
            return Ok(Float::with_val(prec, &w));
        }
    }
    Err(Error::RootFinding(format!("Lambert W did not converge at z = {z}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_argument() {
        let z = -Float::with_val(160, -1.25f64).exp();
        let w = lambert_w_principal(&z, 128).unwrap();
        // published value, truncated to 20 digits
        let want = Float::with_val(128, Float::parse("-0.44878202648462460223").unwrap());
        assert!(Float::with_val(128, &w - &want).abs() < 1.01e-20);
    }

    #[test]
    fn near_branch_point() {
        let inv_e = Float::with_val(128, -1i32).exp();
        let z = Float::with_val(128, 1e-6) - inv_e;
        let w = lambert_w_principal(&z, 128).unwrap();
        assert!(w > -1 && w < -0.99);
        let residual = Float::with_val(128, &w * w.clone().exp()) - &z;
        assert!(residual.abs() < 1e-14);
    }

    #[test]
    fn round_trip() {
        for &v in &[-0.9, -0.5, -0.3, -1e-3, -1e-12] {
            let w0 = Float::with_val(128, v);
            let z = Float::with_val(128, &w0 * w0.clone().exp());
            let w = lambert_w_principal(&z, 128).unwrap();
            assert!(Float::with_val(128, &w - &w0).abs() < 1e-30, "{v}: {w}");
        }
    }

    #[test]
    fn domain() {
        assert!(lambert_w_principal(&Float::with_val(64, 0.1), 64).is_err());
        assert!(lambert_w_principal(&Float::with_val(64, -0.5), 64).is_err());
        assert!(lambert_w_principal(&Float::with_val(64, 0), 64).is_err());
    }
}
