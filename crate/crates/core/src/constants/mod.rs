//! Limiting constants: moment integrals over the exponential integral,
//! the limiting median of the largest component, and the closed forms the
//! limits reduce to for the four exp-log parameters of interest.

mod expint;
mod lambert;
pub mod quadrature;

use std::fmt;

use rug::ops::Pow;
use rug::{Complete, Float, Integer};

use crate::catalog::{ExpLogParam, Structure};
use crate::error::{Error, Result};
use crate::numfmt;

pub use expint::{exp_integral, SERIES_CUTOFF};
pub use lambert::lambert_w_principal;

/// Euler's constant, 80 digits.
pub const EULER_GAMMA: &str =
    "0.57721566490153286060651209008240243104215933593992359880576723488486772677766467";

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

pub const REPORT_DECIMALS: u32 = 20;

pub fn euler_gamma(prec: u32) -> Float {
    Float::with_val(prec, Float::parse(EULER_GAMMA).expect("valid literal"))
}

/// Mantissa bits used to reach an absolute tolerance `tol` on O(1) values.
pub fn working_precision(tol: f64) -> u32 {
    let bits = (-tol.log2()).ceil().max(0.0) as u32;
    (bits + 48).max(113)
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    ClosedForm,
    RootFind,
    /// Read off finite-n data; no integral representation is known.
    Empirical,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed-form",
            Method::RootFind => "root-find",
            Method::Empirical => "empirical",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantResult {
    pub name: String,
    /// What the constant is the limit of, e.g. `L mean / n`.
    pub limit_of: Option<String>,
    pub value: Float,
    pub error_estimate: f64,
    pub method: Method,
}

impl ConstantResult {
    fn new(name: impl Into<String>, value: Float, error_estimate: f64, method: Method) -> Self {
        ConstantResult {
            name: name.into(),
            limit_of: None,
            value,
            error_estimate,
            method,
        }
    }

    fn limit_of(mut self, what: impl Into<String>) -> Self {
        self.limit_of = Some(what.into());
        self
    }

    /// The value cut after 20 decimals, the layout used for published
    /// constants.
    /// Empirical values keep only the digits they are known to, followed
    /// by `...`.
    pub fn digits(&self) -> String {
        if self.method == Method::Empirical {
            let known = (-self.error_estimate.log10()).round().max(0.0) as u32;
            return format!("{}...", numfmt::fixed(&self.value, known));
        }
        numfmt::truncated(&self.value, REPORT_DECIMALS)
    }

    /// `name = value  (error e, method)`.
    pub fn report_line(&self) -> String {
        let mut line = format!(
            "{} = {}  (error {:.1e}, {})",
            self.name,
            self.digits(),
            self.error_estimate,
            self.method
        );
        if let Some(what) = &self.limit_of {
            line.push_str(&format!("  [limit of {what}]"));
        }
        line
    }
}

fn factorial(m: u32, prec: u32) -> Float {
    Float::with_val(prec, Integer::factorial(m).complete())
}

/// `∫_0^∞ f`, split at 1: on `(0, 1]` through `x = e^{-u}`, which turns the
/// logarithmic behaviour of `E` at the origin into exponential decay; on
/// `[1, ∞)` through `x = 1 + t`.
fn integrate_split<F>(f: F, prec: u32, tol: f64) -> Result<(Float, f64)>
where
    F: Fn(&Float) -> Float,
{
    let p = prec + 8;
    let near = quadrature::half_line(
        |u| {
            let x = (-u.clone()).exp();
            // both pieces vanish where x leaves the exponent range
            if x.is_zero() {
                return x;
            }
            f(&x) * x
        },
        p,
        tol / 4.0,
    )?;
    let far = quadrature::half_line(
        |t| {
            let x = Float::with_val(p, t + 1u32);
            if x.is_finite() {
                f(&x)
            } else {
                Float::new(p)
            }
        },
        p,
        tol / 4.0,
    )?;
    let value = Float::with_val(prec, &near.value + &far.value);
    Ok((value, near.error.to_f64() + far.error.to_f64()))
}

fn check_rank_height(r: u32, h: u32) -> Result<()> {
    if r == 0 || h == 0 {
        return Err(Error::InvalidArgument(format!(
            "rank and height must be positive, got r = {r}, h = {h}"
        )));
    }
    Ok(())
}

/// `Γ(a+1) a^{r-1} / (Γ(a+h) (r-1)!) ∫_0^∞ x^{h-1} E(x)^{r-1} e^{-aE(x)-x} dx`,
/// the scaled `h`-th moment of the `r`-th largest component.
pub fn g_largest(a: ExpLogParam, r: u32, h: u32, tol: f64) -> Result<ConstantResult> {
    check_tolerance(tol)?;
    check_rank_height(r, h)?;
    let prec = working_precision(tol);
    let af = a.to_float(prec);
    let integrand = |x: &Float| -> Float {
        let p = x.prec();
        let e = exp_integral(x, p).expect("x > 0 inside the quadrature");
        let mut v = Float::with_val(p, &af * &e) + x;
        v = (-v).exp();
        if h > 1 {
            v *= Float::with_val(p, x.pow(h - 1));
        }
        if r > 1 {
            v *= e.pow(r - 1);
        }
        v
    };
    let (integral, err) = integrate_split(integrand, prec, tol)?;
    let prefactor = Float::with_val(prec, &af + 1u32).gamma() * af.clone().pow(r - 1)
        / (Float::with_val(prec, &af + h).gamma() * factorial(r - 1, prec));
    let value = Float::with_val(prec, &integral * &prefactor);
    let err = err * prefactor.to_f64().abs();
    ensure_within(&format!("_L G_{a}({r},{h})"), &value, err, tol)?;
    Ok(ConstantResult::new(
        format!("_L G_{a}({r},{h})"),
        value,
        err,
        Method::Quadrature,
    ))
}

/// `G(a,r,2) - G(a,r,1)²`, the limiting scaled variance.
pub fn largest_variance_limit(a: ExpLogParam, r: u32, tol: f64) -> Result<ConstantResult> {
    let first = g_largest(a, r, 1, tol / 8.0)?;
    let second = g_largest(a, r, 2, tol / 8.0)?;
    let prec = first.value.prec();
    let value = Float::with_val(prec, &second.value - Float::with_val(prec, first.value.square_ref()));
    let err = second.error_estimate + 2.0 * first.value.to_f64().abs() * first.error_estimate;
    Ok(ConstantResult::new(
        format!("{} - {}^2", second.name, first.name),
        value,
        err,
        Method::Quadrature,
    ))
}

fn ensure_within(name: &str, value: &Float, err: f64, tol: f64) -> Result<()> {
    if err <= tol {
        Ok(())
    } else {
        Err(Error::Quadrature {
            name: name.to_string(),
            estimate: numfmt::significant(value, 20),
            error: err,
        })
    }
}

/// Permutations or derangements, for the smallest-component moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmallestVariant {
    Permutation,
    Derangement,
}

impl SmallestVariant {
    fn letter(self) -> char {
        match self {
            SmallestVariant::Permutation => 'P',
            SmallestVariant::Derangement => 'D',
        }
    }
}

/// Smallest-component moment constants: `e^{-γ}/r!` for `h = 1`, otherwise
/// `1/((h-1)!(r-1)!) ∫_0^∞ x^{h-1} e^{E(x)-x} dx`; the derangement variant
/// is `e` times the permutation one.
pub fn g_smallest(variant: SmallestVariant, r: u32, h: u32, tol: f64) -> Result<ConstantResult> {
    check_tolerance(tol)?;
    check_rank_height(r, h)?;
    let prec = working_precision(tol);
    let name = format!("_S G_{}({r},{h})", variant.letter());
    let (mut value, mut err, method) = if h == 1 {
        let v = (-euler_gamma(prec)).exp() / factorial(r, prec);
        (v, 0.0, Method::ClosedForm)
    } else {
        let integrand = |x: &Float| -> Float {
            let p = x.prec();
            let e = exp_integral(x, p).expect("x > 0 inside the quadrature");
            let v = (e - x).exp();
            v * Float::with_val(p, x.pow(h - 1))
        };
        let (integral, err) = integrate_split(integrand, prec, tol / 4.0)?;
        let norm = factorial(h - 1, prec) * factorial(r - 1, prec);
        (integral / &norm, err / norm.to_f64(), Method::Quadrature)
    };
    if variant == SmallestVariant::Derangement {
        let e = Float::with_val(prec, 1).exp();
        value *= &e;
        err *= e.to_f64();
    }
    ensure_within(&name, &value, err, tol)?;
    Ok(ConstantResult::new(name, value, err, method))
}

/// Positive root of `tanh(ξ) = ξ - 1/6`.
pub fn solve_xi(prec: u32) -> Result<Float> {
    let p = prec + 16;
    let sixth = Float::with_val(p, 1) / 6u32;
    let mut xi = Float::with_val(p, 0.87);
    let tol = Float::with_val(p, Float::i_exp(1, -(prec as i32) + 2));
    for _ in 0..100 {
        let t = xi.clone().tanh();
        let g = Float::with_val(p, &t - &xi) + &sixth;
        // g' = sech² - 1 = -tanh²
        let dg = -t.square();
        let step = g / dg;
        xi -= &step;
        if step.abs() <= tol {
            return Ok(Float::with_val(prec, &xi));
        }
    }
    Err(Error::RootFinding("tanh(ξ) = ξ - 1/6".into()))
}

/// The closed form of the limiting median for `a ∈ {1/2, 1, 3/2, 2}`.
pub fn median_closed_form(a: ExpLogParam, prec: u32) -> Result<Option<Float>> {
    let p = prec + 16;
    let e = Float::with_val(p, 1).exp();
    let v = match (a.numer(), a.denom()) {
        (1, 2) => Float::with_val(p, &e * 4u32) / Float::with_val(p, &e + 1u32).square(),
        (1, 1) => (-Float::with_val(p, 0.5)).exp(),
        (3, 2) => solve_xi(p)?.cosh().square().recip(),
        (2, 1) => {
            let z = -Float::with_val(p, -1.25).exp();
            -lambert_w_principal(&z, p)?
        }
        _ => return Ok(None),
    };
    Ok(Some(Float::with_val(prec, v)))
}

/// `x` in `(0, 1)` with `a ∫_x^1 (1-y)^{a-1}/y dy = 1/2`: the limit of the
/// median of the largest component divided by `n`.
///
/// The substitution `s = (1-y)^a` turns the condition into
/// `∫_0^{(1-x)^a} ds / (1 - s^{1/a}) = 1/2` with a bounded integrand; the
/// root is found by Newton steps kept inside a shrinking bracket.
pub fn median_limit(a: ExpLogParam, tol: f64) -> Result<ConstantResult> {
    check_tolerance(tol)?;
    let prec = working_precision(tol);
    let af = a.to_float(prec);
    let inv_a = Float::with_val(prec, af.recip_ref());
    let quad_tol = tol * 1e-3;

    let residual = |x: &Float| -> Result<(Float, f64)> {
        let upper = Float::with_val(prec, 1u32 - x).pow(&af);
        let zero = Float::new(prec);
        let q = quadrature::interval(
            |s| {
                let p = s.prec();
                Float::with_val(p, 1u32 - Float::with_val(p, s.pow(&inv_a))).recip()
            },
            &zero,
            &upper,
            prec,
            quad_tol,
        )?;
        Ok((q.value - 0.5f64, q.error.to_f64()))
    };

    let mut lo = Float::new(prec);
    let mut hi = Float::with_val(prec, 1);
    let mut x = Float::with_val(prec, 0.5);
    for _ in 0..200 {
        let (f, qerr) = residual(&x)?;
        // F(x) decreases from +∞ at 0 to -1/2 at 1
        if f > 0 {
            lo = x.clone();
        } else {
            hi = x.clone();
        }
        let slope = -Float::with_val(prec, 1u32 - &x).pow(Float::with_val(prec, &af - 1u32)) * &af / &x;
        let mut next = Float::with_val(prec, &x - Float::with_val(prec, &f / &slope));
        if next <= lo || next >= hi {
            next = Float::with_val(prec, &lo + &hi) / 2u32;
        }
        let step = Float::with_val(prec, &next - &x).abs().to_f64();
        x = next;
        if step <= tol * 1e-2 {
            let err = step + qerr / slope.to_f64().abs();
            return Ok(ConstantResult::new(
                format!("median limit (a={a})"),
                x,
                err,
                Method::RootFind,
            ));
        }
    }
    Err(Error::RootFinding(format!("median limit for a = {a}")))
}

/// Limits for the two-colored derangements implied by the permutation
/// constant `κ`: `(κ - 1 + e^{-2}) / e^{-2}` for the mean, and `e^{2-2γ}`
/// for the variance over `ln n`.
pub fn derangement_limits_from_kappa(kappa: &Float) -> Result<(Float, Float)> {
    if !kappa.is_finite() || *kappa < 1 {
        return Err(Error::InvalidArgument(format!(
            "κ must be at least 1, got {kappa}"
        )));
    }
    let prec = kappa.prec().max(128);
    let e_m2 = Float::with_val(prec, -2).exp();
    let mean = Float::with_val(prec, kappa - 1u32) + &e_m2;
    let mean = mean / &e_m2;
    let gamma = euler_gamma(prec);
    let variance = Float::with_val(prec, 2u32 - Float::with_val(prec, &gamma * 2u32)).exp();
    Ok((mean, variance))
}

/// A value known only to a few digits from finite-n data.
fn empirical(name: &str, digits: &str, what: &str) -> ConstantResult {
    let value = Float::with_val(64, Float::parse(digits).expect("valid literal"));
    let last = digits.split('.').nth(1).map_or(0, str::len) as i32;
    ConstantResult::new(name, value, 10f64.powi(-last), Method::Empirical).limit_of(what)
}

/// Least-squares extrapolation of the mean shortest cycle of two-colored
/// permutations, fitting `κ + c₁/n + c₂ ln(n)/n`. The error bar is the
/// spread against a `κ + c₁/n + c₂/n²` fit plus the fit residual.
pub fn estimate_kappa(rows: &[(u32, f64)]) -> Result<ConstantResult> {
    if rows.len() < 3 {
        return Err(Error::InvalidArgument(
            "κ extrapolation needs at least three rows".into(),
        ));
    }
    let fit = |basis: &dyn Fn(f64) -> [f64; 3]| -> Option<([f64; 3], f64)> {
        let mut ata = [[0.0; 3]; 3];
        let mut atb = [0.0; 3];
        for &(n, mu) in rows {
            let b = basis(f64::from(n));
            for i in 0..3 {
                atb[i] += b[i] * mu;
                for j in 0..3 {
                    ata[i][j] += b[i] * b[j];
                }
            }
        }
        let coef = solve3(ata, atb)?;
        let resid = rows
            .iter()
            .map(|&(n, mu)| {
                let b = basis(f64::from(n));
                (mu - (0..3).map(|i| coef[i] * b[i]).sum::<f64>()).abs()
            })
            .fold(0.0, f64::max);
        Some((coef, resid))
    };
    let log_fit = fit(&|n| [1.0, 1.0 / n, n.ln() / n]);
    let quad_fit = fit(&|n| [1.0, 1.0 / n, 1.0 / (n * n)]);
    let (Some((a, resid)), Some((b, _))) = (log_fit, quad_fit) else {
        return Err(Error::InvalidArgument("degenerate κ fit".into()));
    };
    let err = (a[0] - b[0]).abs() + resid;
    Ok(ConstantResult::new("kappa", Float::with_val(64, a[0]), err, Method::Empirical)
        .limit_of("S mean (colored-perms)"))
}

fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= factor * m[col][k];
            }
            v[row] -= factor * v[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (v[row] - tail) / m[row][row];
    }
    Some(x)
}

/// Every limit attached to a structure: the largest-component mean,
/// variance and median, then whatever is known for the smallest component.
pub fn limit_summary(structure: Structure, tol: f64) -> Result<Vec<ConstantResult>> {
    let a = structure
        .exp_log_param()
        .ok_or(Error::Unsupported("limit_summary", structure.name()))?;
    let prec = working_precision(tol);
    let mut out = vec![
        g_largest(a, 1, 1, tol)?.limit_of("L mean / n"),
        largest_variance_limit(a, 1, tol)?.limit_of("L variance / n^2"),
        median_limit(a, tol)?.limit_of("L median / n"),
    ];
    let gamma = euler_gamma(prec);
    let closed = |name: &str, v: Float, what: &str| {
        ConstantResult::new(name, v, 0.0, Method::ClosedForm).limit_of(what)
    };
    match structure {
        Structure::Rounds => {
            out.push(closed("e^(-gamma)", (-gamma).exp(), "S mean / ln n"));
            out.push(
                g_smallest(SmallestVariant::Permutation, 1, 2, tol)?.limit_of("S variance / n"),
            );
        }
        Structure::RoundsVariant => {
            out.push(closed(
                "e^(1-gamma)",
                Float::with_val(prec, 1u32 - gamma).exp(),
                "S mean / ln n",
            ));
            out.push(
                g_smallest(SmallestVariant::Derangement, 1, 2, tol)?.limit_of("S variance / n"),
            );
        }
        Structure::ColoredPerms => {
            out.push(empirical("kappa", "1.29", "S mean"));
            out.push(closed(
                "e^(-2 gamma)",
                Float::with_val(prec, -2 * gamma).exp(),
                "S variance / ln n",
            ));
        }
        Structure::ColoredDerangements => {
            let (_, variance) = derangement_limits_from_kappa(&Float::with_val(prec, 1.29))?;
            out.push(empirical("(kappa-1+e^-2)/e^-2", "3.13", "S mean"));
            out.push(closed("e^(2-2 gamma)", variance, "S variance / ln n"));
        }
        Structure::ColoredMappings => {
            out.push(empirical("S mean limit", "2.61", "S mean"));
            out.push(empirical("S variance limit", "6.50", "S variance / n^(1/2)"));
            out.push(g_largest(a, 2, 1, tol)?.limit_of("second largest mean / n"));
            out.push(largest_variance_limit(a, 2, tol)?.limit_of("second largest variance / n^2"));
        }
        // one limit per parity table: ev, od at even n, od at odd n
        Structure::EvPerms | Structure::OdPerms => {
            for (table, mean, var) in [
                ("ev-perms", "2.06", "1.40"),
                ("od-perms, n even", "0.55", "0.12"),
                ("od-perms, n odd", "1.50", "1.27"),
            ] {
                out.push(empirical(&format!("S mean limit ({table})"), mean, "S mean / n^(1/2)"));
                out.push(empirical(
                    &format!("S variance limit ({table})"),
                    var,
                    "S variance / n^(3/2)",
                ));
            }
        }
        Structure::SquarePerms => unreachable!("no exp-log parameter"),
    }
    Ok(out)
}
