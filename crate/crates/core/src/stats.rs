//! Finite-n summaries of a table row: mean, variance and median of the
//! component-size distribution, plus the scaled columns.

use std::fmt::Write as _;

use rug::{Complete, Float, Integer, Rational};

use crate::catalog::{NormalizerRule, Statistic, Structure};
use crate::engine::{self, CountTable, Mode, ResourceBudget};
use crate::error::{Error, Result};
use crate::numfmt;

/// Working precision of summary values.
pub const STAT_PRECISION: u32 = 256;

/// Above this `n`, [`SeriesMode::Auto`] switches to normalized tables.
pub const DEFAULT_EXACT_THRESHOLD: u32 = 1000;

/// Moments of one row. Present unless the row is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct RowStats {
    pub mean: Float,
    pub variance: Float,
    /// `Σ k² w_k`.
    pub second_moment: Float,
    /// Least `k` with `P(size <= k) >= 1/2`.
    pub median: u32,
    /// Largest `k` with `P(size > k) >= 1/2`; this is the median convention
    /// of the published tables, one below `median` unless the distribution
    /// function hits 1/2 exactly.
    pub tail_median: u32,
    /// Exact moments, kept when the row came from an exact table.
    pub exact: Option<ExactMoments>,
    pub scaled: ScaledColumns,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    pub mean: Rational,
    pub variance: Rational,
    pub second_moment: Rational,
    /// `Σ_k w_k`; exactly 1 unless the normalizer differs from the row sum.
    pub mass: Rational,
}

/// Moments divided by the structure's scaling divisors.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledColumns {
    pub mean: Float,
    pub variance: Float,
    pub second_moment: Float,
    pub median: Option<Float>,
    pub tail_median: Option<Float>,
}

impl RowStats {
    /// Value of the published column: `L` uses the variance, `S` the
    /// second moment (the two agree to leading order).
    pub fn table_spread(&self, statistic: Statistic) -> &Float {
        match statistic {
            Statistic::Largest => &self.scaled.variance,
            Statistic::Smallest => &self.scaled.second_moment,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub structure: Structure,
    pub statistic: Statistic,
    pub n: u32,
    /// `None` when no `n`-object exists.
    pub stats: Option<RowStats>,
}

impl SummaryRow {
    pub fn is_defined(&self) -> bool {
        self.stats.is_some()
    }
}

/// Summarize row `n`, normalizing by the structure's own rule.
pub fn summarize(table: &CountTable, n: u32) -> Result<SummaryRow> {
    check_row(table, n)?;
    match table.mode() {
        Mode::Exact => {
            let sum = table.exact_row_sum(n).expect("exact table");
            let normalizer = table.structure().normalizer(n, sum)?;
            summarize_exact(table, n, &normalizer)
        }
        Mode::Normalized { .. } => summarize_normalized(table, n),
    }
}

fn check_row(table: &CountTable, n: u32) -> Result<()> {
    if n == 0 || n > table.max_n() {
        return Err(Error::InvalidArgument(format!(
            "row {n} outside table of size {}",
            table.max_n()
        )));
    }
    Ok(())
}

/// Summarize row `n` of an exact table against an explicit normalizer.
pub fn summarize_exact(table: &CountTable, n: u32, normalizer: &Integer) -> Result<SummaryRow> {
    check_row(table, n)?;
    if *normalizer <= 0 {
        return Err(Error::InvalidArgument("normalizer must be positive".into()));
    }
    let row = table
        .exact_row(n)
        .ok_or_else(|| Error::InvalidArgument("table is not exact".into()))?;
    let mut result = SummaryRow {
        structure: table.structure(),
        statistic: table.statistic(),
        n,
        stats: None,
    };
    let total: Integer = row.iter().sum();
    if total == 0 {
        return Ok(result);
    }

    let mut first = Integer::new();
    let mut second = Integer::new();
    let mut cum = Integer::new();
    let mut median = None;
    let mut tail_median = 0;
    for (k, v) in (1u32..).zip(&row) {
        first += (v * k).complete();
        second += (v * (k * k)).complete();
        cum += v;
        if median.is_none() && (&cum * 2u32).complete() >= *normalizer {
            median = Some(k);
        }
        if ((&total - &cum).complete() * 2u32) >= *normalizer {
            tail_median = k;
        }
    }
    let median = median.ok_or_else(|| {
        Error::InvalidArgument("normalizer exceeds twice the row total".into())
    })?;
    let mean = Rational::from((first, normalizer.clone()));
    let second_moment = Rational::from((second, normalizer.clone()));
    let variance = second_moment.clone() - mean.clone().square();
    let exact = ExactMoments {
        mass: Rational::from((total, normalizer.clone())),
        mean,
        variance,
        second_moment,
    };
    let prec = STAT_PRECISION;
    result.stats = Some(scale(
        table.structure(),
        table.statistic(),
        n,
        Moments {
            mean: Float::with_val(prec, &exact.mean),
            variance: Float::with_val(prec, &exact.variance),
            second_moment: Float::with_val(prec, &exact.second_moment),
            median,
            tail_median,
        },
        Some(exact),
    )?);
    Ok(result)
}

fn summarize_normalized(table: &CountTable, n: u32) -> Result<SummaryRow> {
    let prec = STAT_PRECISION;
    let row = table.normalized_row(n, prec);
    let mut result = SummaryRow {
        structure: table.structure(),
        statistic: table.statistic(),
        n,
        stats: None,
    };
    let total = Float::with_val(prec, Float::sum(row.iter()));
    if total.is_zero() {
        return Ok(result);
    }
    let normalizer = match table.structure().normalizer_rule() {
        // (n+1)! / n!
        NormalizerRule::SuccessorFactorial => Float::with_val(prec, n + 1),
        NormalizerRule::SumOfRow => total.clone(),
    };
    let mut first = Float::new(prec);
    let mut second = Float::new(prec);
    let mut cum = Float::new(prec);
    let mut median = None;
    let mut tail_median = 0;
    for (k, v) in (1u32..).zip(&row) {
        first += Float::with_val(prec, v * k);
        second += Float::with_val(prec, v * (u64::from(k) * u64::from(k)));
        cum += v;
        if median.is_none() && Float::with_val(prec, &cum * 2u32) >= normalizer {
            median = Some(k);
        }
        if Float::with_val(prec, &total - &cum) * 2u32 >= normalizer {
            tail_median = k;
        }
    }
    let mean = first / &normalizer;
    let second_moment = second / &normalizer;
    let variance = Float::with_val(prec, &second_moment - Float::with_val(prec, mean.square_ref()));
    result.stats = Some(scale(
        table.structure(),
        table.statistic(),
        n,
        Moments {
            mean,
            variance,
            second_moment,
            median: median.unwrap_or(n),
            tail_median,
        },
        None,
    )?);
    Ok(result)
}

struct Moments {
    mean: Float,
    variance: Float,
    second_moment: Float,
    median: u32,
    tail_median: u32,
}

fn scale(
    structure: Structure,
    statistic: Statistic,
    n: u32,
    m: Moments,
    exact: Option<ExactMoments>,
) -> Result<RowStats> {
    let prec = STAT_PRECISION;
    let div = structure.scaling_divisors(statistic, n, prec)?;
    let scaled = ScaledColumns {
        mean: Float::with_val(prec, &m.mean / &div.mean),
        variance: Float::with_val(prec, &m.variance / &div.variance),
        second_moment: Float::with_val(prec, &m.second_moment / &div.variance),
        median: div
            .median
            .as_ref()
            .map(|d| Float::with_val(prec, m.median) / d),
        tail_median: div.median.map(|d| Float::with_val(prec, m.tail_median) / d),
    };
    Ok(RowStats {
        mean: m.mean,
        variance: m.variance,
        second_moment: m.second_moment,
        median: m.median,
        tail_median: m.tail_median,
        exact,
        scaled,
    })
}

/// How [`table_series`] picks the table arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMode {
    Exact,
    Normalized { precision: u32 },
    /// Exact up to `threshold`, normalized beyond.
    Auto { threshold: u32, precision: u32 },
}

impl Default for SeriesMode {
    fn default() -> Self {
        SeriesMode::Auto {
            threshold: DEFAULT_EXACT_THRESHOLD,
            precision: engine::DEFAULT_PRECISION,
        }
    }
}

impl SeriesMode {
    pub fn resolve(self, max_n: u32) -> Mode {
        match self {
            SeriesMode::Exact => Mode::Exact,
            SeriesMode::Normalized { precision } => Mode::Normalized { precision },
            SeriesMode::Auto {
                threshold,
                precision,
            } => {
                if max_n <= threshold {
                    Mode::Exact
                } else {
                    Mode::Normalized { precision }
                }
            }
        }
    }
}

/// Builds one table up to the largest requested `n` and summarizes each row.
pub fn table_series(
    structure: Structure,
    statistic: Statistic,
    n_values: &[u32],
    mode: SeriesMode,
    budget: ResourceBudget,
) -> Result<Vec<SummaryRow>> {
    let Some(&max_n) = n_values.iter().max() else {
        return Err(Error::InvalidArgument("no n values given".into()));
    };
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n values must be strictly ascending".into()));
    }
    let table = engine::build(statistic, structure, max_n, mode.resolve(max_n), budget)?;
    n_values.iter().map(|&n| summarize(&table, n)).collect()
}

/// One line of the published layout: L columns then S columns for one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperRow {
    pub n: u32,
    pub largest: Option<SummaryRow>,
    pub smallest: Option<SummaryRow>,
}

/// Pairs L and S series by `n`. Either side may be empty.
pub fn pair_rows(largest: Vec<SummaryRow>, smallest: Vec<SummaryRow>) -> Vec<PaperRow> {
    let mut ns: Vec<u32> = largest.iter().chain(&smallest).map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| PaperRow {
            n,
            largest: largest.iter().find(|r| r.n == n).cloned(),
            smallest: smallest.iter().find(|r| r.n == n).cloned(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

const MOMENT_DECIMALS: u32 = 6;
const MEDIAN_DECIMALS: u32 = 4;

fn columns(rows: &[PaperRow]) -> (bool, bool) {
    (
        rows.iter().any(|r| r.largest.is_some()),
        rows.iter().any(|r| r.smallest.is_some()),
    )
}

fn cells(row: &PaperRow, with_l: bool, with_s: bool) -> Vec<String> {
    let mut out = vec![row.n.to_string()];
    let undefined = |count: usize, out: &mut Vec<String>| {
        out.extend(std::iter::repeat("undefined".to_string()).take(count))
    };
    if with_l {
        match row.largest.as_ref().and_then(|r| r.stats.as_ref()) {
            Some(s) => {
                out.push(numfmt::fixed(&s.scaled.mean, MOMENT_DECIMALS));
                out.push(numfmt::fixed(&s.scaled.variance, MOMENT_DECIMALS));
                out.push(median_cell(s.tail_median, row.n));
            }
            None => undefined(3, &mut out),
        }
    }
    if with_s {
        match row.smallest.as_ref().and_then(|r| r.stats.as_ref()) {
            Some(s) => {
                out.push(numfmt::fixed(&s.scaled.mean, MOMENT_DECIMALS));
                out.push(numfmt::fixed(&s.scaled.second_moment, MOMENT_DECIMALS));
            }
            None => undefined(2, &mut out),
        }
    }
    out
}

/// `k/n` to four places, divided in single precision. Exact ties such as
/// 2421/4000 or 3145/4000 then round the way the published tables do:
/// the f32 quotient lands just above or below the tie.
pub fn median_cell(k: u32, n: u32) -> String {
    let v = k as f32 / n as f32;
    format!("{v:.*}", MEDIAN_DECIMALS as usize)
}

fn header(with_l: bool, with_s: bool) -> Vec<&'static str> {
    let mut h = vec!["n"];
    if with_l {
        h.extend(["L_mean/n", "L_var/n^2", "L_median/n"]);
    }
    if with_s {
        h.extend(["S_mean_scaled", "S_sqmean_scaled"]);
    }
    h
}

pub fn to_csv(rows: &[PaperRow]) -> String {
    let (with_l, with_s) = columns(rows);
    let mut out = header(with_l, with_s).join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&cells(row, with_l, with_s).join(","));
        out.push('\n');
    }
    out
}

pub fn to_markdown(rows: &[PaperRow]) -> String {
    let (with_l, with_s) = columns(rows);
    let head = header(with_l, with_s);
    let mut out = String::new();
    let _ = writeln!(out, "| {} |", head.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(head.len()));
    for row in rows {
        let _ = writeln!(out, "| {} |", cells(row, with_l, with_s).join(" | "));
    }
    out
}

pub fn render(rows: &[PaperRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Markdown => to_markdown(rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::build;

    fn exact(statistic: Statistic, structure: Structure, n: u32) -> CountTable {
        build(statistic, structure, n, Mode::Exact, ResourceBudget::default()).unwrap()
    }

    #[test]
    fn rounds_four_by_hand() {
        let t = exact(Statistic::Largest, Structure::Rounds, 4);
        let row = summarize_exact(&t, 4, &Integer::from(20)).unwrap();
        let s = row.stats.unwrap();
        let e = s.exact.as_ref().unwrap();
        assert_eq!(e.mean, Rational::from((14, 5)));
        assert_eq!(e.variance, Rational::from((24, 25)));
        assert_eq!(e.mass, 1);
        assert_eq!(s.median, 2);
        assert_eq!(s.tail_median, 1);
        assert!((s.mean.to_f64() - 2.8).abs() < 1e-15);
        assert!((s.variance.to_f64() - 0.96).abs() < 1e-15);
    }

    #[test]
    fn default_normalizer_is_row_sum() {
        let t = exact(Statistic::Largest, Structure::Rounds, 4);
        let a = summarize(&t, 4).unwrap();
        let b = summarize_exact(&t, 4, &Integer::from(20)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn colored_perms_use_successor_factorial() {
        let t = exact(Statistic::Largest, Structure::ColoredPerms, 6);
        let s = summarize(&t, 6).unwrap().stats.unwrap();
        assert_eq!(s.exact.unwrap().mass, 1);
    }

    #[test]
    fn ev_odd_rows_are_undefined() {
        let t = exact(Statistic::Largest, Structure::EvPerms, 9);
        let odd = summarize(&t, 9).unwrap();
        assert!(!odd.is_defined());
        assert!(summarize(&t, 8).unwrap().is_defined());
        let rows = table_series(
            Structure::EvPerms,
            Statistic::Smallest,
            &[998, 999],
            SeriesMode::Normalized { precision: 128 },
            ResourceBudget::default(),
        )
        .unwrap();
        assert!(rows[0].is_defined());
        assert!(!rows[1].is_defined());
    }

    #[test]
    fn median_brackets_half_the_mass() {
        for st in Structure::RECURSIVE {
            let t = exact(Statistic::Smallest, st, 30);
            for n in 1..=30 {
                let row = summarize(&t, n).unwrap();
                let Some(s) = row.stats else { continue };
                let total = t.exact_row_sum(n).unwrap();
                let norm = st.normalizer(n, total).unwrap();
                let below = t.exact_prefix(n).unwrap()[s.median as usize - 1].clone();
                let upto = t.exact_prefix(n).unwrap()[s.median as usize].clone();
                assert!(Integer::from(&below * 2u32) < norm, "{st} n = {n}");
                assert!(Integer::from(&upto * 2u32) >= norm, "{st} n = {n}");
            }
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let t = exact(Statistic::Largest, Structure::Rounds, 5);
        assert!(summarize(&t, 0).is_err());
        assert!(summarize(&t, 6).is_err());
        assert!(summarize_exact(&t, 5, &Integer::new()).is_err());
        let mode = SeriesMode::Exact;
        let budget = ResourceBudget::default();
        assert!(table_series(Structure::Rounds, Statistic::Largest, &[5, 4], mode, budget).is_err());
        assert!(table_series(Structure::Rounds, Statistic::Largest, &[], mode, budget).is_err());
    }

    #[test]
    fn auto_mode_threshold() {
        assert_eq!(SeriesMode::default().resolve(1000), Mode::Exact);
        assert!(matches!(
            SeriesMode::default().resolve(1001),
            Mode::Normalized { .. }
        ));
    }

    #[test]
    fn median_cells_round_like_the_tables() {
        assert_eq!(median_cell(602, 1000), "0.6020");
        assert_eq!(median_cell(2421, 4000), "0.6053");
        assert_eq!(median_cell(1793, 4000), "0.4482");
        assert_eq!(median_cell(3145, 4000), "0.7862");
        assert_eq!(median_cell(1, 1), "1.0000");
        assert_eq!(median_cell(784, 999), "0.7848");
    }

    #[test]
    fn emitters() {
        let l = table_series(
            Structure::Rounds,
            Statistic::Largest,
            &[9, 10],
            SeriesMode::Exact,
            ResourceBudget::default(),
        )
        .unwrap();
        let s = table_series(
            Structure::Rounds,
            Statistic::Smallest,
            &[9, 10],
            SeriesMode::Exact,
            ResourceBudget::default(),
        )
        .unwrap();
        let rows = pair_rows(l.clone(), s);
        let csv = to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "n,L_mean/n,L_var/n^2,L_median/n,S_mean_scaled,S_sqmean_scaled"
        );
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("9,"));
        assert_eq!(lines[1].split(',').count(), 6);
        assert!(!csv.contains('\r'));

        let md = render(&rows, OutputFormat::Markdown);
        assert!(md.starts_with("| n | L_mean/n |"));
        assert_eq!(md.lines().count(), 4);

        let only_l = to_csv(&pair_rows(l, Vec::new()));
        assert!(only_l.starts_with("n,L_mean/n,L_var/n^2,L_median/n\n"));
    }
}
