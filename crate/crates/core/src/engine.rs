//! Triangular tables of `L_{k,n}` (objects whose largest component has
//! exactly `k` nodes) and `S_{k,n}` (smallest component), built row by row
//! from the connected counts.
//!
//! Each row is stored as its cumulative sums `Σ_{i<=m} entry(i, n)`, which
//! is all the recursions ever read from earlier rows; entries are recovered
//! by differencing. In normalized mode a row holds `entry / n!`.

use std::fmt::Write as _;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Complete, Float, Integer};

use crate::catalog::{Statistic, Structure};
use crate::error::{Error, Result};
use crate::numfmt;

pub const DEFAULT_PRECISION: u32 = 192;

/// Arithmetic used to fill a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Arbitrary-precision integers.
    Exact,
    /// Floats with the given mantissa bits holding `entry / n!`.
    Normalized { precision: u32 },
}

impl Mode {
    pub fn normalized() -> Self {
        Mode::Normalized {
            precision: DEFAULT_PRECISION,
        }
    }
}

/// Memory ceiling checked before a table is allocated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceBudget {
    pub max_bytes: u64,
}

impl Default for ResourceBudget {
    fn default() -> Self {
        ResourceBudget {
            max_bytes: 3 << 30,
        }
    }
}

impl ResourceBudget {
    pub fn unlimited() -> Self {
        ResourceBudget {
            max_bytes: u64::MAX,
        }
    }
}

/// Rough size of a full table in bytes.
pub fn estimated_bytes(structure: Structure, max_n: u32, mode: Mode) -> u64 {
    // per-value overhead of the big number header and allocation
    const OVERHEAD: f64 = 48.0;
    let growth = match structure {
        Structure::ColoredMappings => (3.0 * std::f64::consts::E).log2(),
        _ => 1.0,
    };
    let mut total = 0.0;
    let mut log2_fact = 0.0;
    for n in 1..=max_n {
        log2_fact += f64::from(n).log2();
        let bits = match mode {
            Mode::Exact => log2_fact + growth * f64::from(n) + 64.0,
            Mode::Normalized { precision } => f64::from(precision),
        };
        total += f64::from(n + 1) * (bits / 8.0 + OVERHEAD);
    }
    total as u64
}

#[derive(Debug, Clone)]
enum Rows {
    Exact(Vec<Vec<Integer>>),
    Normalized { precision: u32, rows: Vec<Vec<Float>> },
}

/// One entry of a table.
#[derive(Debug, Clone, PartialEq)]
pub enum TableValue {
    Exact(Integer),
    /// The count divided by `n!`.
    Normalized(Float),
}

#[derive(Debug, Clone)]
pub struct CountTable {
    statistic: Statistic,
    structure: Structure,
    max_n: u32,
    rows: Rows,
}

impl CountTable {
    pub fn statistic(&self) -> Statistic {
        self.statistic
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn max_n(&self) -> u32 {
        self.max_n
    }

    pub fn mode(&self) -> Mode {
        match &self.rows {
            Rows::Exact(_) => Mode::Exact,
            Rows::Normalized { precision, .. } => Mode::Normalized {
                precision: *precision,
            },
        }
    }

    fn check(&self, k: u32, n: u32) {
        assert!(
            (1..=self.max_n).contains(&n) && (1..=n).contains(&k),
            "entry ({k}, {n}) outside table of size {}",
            self.max_n
        );
    }

    /// Cumulative sums of row `n` in exact mode: index `m` holds
    /// `Σ_{i=1}^{m} entry(i, n)`.
    pub fn exact_prefix(&self, n: u32) -> Option<&[Integer]> {
        match &self.rows {
            Rows::Exact(rows) => rows.get(n as usize).map(Vec::as_slice),
            Rows::Normalized { .. } => None,
        }
    }

    /// Cumulative sums of row `n` divided by `n!` in normalized mode.
    pub fn normalized_prefix(&self, n: u32) -> Option<&[Float]> {
        match &self.rows {
            Rows::Exact(_) => None,
            Rows::Normalized { rows, .. } => rows.get(n as usize).map(Vec::as_slice),
        }
    }

    pub fn entry(&self, k: u32, n: u32) -> TableValue {
        self.check(k, n);
        let (n, k) = (n as usize, k as usize);
        match &self.rows {
            Rows::Exact(rows) => TableValue::Exact((&rows[n][k] - &rows[n][k - 1]).complete()),
            Rows::Normalized { rows, .. } => {
                TableValue::Normalized(Float::with_val(rows[n][k].prec(), &rows[n][k] - &rows[n][k - 1]))
            }
        }
    }

    pub fn exact_entry(&self, k: u32, n: u32) -> Option<Integer> {
        match self.entry(k, n) {
            TableValue::Exact(v) => Some(v),
            TableValue::Normalized(_) => None,
        }
    }

    /// Entries `k = 1..=n` of row `n`, exact mode only.
    pub fn exact_row(&self, n: u32) -> Option<Vec<Integer>> {
        let prefix = self.exact_prefix(n)?;
        Some(prefix.windows(2).map(|w| (&w[1] - &w[0]).complete()).collect())
    }

    /// Entries of row `n` divided by `n!`, available in either mode.
    pub fn normalized_row(&self, n: u32, prec: u32) -> Vec<Float> {
        match &self.rows {
            Rows::Exact(rows) => {
                let fact = Integer::factorial(n).complete();
                rows[n as usize]
                    .windows(2)
                    .map(|w| {
                        let v = rug::Rational::from(((&w[1] - &w[0]).complete(), fact.clone()));
                        Float::with_val(prec, &v)
                    })
                    .collect()
            }
            Rows::Normalized { rows, .. } => rows[n as usize]
                .windows(2)
                .map(|w| Float::with_val(prec, &w[1] - &w[0]))
                .collect(),
        }
    }

    /// Σ_k entry(k, n) (exact mode).
    pub fn exact_row_sum(&self, n: u32) -> Option<&Integer> {
        self.exact_prefix(n).and_then(|p| p.last())
    }

    /// One line per entry: `statistic,structure,n,k,value`.
    /// Normalized values are printed with 30 significant digits.
    pub fn dump(&self, out: &mut String, n_values: Option<&[u32]>) {
        let all: Vec<u32> = (1..=self.max_n).collect();
        let ns = n_values.unwrap_or(&all);
        for &n in ns {
            if n == 0 || n > self.max_n {
                continue;
            }
            for k in 1..=n {
                let value = match self.entry(k, n) {
                    TableValue::Exact(v) => v.to_string(),
                    TableValue::Normalized(v) => numfmt::significant(&v, 30),
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    self.statistic, self.structure, n, k, value
                );
            }
        }
    }
}

/// Multinomial weights `n! c_k^j / (j! (k!)^j (n-kj)!)` for `j = 1..=n/k`,
/// built incrementally as `w_j = w_{j-1} * C(n-k(j-1), k) * c_k / j`.
fn exact_weights(n: u32, k: u32, c_k: &Integer) -> Vec<Integer> {
    let mut out = Vec::with_capacity((n / k) as usize);
    let mut w = Integer::from(1);
    for j in 1..=n / k {
        w *= Integer::binomial_u(n - k * (j - 1), k).complete();
        w *= c_k;
        w.div_exact_u_mut(j);
        out.push(w.clone());
    }
    out
}

/// `ρ^j / j!` for `j = 1..=count`, with `ρ = c_k / k!`.
fn normalized_weights(rho: &Float, count: u32) -> Vec<Float> {
    let mut out = Vec::with_capacity(count as usize);
    let mut w = Float::with_val(rho.prec(), 1);
    for j in 1..=count {
        w *= rho;
        w /= j;
        out.push(w.clone());
    }
    out
}

/// `ρ_k = c_k / k!`, the per-component weight used in normalized mode.
pub fn normalized_recursion_coefficient(structure: Structure, k: u32, prec: u32) -> Result<Float> {
    let c = structure.connected_count(k)?;
    let q = rug::Rational::from((c, Integer::factorial(k).complete()));
    Ok(Float::with_val(prec, &q))
}

fn prepare(structure: Structure, max_n: u32, mode: Mode, budget: ResourceBudget) -> Result<()> {
    structure.require_recursion("component recursion")?;
    if max_n == 0 {
        return Err(Error::InvalidArgument("table size must be positive".into()));
    }
    if let Mode::Normalized { precision } = mode {
        if precision < 64 {
            return Err(Error::InvalidArgument(format!(
                "precision must be at least 64 bits, got {precision}"
            )));
        }
    }
    let need = estimated_bytes(structure, max_n, mode);
    if need > budget.max_bytes {
        return Err(Error::ResourceLimit(format!(
            "{} table up to n = {max_n} needs about {} MiB, budget is {} MiB",
            structure,
            need >> 20,
            budget.max_bytes >> 20
        )));
    }
    Ok(())
}

fn exact_cumulative(entries: Vec<Integer>) -> Vec<Integer> {
    let mut prefix = Vec::with_capacity(entries.len() + 1);
    let mut acc = Integer::new();
    prefix.push(acc.clone());
    for e in entries {
        acc += e;
        prefix.push(acc.clone());
    }
    prefix
}

fn float_cumulative(entries: Vec<Float>, prec: u32) -> Vec<Float> {
    let mut prefix = Vec::with_capacity(entries.len() + 1);
    let mut acc = Float::new(prec);
    prefix.push(acc.clone());
    for e in entries {
        acc += e;
        prefix.push(acc.clone());
    }
    prefix
}

pub fn build_largest(structure: Structure, max_n: u32, mode: Mode) -> Result<CountTable> {
    build(Statistic::Largest, structure, max_n, mode, ResourceBudget::default())
}

pub fn build_smallest(structure: Structure, max_n: u32, mode: Mode) -> Result<CountTable> {
    build(Statistic::Smallest, structure, max_n, mode, ResourceBudget::default())
}

pub fn build(
    statistic: Statistic,
    structure: Structure,
    max_n: u32,
    mode: Mode,
    budget: ResourceBudget,
) -> Result<CountTable> {
    prepare(structure, max_n, mode, budget)?;
    let counts = structure.connected_counts(max_n)?;
    let rows = match (mode, statistic) {
        (Mode::Exact, Statistic::Largest) => Rows::Exact(exact_largest(&counts, max_n)),
        (Mode::Exact, Statistic::Smallest) => Rows::Exact(exact_smallest(&counts, max_n)),
        (Mode::Normalized { precision }, stat) => {
            let rho: Vec<Float> = counts
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let q = rug::Rational::from((c.clone(), Integer::factorial(k as u32).complete()));
                    Float::with_val(precision, &q)
                })
                .collect();
            let rows = match stat {
                Statistic::Largest => normalized_largest(&rho, max_n, precision),
                Statistic::Smallest => normalized_smallest(&rho, max_n, precision),
            };
            Rows::Normalized { precision, rows }
        }
    };
    Ok(CountTable {
        statistic,
        structure,
        max_n,
        rows,
    })
}

// L_{0,n} + L_{1,n}, the degenerate m = 0 branch.
fn exact_l01(c1: &Integer, n: u32) -> Integer {
    if n == 0 {
        Integer::from(1)
    } else {
        c1.clone().pow(n)
    }
}

fn exact_largest(counts: &[Integer], max_n: u32) -> Vec<Vec<Integer>> {
    let c1 = &counts[1];
    let mut rows: Vec<Vec<Integer>> = vec![vec![Integer::new()]];
    for n in 1..=max_n {
        let done = &rows;
        let tail: Vec<Integer> = (2..=n)
            .into_par_iter()
            .map(|k| {
                let c_k = &counts[k as usize];
                if *c_k == 0 {
                    return Integer::new();
                }
                let mut acc = Integer::new();
                for (j, w) in (1..).zip(exact_weights(n, k, c_k)) {
                    let rest = n - k * j;
                    let m = (k - 1).min(rest);
                    if m >= 1 {
                        acc += w * &done[rest as usize][m as usize];
                    } else {
                        acc += w * exact_l01(c1, rest);
                    }
                }
                acc
            })
            .collect();
        let mut entries = Vec::with_capacity(n as usize);
        entries.push(c1.clone().pow(n));
        entries.extend(tail);
        rows.push(exact_cumulative(entries));
    }
    rows
}

fn exact_smallest(counts: &[Integer], max_n: u32) -> Vec<Vec<Integer>> {
    let mut rows: Vec<Vec<Integer>> = vec![vec![Integer::new()]];
    for n in 1..=max_n {
        let done = &rows;
        let entries: Vec<Integer> = (1..=n)
            .into_par_iter()
            .map(|k| {
                let c_k = &counts[k as usize];
                if *c_k == 0 {
                    return Integer::new();
                }
                let weights = exact_weights(n, k, c_k);
                let mut acc = Integer::new();
                for (j, w) in (1..).zip(&weights) {
                    let rest = (n - k * j) as usize;
                    // Σ_{i=k+1}^{rest} S_{i,rest}
                    if rest > k as usize {
                        let row = &done[rest];
                        acc += w * (&row[rest] - &row[k as usize]).complete();
                    }
                }
                if n % k == 0 {
                    acc += &weights[(n / k - 1) as usize];
                }
                acc
            })
            .collect();
        rows.push(exact_cumulative(entries));
    }
    rows
}

fn normalized_largest(rho: &[Float], max_n: u32, prec: u32) -> Vec<Vec<Float>> {
    let mut rows: Vec<Vec<Float>> = vec![vec![Float::new(prec)]];
    // λ_{1,n} = c_1^n / n!
    let mut first = Float::with_val(prec, 1);
    for n in 1..=max_n {
        first *= &rho[1];
        first /= n;
        let done = &rows;
        let tail: Vec<Float> = (2..=n)
            .into_par_iter()
            .map(|k| {
                let r = &rho[k as usize];
                let mut acc = Float::new(prec);
                if r.is_zero() {
                    return acc;
                }
                for (j, w) in (1..).zip(normalized_weights(r, n / k)) {
                    let rest = n - k * j;
                    let m = (k - 1).min(rest);
                    if m >= 1 {
                        acc += &w * &done[rest as usize][m as usize];
                    } else {
                        // m = 0 only when rest = 0: λ_{0,0} + λ_{1,0} = 1
                        acc += w;
                    }
                }
                acc
            })
            .collect();
        let mut entries = Vec::with_capacity(n as usize);
        entries.push(first.clone());
        entries.extend(tail);
        rows.push(float_cumulative(entries, prec));
    }
    rows
}

fn normalized_smallest(rho: &[Float], max_n: u32, prec: u32) -> Vec<Vec<Float>> {
    let mut rows: Vec<Vec<Float>> = vec![vec![Float::new(prec)]];
    for n in 1..=max_n {
        let done = &rows;
        let entries: Vec<Float> = (1..=n)
            .into_par_iter()
            .map(|k| {
                let r = &rho[k as usize];
                let mut acc = Float::new(prec);
                if r.is_zero() {
                    return acc;
                }
                let weights = normalized_weights(r, n / k);
                for (j, w) in (1..).zip(&weights) {
                    let rest = (n - k * j) as usize;
                    if rest > k as usize {
                        let row = &done[rest];
                        let tail = Float::with_val(prec, &row[rest] - &row[k as usize]);
                        acc += w * &tail;
                    }
                }
                if n % k == 0 {
                    acc += &weights[(n / k - 1) as usize];
                }
                acc
            })
            .collect();
        rows.push(float_cumulative(entries, prec));
    }
    rows
}
