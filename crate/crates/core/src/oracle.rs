//! Brute-force rows for small `n`, computed from cycle types and integer
//! partitions without touching the component recursions.

use std::collections::HashSet;
use std::fmt;

use itertools::Itertools;
use rug::ops::Pow;
use rug::{Complete, Integer, Rational};

use crate::catalog::{Statistic, Structure};
use crate::error::{Error, Result};

pub const MAX_ORACLE_N: u32 = 9;
pub const MAX_SQUARE_N: u32 = 12;
pub const MAX_SQUARING_N: u32 = 7;

/// A multiset of part sizes, kept in descending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycleType {
    parts: Vec<u32>,
}

impl CycleType {
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::InvalidArgument(
                "a cycle type needs at least one positive part".into(),
            ));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(CycleType { parts })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn total(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn largest(&self) -> u32 {
        self.parts[0]
    }

    pub fn smallest(&self) -> u32 {
        *self.parts.last().unwrap()
    }

    /// `(length, multiplicity)` pairs, longest first.
    pub fn multiplicities(&self) -> Vec<(u32, u32)> {
        self.parts
            .iter()
            .dedup_with_count()
            .map(|(m, &len)| (len, m as u32))
            .collect()
    }

    /// Number of permutations of `total()` points with this cycle type.
    pub fn permutation_count(&self) -> Integer {
        let mut denom = Integer::from(1);
        for (len, m) in self.multiplicities() {
            denom *= Integer::from(len).pow(m);
            denom *= Integer::factorial(m).complete();
        }
        Integer::factorial(self.total()).complete() / denom
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.parts.iter().join(","))
    }
}

/// All partitions of `n`, lexicographically descending: `[n]` first,
/// `[1, 1, ..., 1]` last.
pub fn partitions(n: u32) -> Vec<CycleType> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut current = vec![n];
    loop {
        out.push(CycleType {
            parts: current.clone(),
        });
        // drop trailing ones, decrement the last larger part and refill
        let ones = current.iter().rev().take_while(|&&p| p == 1).count() as u32;
        current.truncate(current.len() - ones as usize);
        let Some(last) = current.pop() else {
            break;
        };
        let part = last - 1;
        let mut rest = ones + 1 + part;
        while rest > 0 {
            let p = part.min(rest);
            current.push(p);
            rest -= p;
        }
    }
    out
}

/// A permutation is a square iff each even cycle length occurs an even
/// number of times.
pub fn is_square_type(t: &CycleType) -> bool {
    t.multiplicities()
        .iter()
        .all(|&(len, m)| len % 2 == 1 || m % 2 == 0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleRow {
    pub statistic: Statistic,
    pub structure: Structure,
    pub n: u32,
    /// Index `k - 1` holds the count for size `k`.
    pub values: Vec<Integer>,
}

impl OracleRow {
    fn zeros(statistic: Statistic, structure: Structure, n: u32) -> Self {
        OracleRow {
            statistic,
            structure,
            n,
            values: vec![Integer::new(); n as usize],
        }
    }

    pub fn total(&self) -> Integer {
        self.values.iter().sum()
    }

    /// `{v1,v2,...}` with trailing zeros dropped.
    pub fn brace_list(&self) -> String {
        let end = self
            .values
            .iter()
            .rposition(|v| *v != 0)
            .map_or(0, |i| i + 1);
        format!("{{{}}}", self.values[..end].iter().join(","))
    }
}

/// L and S rows from the exponential formula: a partition with `m_k`
/// parts of size `k` accounts for `n! Π (c_k/k!)^{m_k} / m_k!` objects.
pub fn oracle_rows(structure: Structure, n: u32) -> Result<(OracleRow, OracleRow)> {
    structure.require_recursion("oracle_rows")?;
    if n == 0 || n > MAX_ORACLE_N {
        return Err(Error::InvalidArgument(format!(
            "oracle rows need 1 <= n <= {MAX_ORACLE_N}, got {n}"
        )));
    }
    let weights: Vec<Rational> = (1..=n)
        .map(|k| {
            let c = structure.connected_count(k)?;
            Ok(Rational::from((c, Integer::factorial(k).complete())))
        })
        .collect::<Result<_>>()?;
    let n_fact = Integer::factorial(n).complete();

    let mut largest = OracleRow::zeros(Statistic::Largest, structure, n);
    let mut smallest = OracleRow::zeros(Statistic::Smallest, structure, n);
    for t in partitions(n) {
        let mut count = Rational::from(&n_fact);
        for (len, m) in t.multiplicities() {
            count *= weights[len as usize - 1].clone().pow(m as i32);
            count /= Integer::factorial(m).complete();
        }
        if count == 0 {
            continue;
        }
        let (num, den) = count.into_numer_denom();
        assert_eq!(den, 1, "non-integral count for {t}");
        largest.values[t.largest() as usize - 1] += &num;
        smallest.values[t.smallest() as usize - 1] += num;
    }
    Ok((largest, smallest))
}

/// L and S rows for square permutations by filtering cycle types.
pub fn square_rows(n: u32) -> Result<(OracleRow, OracleRow)> {
    if n == 0 || n > MAX_SQUARE_N {
        return Err(Error::InvalidArgument(format!(
            "square rows need 1 <= n <= {MAX_SQUARE_N}, got {n}"
        )));
    }
    let st = Structure::SquarePerms;
    let mut largest = OracleRow::zeros(Statistic::Largest, st, n);
    let mut smallest = OracleRow::zeros(Statistic::Smallest, st, n);
    for t in partitions(n).into_iter().filter(is_square_type) {
        let count = t.permutation_count();
        largest.values[t.largest() as usize - 1] += &count;
        smallest.values[t.smallest() as usize - 1] += count;
    }
    Ok((largest, smallest))
}

/// Number of distinct `q∘q` over all permutations `q` of `n` points.
pub fn square_count_by_squaring(n: u32) -> Result<u64> {
    if n == 0 || n > MAX_SQUARING_N {
        return Err(Error::InvalidArgument(format!(
            "squaring enumeration needs 1 <= n <= {MAX_SQUARING_N}, got {n}"
        )));
    }
    let n = n as usize;
    let squares: HashSet<Vec<usize>> = (0..n)
        .permutations(n)
        .map(|q| q.iter().map(|&i| q[i]).collect())
        .collect();
    Ok(squares.len() as u64)
}
