//! The structure families: connected counts, normalizers and the scalings
//! applied to the finite-n statistics.

use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Complete, Float, Integer};

use crate::error::{Error, Result};

/// Which extreme component size a table or statistic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistic {
    Largest,
    Smallest,
}

impl Statistic {
    pub fn symbol(self) -> &'static str {
        match self {
            Statistic::Largest => "L",
            Statistic::Smallest => "S",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" | "l" | "largest" => Ok(Statistic::Largest),
            "S" | "s" | "smallest" => Ok(Statistic::Smallest),
            other => Err(Error::InvalidArgument(format!("unknown statistic `{other}`"))),
        }
    }
}

/// Exp-log parameter `a`, kept as a reduced positive fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExpLogParam {
    num: u32,
    den: u32,
}

impl ExpLogParam {
    pub const HALF: ExpLogParam = ExpLogParam { num: 1, den: 2 };
    pub const ONE: ExpLogParam = ExpLogParam { num: 1, den: 1 };
    pub const THREE_HALVES: ExpLogParam = ExpLogParam { num: 3, den: 2 };
    pub const TWO: ExpLogParam = ExpLogParam { num: 2, den: 1 };

    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidArgument(format!(
                "exp-log parameter must be positive, got {num}/{den}"
            )));
        }
        let g = gcd(num, den);
        Ok(ExpLogParam {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numer(self) -> u32 {
        self.num
    }

    pub fn denom(self) -> u32 {
        self.den
    }

    pub fn to_float(self, prec: u32) -> Float {
        Float::with_val(prec, self.num) / self.den
    }
}

impl fmt::Display for ExpLogParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for ExpLogParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse exp-log parameter `{s}`"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n = n.trim().parse().map_err(|_| bad())?;
                let d = d.trim().parse().map_err(|_| bad())?;
                ExpLogParam::new(n, d)
            }
            None => ExpLogParam::new(s.trim().parse().map_err(|_| bad())?, 1),
        }
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// How the counts of a row are turned into probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizerRule {
    SumOfRow,
    /// Divide by `(n+1)!`.
    SuccessorFactorial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Structure {
    /// Rounds of children: a directed ring with one child inside.
    Rounds,
    /// Rounds whose outer ring has at least two children.
    RoundsVariant,
    /// Permutations with each cycle painted one of two colors.
    ColoredPerms,
    /// Two-colored permutations without fixed points.
    ColoredDerangements,
    /// Mappings with each component painted one of three colors.
    ColoredMappings,
    /// Permutations whose cycles all have even length.
    EvPerms,
    /// Permutations whose cycles all have odd length.
    OdPerms,
    /// Permutations that are squares of some permutation.
    SquarePerms,
}

impl Structure {
    pub const ALL: [Structure; 8] = [
        Structure::Rounds,
        Structure::RoundsVariant,
        Structure::ColoredPerms,
        Structure::ColoredDerangements,
        Structure::ColoredMappings,
        Structure::EvPerms,
        Structure::OdPerms,
        Structure::SquarePerms,
    ];

    /// Every family the component recursions can handle.
    pub const RECURSIVE: [Structure; 7] = [
        Structure::Rounds,
        Structure::RoundsVariant,
        Structure::ColoredPerms,
        Structure::ColoredDerangements,
        Structure::ColoredMappings,
        Structure::EvPerms,
        Structure::OdPerms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Structure::Rounds => "rounds",
            Structure::RoundsVariant => "rounds-variant",
            Structure::ColoredPerms => "colored-perms",
            Structure::ColoredDerangements => "colored-derangements",
            Structure::ColoredMappings => "colored-mappings",
            Structure::EvPerms => "ev-perms",
            Structure::OdPerms => "od-perms",
            Structure::SquarePerms => "square-perms",
        }
    }

    /// `None` for square permutations, whose parameter is not known.
    pub fn exp_log_param(self) -> Option<ExpLogParam> {
        match self {
            Structure::Rounds | Structure::RoundsVariant => Some(ExpLogParam::ONE),
            Structure::ColoredPerms | Structure::ColoredDerangements => Some(ExpLogParam::TWO),
            Structure::ColoredMappings => Some(ExpLogParam::THREE_HALVES),
            Structure::EvPerms | Structure::OdPerms => Some(ExpLogParam::HALF),
            Structure::SquarePerms => None,
        }
    }

    pub fn normalizer_rule(self) -> NormalizerRule {
        match self {
            Structure::ColoredPerms => NormalizerRule::SuccessorFactorial,
            _ => NormalizerRule::SumOfRow,
        }
    }

    /// Square permutations are constrained on cycle multiplicities, which
    /// connected counts alone cannot express.
    pub fn recursion_supported(self) -> bool {
        self != Structure::SquarePerms
    }

    pub(crate) fn require_recursion(self, what: &'static str) -> Result<()> {
        if self.recursion_supported() {
            Ok(())
        } else {
            Err(Error::Unsupported(what, self.name()))
        }
    }

    /// Number of connected `k`-node objects.
    pub fn connected_count(self, k: u32) -> Result<Integer> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "connected counts are defined for k >= 1".into(),
            ));
        }
        self.require_recursion("connected_count")?;
        let fact = |m: u32| Integer::factorial(m).complete();
        let count = match self {
            // one inside child, the rest on a directed ring: k * (k-2)!
            Structure::Rounds if k >= 2 => fact(k - 1) + fact(k - 2),
            Structure::RoundsVariant if k >= 3 => fact(k - 1) + fact(k - 2),
            Structure::Rounds | Structure::RoundsVariant => Integer::new(),
            Structure::ColoredPerms => fact(k - 1) * 2u32,
            Structure::ColoredDerangements if k >= 2 => fact(k - 1) * 2u32,
            Structure::ColoredDerangements => Integer::new(),
            Structure::ColoredMappings => connected_mappings(k) * 3u32,
            Structure::EvPerms if k % 2 == 0 => fact(k - 1),
            Structure::OdPerms if k % 2 == 1 => fact(k - 1),
            Structure::EvPerms | Structure::OdPerms => Integer::new(),
            Structure::SquarePerms => unreachable!(),
        };
        Ok(count)
    }

    /// Connected counts `c_1..=c_n` (index 0 holds zero).
    pub fn connected_counts(self, n: u32) -> Result<Vec<Integer>> {
        self.require_recursion("connected_counts")?;
        let mut out = Vec::with_capacity(n as usize + 1);
        out.push(Integer::new());
        for k in 1..=n {
            out.push(self.connected_count(k)?);
        }
        Ok(out)
    }

    /// Total number of `n`-objects used to turn a row into probabilities.
    ///
    /// An all-zero row (even-cycle permutations at odd `n`) gets
    /// normalizer 1; its statistics are reported as undefined.
    pub fn normalizer(self, n: u32, row_sum: &Integer) -> Result<Integer> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if *row_sum < 0 {
            return Err(Error::InvalidArgument("row sum must be nonnegative".into()));
        }
        Ok(match self.normalizer_rule() {
            NormalizerRule::SuccessorFactorial => Integer::factorial(n + 1).complete(),
            NormalizerRule::SumOfRow if *row_sum == 0 => Integer::from(1),
            NormalizerRule::SumOfRow => row_sum.clone(),
        })
    }

    /// Divisors turning mean, variance and median into the table columns.
    pub fn scaling_divisors(self, stat: Statistic, n: u32, prec: u32) -> Result<ScalingDivisors> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let a = self
            .exp_log_param()
            .ok_or(Error::Unsupported("scaling_divisors", self.name()))?;
        let nf = Float::with_val(prec, n);
        let one = Float::with_val(prec, 1);
        Ok(match stat {
            Statistic::Largest => ScalingDivisors {
                mean: nf.clone(),
                variance: nf.clone().square(),
                median: Some(nf),
            },
            Statistic::Smallest => {
                let sqrt = nf.clone().sqrt();
                let ln = nf.clone().ln();
                let (mean, variance) = match (a.numer(), a.denom()) {
                    (1, 2) => (sqrt.clone(), nf * sqrt),
                    (1, 1) => (ln, nf),
                    (3, 2) => (one, sqrt),
                    (2, 1) => (one, ln),
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "no smallest-component scaling for a = {a}"
                        )))
                    }
                };
                ScalingDivisors {
                    mean,
                    variance,
                    median: None,
                }
            }
        })
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Structure::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::UnknownStructure(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingDivisors {
    pub mean: Float,
    pub variance: Float,
    /// The smallest-component median is not scaled (it is 1 for n > 5).
    pub median: Option<Float>,
}

/// Connected mappings on `n` nodes: `sum_j (n-1)!/(n-j)! * n^(n-j)`.
fn connected_mappings(n: u32) -> Integer {
    let mut total = Integer::new();
    // falling(n-1, j-1), updated as j grows
    let mut falling = Integer::from(1);
    for j in 1..=n {
        if j > 1 {
            falling *= n - j + 1;
        }
        total += &falling * Integer::from(n).pow(n - j);
    }
    total
}
