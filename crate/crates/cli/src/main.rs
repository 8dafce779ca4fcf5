use std::fmt::Write as _;
use std::io::{self, Write as _};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use explog::catalog::{ExpLogParam, Statistic, Structure};
use explog::constants::{self, ConstantResult, SmallestVariant};
use explog::engine::{self, Mode, ResourceBudget, DEFAULT_PRECISION};
use explog::oracle;
use explog::stats::{self, OutputFormat, SeriesMode, DEFAULT_EXACT_THRESHOLD};
use explog::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNKNOWN_STRUCTURE: u8 = 3;
const EXIT_RESOURCE: u8 = 4;
const EXIT_NUMERIC: u8 = 5;

const MIN_TOLERANCE: f64 = 1e-14;
// constants are printed with 20 decimals, so they are always computed at
// least this accurately
const PRINT_TOLERANCE: f64 = 1e-22;

/// Largest and smallest component statistics for exp-log labeled structures.
#[derive(Parser)]
#[command(name = "explog", version)]
struct Cli {
    /// Worker threads for table construction (default: all cores).
    #[arg(long, global = true, env = "EXPLOG_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scaled mean, variance and median rows in the published layout.
    Stats(StatsArgs),
    /// Limiting constants with error estimates.
    Constants(ConstantsArgs),
    /// Brute-force rows for small n.
    Oracle(OracleArgs),
    /// Raw table entries, one per line.
    Dump(DumpArgs),
}

#[derive(Args)]
struct StructureArg {
    /// Structure name, e.g. rounds or colored-mappings.
    #[arg(value_name = "STRUCTURE")]
    positional: Option<String>,

    #[arg(long = "structure", conflicts_with = "positional")]
    flag: Option<String>,
}

impl StructureArg {
    fn get(&self) -> Option<Result<Structure, Error>> {
        self.positional
            .as_deref()
            .or(self.flag.as_deref())
            .map(str::parse)
    }

    fn require(&self) -> Result<Structure, Error> {
        self.get()
            .unwrap_or_else(|| Err(Error::InvalidArgument("a structure is required".into())))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatChoice {
    #[value(name = "L")]
    L,
    #[value(name = "S")]
    S,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeChoice {
    Exact,
    Normalized,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatChoice {
    Csv,
    Markdown,
}

#[derive(Args)]
struct NumericArgs {
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeChoice,

    /// Mantissa bits for normalized tables.
    #[arg(long, default_value_t = DEFAULT_PRECISION, value_parser = clap::value_parser!(u32).range(64..))]
    precision_bits: u32,

    /// Largest n that `--mode auto` still computes exactly.
    #[arg(long, default_value_t = DEFAULT_EXACT_THRESHOLD)]
    exact_threshold: u32,

    /// Memory cap for one table, in MiB.
    #[arg(long, default_value_t = 3072)]
    max_memory_mib: u64,
}

impl NumericArgs {
    fn series_mode(&self) -> SeriesMode {
        match self.mode {
            ModeChoice::Exact => SeriesMode::Exact,
            ModeChoice::Normalized => SeriesMode::Normalized {
                precision: self.precision_bits,
            },
            ModeChoice::Auto => SeriesMode::Auto {
                threshold: self.exact_threshold,
                precision: self.precision_bits,
            },
        }
    }

    fn budget(&self) -> ResourceBudget {
        ResourceBudget {
            max_bytes: self.max_memory_mib.saturating_mul(1 << 20),
        }
    }
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    structure: StructureArg,

    /// Values of n: a list `1000,2000`, a range `100..200`, or `100..200:10`.
    #[arg(long, required = true)]
    n: String,

    #[arg(long = "stat", value_enum, default_value = "both")]
    stat: StatChoice,

    #[arg(long, value_enum, default_value = "csv")]
    format: FormatChoice,

    #[command(flatten)]
    numeric: NumericArgs,
}

#[derive(Args)]
struct ConstantsArgs {
    #[command(flatten)]
    structure: StructureArg,

    /// Largest acceptable absolute error (values are computed to at least 1e-22).
    #[arg(long, default_value_t = constants::DEFAULT_TOLERANCE)]
    tol: f64,

    /// Tabular output instead of `name = value` lines.
    #[arg(long, value_enum)]
    format: Option<FormatChoice>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    structure: StructureArg,

    #[arg(long, required = true)]
    n: String,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    structure: StructureArg,

    #[arg(long = "stat", value_enum, default_value = "both")]
    stat: StatChoice,

    /// Table size, or a list/range of rows to print (the table is built up to the largest).
    #[arg(long, required = true)]
    n: String,

    #[command(flatten)]
    numeric: NumericArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot start {threads} threads: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    }

    let result = match &cli.command {
        Command::Stats(args) => stats_command(args),
        Command::Constants(args) => constants_command(args),
        Command::Oracle(args) => oracle_command(args),
        Command::Dump(args) => dump_command(args),
    };
    match result {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|()| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_FAILURE);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnknownStructure(_) => EXIT_UNKNOWN_STRUCTURE,
        Error::ResourceLimit(_) => EXIT_RESOURCE,
        Error::Quadrature { .. } | Error::RootFinding(_) => EXIT_NUMERIC,
        Error::InvalidArgument(_) | Error::Unsupported(..) => EXIT_USAGE,
    }
}

/// Parses `a,b,c`, `a..b` and `a..b:step` (ranges inclusive), sorted and
/// deduplicated.
fn parse_n_values(spec: &str) -> Result<Vec<u32>, Error> {
    let bad = || Error::InvalidArgument(format!("cannot read n values from `{spec}`"));
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim) {
        if let Some((lo, rest)) = item.split_once("..") {
            let (hi, step) = match rest.split_once(':') {
                Some((hi, step)) => (hi, step.parse::<u32>().map_err(|_| bad())?),
                None => (rest, 1),
            };
            let lo: u32 = lo.parse().map_err(|_| bad())?;
            let hi: u32 = hi.trim_start_matches('=').parse().map_err(|_| bad())?;
            if step == 0 || lo > hi {
                return Err(bad());
            }
            out.extend((lo..=hi).step_by(step as usize));
        } else {
            out.push(item.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() || out.contains(&0) {
        return Err(Error::InvalidArgument("n values must be positive".into()));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn statistics(choice: StatChoice) -> Vec<Statistic> {
    match choice {
        StatChoice::L => vec![Statistic::Largest],
        StatChoice::S => vec![Statistic::Smallest],
        StatChoice::Both => vec![Statistic::Largest, Statistic::Smallest],
    }
}

fn stats_command(args: &StatsArgs) -> Result<String, Error> {
    let structure = args.structure.require()?;
    structure
        .exp_log_param()
        .ok_or(Error::Unsupported("stats", structure.name()))?;
    let mut ns = parse_n_values(&args.n)?;
    if structure == Structure::EvPerms {
        let (odd, even): (Vec<u32>, Vec<u32>) = ns.iter().partition(|&&n| n % 2 == 1);
        if !odd.is_empty() {
            let list: Vec<String> = odd.iter().map(u32::to_string).collect();
            eprintln!("note: ev-perms has no objects at odd n; skipping {}", list.join(","));
        }
        ns = even;
        if ns.is_empty() {
            return Err(Error::InvalidArgument("no even n requested for ev-perms".into()));
        }
    }
    let mode = args.numeric.series_mode();
    let budget = args.numeric.budget();
    let series = |stat| stats::table_series(structure, stat, &ns, mode, budget);
    let (largest, smallest) = match args.stat {
        StatChoice::L => (series(Statistic::Largest)?, Vec::new()),
        StatChoice::S => (Vec::new(), series(Statistic::Smallest)?),
        StatChoice::Both => {
            let (l, s) = rayon::join(|| series(Statistic::Largest), || series(Statistic::Smallest));
            (l?, s?)
        }
    };
    let format = match args.format {
        FormatChoice::Csv => OutputFormat::Csv,
        FormatChoice::Markdown => OutputFormat::Markdown,
    };
    Ok(stats::render(&stats::pair_rows(largest, smallest), format))
}

fn check_tolerance(tol: f64) -> Result<(), Error> {
    if tol.is_finite() && (MIN_TOLERANCE..1.0).contains(&tol) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "--tol must lie in [{MIN_TOLERANCE:e}, 1), got {tol}"
        )))
    }
}

/// The constants that do not depend on a structure.
fn general_constants(tol: f64) -> Result<Vec<ConstantResult>, Error> {
    let params = [
        ExpLogParam::HALF,
        ExpLogParam::ONE,
        ExpLogParam::THREE_HALVES,
        ExpLogParam::TWO,
    ];
    let mut jobs: Vec<Box<dyn Fn() -> explog::Result<ConstantResult> + Send + Sync>> = Vec::new();
    for a in params {
        jobs.push(Box::new(move || constants::g_largest(a, 1, 1, tol)));
        jobs.push(Box::new(move || constants::largest_variance_limit(a, 1, tol)));
        jobs.push(Box::new(move || constants::median_limit(a, tol)));
    }
    let three_halves = ExpLogParam::THREE_HALVES;
    jobs.push(Box::new(move || constants::g_largest(three_halves, 2, 1, tol)));
    jobs.push(Box::new(move || constants::largest_variance_limit(three_halves, 2, tol)));
    for variant in [SmallestVariant::Permutation, SmallestVariant::Derangement] {
        jobs.push(Box::new(move || constants::g_smallest(variant, 1, 1, tol)));
        jobs.push(Box::new(move || constants::g_smallest(variant, 1, 2, tol)));
    }
    use rayon::prelude::*;
    jobs.par_iter().map(|job| job()).collect()
}

fn constants_command(args: &ConstantsArgs) -> Result<String, Error> {
    check_tolerance(args.tol)?;
    let tol = args.tol.min(PRINT_TOLERANCE);
    let results = match args.structure.get() {
        Some(structure) => constants::limit_summary(structure?, tol)?,
        None => general_constants(tol)?,
    };
    let digits = ConstantResult::digits;
    let mut out = String::new();
    match args.format {
        None => {
            for c in &results {
                let _ = writeln!(out, "{}", c.report_line());
            }
        }
        Some(FormatChoice::Csv) => {
            out.push_str("name,value,error_estimate,method,limit_of\n");
            for c in &results {
                let _ = writeln!(
                    out,
                    "\"{}\",{},{:.1e},{},\"{}\"",
                    c.name,
                    digits(c),
                    c.error_estimate,
                    c.method,
                    c.limit_of.as_deref().unwrap_or("")
                );
            }
        }
        Some(FormatChoice::Markdown) => {
            out.push_str("| name | value | error | method | limit of |\n|---|---|---|---|---|\n");
            for c in &results {
                let _ = writeln!(
                    out,
                    "| {} | {} | {:.1e} | {} | {} |",
                    c.name,
                    digits(c),
                    c.error_estimate,
                    c.method,
                    c.limit_of.as_deref().unwrap_or("")
                );
            }
        }
    }
    Ok(out)
}

fn oracle_command(args: &OracleArgs) -> Result<String, Error> {
    let structure = args.structure.require()?;
    let ns = parse_n_values(&args.n)?;
    let mut out = String::new();
    for &n in &ns {
        let (l, s) = if structure == Structure::SquarePerms {
            oracle::square_rows(n)?
        } else {
            oracle::oracle_rows(structure, n)?
        };
        if ns.len() > 1 {
            let _ = write!(out, "n={n}  ");
        }
        let _ = writeln!(out, "L: {}  S: {}", l.brace_list(), s.brace_list());
    }
    Ok(out)
}

fn dump_command(args: &DumpArgs) -> Result<String, Error> {
    let structure = args.structure.require()?;
    let ns = parse_n_values(&args.n)?;
    let max_n = *ns.last().expect("nonempty");
    let rows = (ns.len() > 1).then_some(ns.as_slice());
    let mode: Mode = args.numeric.series_mode().resolve(max_n);
    let mut out = String::new();
    for stat in statistics(args.stat) {
        let table = engine::build(stat, structure, max_n, mode, args.numeric.budget())?;
        table.dump(&mut out, rows);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_value_syntax() {
        assert_eq!(parse_n_values("1000").unwrap(), [1000]);
        assert_eq!(parse_n_values("3,1,2,3").unwrap(), [1, 2, 3]);
        assert_eq!(parse_n_values("5..8").unwrap(), [5, 6, 7, 8]);
        assert_eq!(parse_n_values("10..=30:10,1").unwrap(), [1, 10, 20, 30]);
        for bad in ["", "0", "x", "5..3", "1..4:0", "1,,2"] {
            assert!(parse_n_values(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            exit_code(&Error::UnknownStructure("x".into())),
            exit_code(&Error::ResourceLimit("x".into())),
            exit_code(&Error::RootFinding("x".into())),
            exit_code(&Error::InvalidArgument("x".into())),
        ];
        let mut sorted = codes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), codes.len());
    }

    #[test]
    fn tolerance_floor() {
        assert!(check_tolerance(1e-14).is_ok());
        assert!(check_tolerance(1e-15).is_err());
        assert!(check_tolerance(f64::NAN).is_err());
    }
}
