//! The `binpack` command line.
//!
//! Exit codes: 0 success or feasible, 1 infeasible, 2 usage error,
//! 3 I/O or parse error, 4 remote error.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::checker;
use crate::io::{self, Format, GeneratorSpec, IoError, SolutionDocument};
use crate::model::{Dimensionality, Instance, ObjectiveWeights};
use crate::solver::{
    solve_anneal, solve_exact_1d, solve_exact_small, solve_remote, Backend, SolverBudget,
    SolverError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_REMOTE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "binpack",
    version,
    about = "Model, solve, check and draw bin packing instances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic instance.
    Gen(GenArgs),
    /// Solve an instance and write a solution document.
    Solve(SolveArgs),
    /// Check a solution document against its instance.
    Check {
        solution: PathBuf,
        instance: PathBuf,
    },
    /// Draw a solution document as SVG.
    Render {
        solution: PathBuf,
        instance: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Convert an instance between the text and JSON formats.
    Convert {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(short = 'd', long, default_value_t = 3)]
    dimensionality: u8,
    #[arg(short = 'm', long, default_value_t = 51)]
    items: usize,
    #[arg(short = 'n', long, default_value_t = 2)]
    bins: usize,
    #[arg(long, default_value_t = 10)]
    categories: u32,
    /// Bin dimension range `lo..hi` (inclusive).
    #[arg(long, default_value = "900..1200", value_parser = parse_range)]
    bin_dims: (u64, u64),
    #[arg(long, default_value = "100..400", value_parser = parse_range)]
    item_dims: (u64, u64),
    #[arg(long, default_value = "1..50", value_parser = parse_range)]
    weights: (u64, u64),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    capacities: bool,
    #[arg(long)]
    associations: bool,
    #[arg(long)]
    priority: bool,
    #[arg(long)]
    incompatibility: bool,
    #[arg(long)]
    load_bearing: bool,
    #[arg(long)]
    center_of_mass: bool,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SolveArgs {
    input: PathBuf,
    #[arg(long, default_value = "anneal")]
    backend: Backend,
    /// Seconds.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<u64>,
    /// Ignore wall-clock limits and omit timings; requires --seed.
    #[arg(long, requires = "seed")]
    deterministic: bool,
    #[arg(long)]
    endpoint: Option<String>,
    /// Objective weights `c_bins,c_push,c_com`.
    #[arg(long, value_parser = parse_weights)]
    weights: Option<ObjectiveWeights>,
    /// Also draw the solution.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Defaults to the input path with a `.sol.json` extension.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected `lo..hi`")?;
    let lo = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad upper bound `{hi}`"))?;
    if lo > hi {
        return Err("empty range".into());
    }
    Ok((lo, hi))
}

fn parse_weights(s: &str) -> Result<ObjectiveWeights, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad weight `{p}`"))
        })
        .collect::<Result<_, _>>()?;
    let [bins, push, com] = parts[..] else {
        return Err("expected three comma separated weights".into());
    };
    Ok(ObjectiveWeights { bins, push, com })
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl ToString) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = match e {
            IoError::Generator(_) => EXIT_USAGE,
            _ => EXIT_IO,
        };
        Failure::new(code, e)
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        use crate::builder::BuildError;
        let code = match &e {
            SolverError::Remote(_) => EXIT_REMOTE,
            SolverError::Budget(_)
            | SolverError::Dimensionality { .. }
            | SolverError::TooLarge(_)
            | SolverError::Build(BuildError::DegenerateObjective) => EXIT_USAGE,
            _ => EXIT_INFEASIBLE,
        };
        Failure::new(code, e)
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Gen(args) => generate(args),
        Command::Solve(args) => solve(args),
        Command::Check { solution, instance } => {
            let inst = io::read_instance_file(&instance)?;
            let sol = io::read_solution(&read(&solution)?, &inst)?;
            let report = checker::check(&inst, &sol).map_err(|e| Failure::new(EXIT_IO, e))?;
            say(&serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(if report.feasible {
                EXIT_OK
            } else {
                EXIT_INFEASIBLE
            })
        }
        Command::Render {
            solution,
            instance,
            output,
        } => {
            let inst = io::read_instance_file(&instance)?;
            let sol = io::read_solution(&read(&solution)?, &inst)?;
            write(&output, &io::render_svg(&inst, &sol))?;
            Ok(EXIT_OK)
        }
        Command::Convert { input, output } => {
            let inst = io::read_instance_file(&input)?;
            write(
                &output,
                &io::write_instance(&inst, Format::from_path(&output)),
            )?;
            Ok(EXIT_OK)
        }
    }
}

/// Prints a line, ignoring a closed stdout such as a pipe into `head`.
fn say(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn to_u32(range: (u64, u64), name: &str) -> Result<std::ops::RangeInclusive<u32>, Failure> {
    let conv = |v: u64| {
        u32::try_from(v).map_err(|_| Failure::new(EXIT_USAGE, format!("{name} out of range")))
    };
    Ok(conv(range.0)?..=conv(range.1)?)
}

fn generate(args: GenArgs) -> Result<i32, Failure> {
    let spec = GeneratorSpec {
        dimensionality: args.dimensionality,
        items: args.items,
        bins: args.bins,
        categories: args.categories,
        bin_dims: to_u32(args.bin_dims, "--bin-dims")?,
        item_dims: to_u32(args.item_dims, "--item-dims")?,
        weights: args.weights.0..=args.weights.1,
        features: io::generate::Features {
            capacities: args.capacities,
            associations: args.associations,
            priority: args.priority,
            incompatibility: args.incompatibility,
            load_bearing: args.load_bearing,
            center_of_mass: args.center_of_mass,
        },
    };
    let inst = io::generate_instance(&spec, args.seed).map_err(|e| match e {
        IoError::Semantic(e) => Failure::new(EXIT_USAGE, e),
        e => e.into(),
    })?;
    write(
        &args.output,
        &io::write_instance(&inst, Format::from_path(&args.output)),
    )?;
    Ok(EXIT_OK)
}

fn default_output(input: &Path) -> PathBuf {
    let name = input
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("instance");
    let stem = name
        .strip_suffix(".bpp.json")
        .or_else(|| name.strip_suffix(".bpp.txt"))
        .or_else(|| name.rsplit_once('.').map(|(s, _)| s))
        .unwrap_or(name);
    input.with_file_name(format!("{stem}.sol.json"))
}

fn solve(args: SolveArgs) -> Result<i32, Failure> {
    if !(args.time_limit.is_finite() && args.time_limit > 0.0) {
        return Err(Failure::new(EXIT_USAGE, "--time-limit must be positive"));
    }
    let mut inst: Instance = io::read_instance_file(&args.input)?;
    if let Some(w) = args.weights {
        inst = inst
            .with_weights(w)
            .map_err(|e| Failure::new(EXIT_USAGE, e))?;
    }
    if args.backend == Backend::Exact1d && inst.dimensionality() != Dimensionality::One {
        return Err(Failure::new(
            EXIT_USAGE,
            format!(
                "exact1d needs a 1d instance, input has d={}",
                inst.dimensionality()
            ),
        ));
    }
    let mut budget = SolverBudget {
        time_limit: Duration::from_secs_f64(args.time_limit),
        restarts: args.restarts,
        seed: args.seed.unwrap_or(0),
        deterministic: args.deterministic,
        ..SolverBudget::default()
    };
    if let Some(it) = args.max_iter {
        budget.max_iterations = it;
    } else if args.backend != Backend::Anneal {
        budget.max_iterations = 50_000_000;
    }
    let result = match args.backend {
        Backend::Anneal => solve_anneal(&inst, &budget)?,
        Backend::Exact1d => solve_exact_1d(&inst, &budget)?,
        Backend::ExactSmall => solve_exact_small(&inst, &budget)?,
        Backend::Remote => {
            let endpoint = args.endpoint.as_deref().ok_or_else(|| {
                Failure::new(EXIT_USAGE, "--endpoint is required for the remote backend")
            })?;
            solve_remote(&inst, &budget, endpoint)?
        }
    };
    let mut doc = SolutionDocument::new(&inst, &result);
    if args.deterministic {
        doc = doc.without_timing();
    }
    let output = args.output.unwrap_or_else(|| default_output(&args.input));
    write(&output, &doc.to_bytes())?;
    if let (Some(path), Some(best)) = (&args.svg, &result.best) {
        write(path, &io::render_svg(&inst, best))?;
    }
    match (&doc.metrics, doc.objective) {
        (Some(m), Some(obj)) => say(&format!(
            "{}: feasible={} bins_used={} objective={obj:.6} -> {}",
            doc.backend,
            doc.feasible,
            m.bins_used,
            output.display()
        )),
        _ => say(&format!(
            "{}: no solution -> {}",
            doc.backend,
            output.display()
        )),
    }
    Ok(if result.feasible {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_parse() {
        let w = parse_weights("100, 1,0.5").unwrap();
        assert_eq!((w.bins, w.push, w.com), (100.0, 1.0, 0.5));
        assert!(parse_weights("1,2").is_err());
    }

    #[test]
    fn ranges_parse() {
        assert_eq!(parse_range("3..7").unwrap(), (3, 7));
        assert!(parse_range("7..3").is_err());
        assert!(parse_range("7").is_err());
    }

    #[test]
    fn output_name() {
        assert_eq!(
            default_output(Path::new("a/b.bpp.json")),
            PathBuf::from("a/b.sol.json")
        );
        assert_eq!(
            default_output(Path::new("b.bpp.txt")),
            PathBuf::from("b.sol.json")
        );
        assert_eq!(
            default_output(Path::new("c.json")),
            PathBuf::from("c.sol.json")
        );
    }

    #[test]
    fn deterministic_requires_seed() {
        assert_eq!(
            run(["binpack", "solve", "x.bpp.json", "--deterministic"]),
            EXIT_USAGE
        );
    }

    #[test]
    fn unknown_command_is_usage_error() {
        assert_eq!(run(["binpack", "frobnicate"]), EXIT_USAGE);
    }
}
