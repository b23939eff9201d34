//! `arrival-kit`: run scenarios and parameter sweeps, write tables, reports and plots.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use arrival_kit::pipeline::{sweep, RunOptions, SweepParam};
use arrival_kit::scenario::Check;
use arrival_kit::{run_scenario, Error, Scenario};
use clap::{Parser, Subcommand};

const EXIT_OK: u8 = 0;
const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_NUMERICAL: u8 = 65;
const EXIT_IO: u8 = 74;

#[derive(Debug, Parser)]
#[command(name = "arrival-kit", version, about = "First-photon arrival times of a two-level atom entering a laser region")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a preset (fig1..fig4) or a scenario file.
    Run {
        scenario: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write an SVG plot of the distributions.
        #[arg(long)]
        plot: bool,
        /// Skip the finite-difference cross-check.
        #[arg(long)]
        no_oracle: bool,
        /// Checks to evaluate instead of the scenario's own list.
        #[arg(long = "check", num_args = 1.., value_parser = parse_check)]
        checks: Vec<Check>,
    },
    /// Run a scenario once per value of one parameter.
    Sweep {
        scenario: String,
        #[arg(long, value_parser = parse_param)]
        param: SweepParam,
        /// Comma-separated values; gamma and omega in 1/us, v_mean in cm/s.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        plot: bool,
        #[arg(long)]
        no_oracle: bool,
    },
}

fn parse_check(s: &str) -> Result<Check, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_param(s: &str) -> Result<SweepParam, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Core(Error),
    Io(std::io::Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_IO,
            Failure::Core(e) => match e {
                Error::InvalidConfig(_) | Error::InvalidWavenumber(_) | Error::DegenerateCoupling | Error::GridMismatch(_) | Error::InconsistentGrids => {
                    EXIT_USAGE
                }
                _ => EXIT_NUMERICAL,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::Usage(m) => f.write_str(m),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("ARRIVAL_KIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("ARRIVAL_KIT_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot size the thread pool: {e}")))
}

fn options(no_oracle: bool, checks: Option<Vec<Check>>) -> RunOptions {
    RunOptions { oracle: no_oracle.then_some(false), checks }
}

fn run(scenario: &str, out: PathBuf, plot: bool, no_oracle: bool, checks: Vec<Check>) -> Result<u8, Failure> {
    let s = Scenario::load(scenario)?;
    let mut checks = if checks.is_empty() { None } else { Some(checks) };
    if no_oracle {
        let list = checks.get_or_insert_with(|| s.checks.clone());
        list.retain(|&c| c != Check::Oracle);
    }
    let r = run_scenario(&s, &options(no_oracle, checks))?;
    std::fs::create_dir_all(&out)?;
    let written = output::write_run(&out, &s, &r, plot)?;
    for p in &written {
        println!("wrote {}", p.display());
    }
    output::print_summary(&r);
    let failed = r.failed_checks();
    if failed.is_empty() {
        return Ok(EXIT_OK);
    }
    for c in failed {
        eprintln!("check {} failed: {}", c.name, c.detail);
    }
    Ok(EXIT_CHECK_FAILED)
}

fn run_sweep(scenario: &str, param: SweepParam, values: Vec<f64>, out: PathBuf, plot: bool, no_oracle: bool) -> Result<u8, Failure> {
    let s = Scenario::load(scenario)?;
    let checks = no_oracle.then(|| s.checks.iter().copied().filter(|&c| c != Check::Oracle).collect());
    let points = sweep(&s, param, &values, &options(no_oracle, checks))?;
    std::fs::create_dir_all(&out)?;
    for p in &points {
        let point = param.apply(&s, p.value);
        output::write_run(&out, &point, &p.result, plot)?;
    }
    let summary = output::write_sweep_summary(&out, &s.name, param, &points)?;
    println!("wrote {} and {} per-value tables", summary.display(), points.len());
    output::print_sweep(param, &points);
    let mut code = EXIT_OK;
    for p in &points {
        for c in p.result.failed_checks() {
            eprintln!("{} = {}: check {} failed: {}", param.name(), p.value, c.name, c.detail);
            code = EXIT_CHECK_FAILED;
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = configure_threads().and_then(|()| match cli.command {
        Command::Run { scenario, out, plot, no_oracle, checks } => run(&scenario, out, plot, no_oracle, checks),
        Command::Sweep { scenario, param, values, out, plot, no_oracle } => run_sweep(&scenario, param, values, out, plot, no_oracle),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
