use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use mase::commands;
use mase::config::{apply_overrides, load_value, set_path};
use mase::error::{CliError, Result};

#[derive(Parser, Debug)]
#[command(name = "mase", version, about = "Numerical lab for the moderate-amplitude shallow-water equation")]
struct Cli {
    /// JSON scenario, tw request or sweep specification.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to $MASE_OUT_ROOT/<command> or ./mase-out/<command>.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized test-function families.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Record wall-clock time in manifests (makes them non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    /// Override a configuration field, e.g. `--set solver.t_end=5`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve a scenario and write snapshots and diagnostics.
    Simulate,
    /// Construct a traveling-wave profile.
    Tw {
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        /// Integration constant (with --e selects a periodic or contact level).
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        /// Level of the first integral.
        #[arg(long, allow_hyphen_values = true)]
        e: Option<f64>,
        #[arg(long)]
        n_points: Option<usize>,
        /// Solitary window length.
        #[arg(long)]
        length: Option<f64>,
    },
    /// Test a stored run for a moving axis of symmetry.
    Symmetry {
        run: PathBuf,
        #[arg(long)]
        symmetry_tol: Option<f64>,
        #[arg(long)]
        travel_tol: Option<f64>,
    },
    /// Weak-form residuals of a stored run or profile against random bumps.
    Weakform {
        dir: PathBuf,
        #[arg(long, default_value_t = 16)]
        count: usize,
    },
    /// Run a parameter sweep of `simulate` or `tw`.
    Sweep,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Tw { .. } => "tw",
            Command::Symmetry { .. } => "symmetry",
            Command::Weakform { .. } => "weakform",
            Command::Sweep => "sweep",
        }
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    if let Some(out) = &cli.out {
        return out.clone();
    }
    let root = std::env::var_os("MASE_OUT_ROOT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("mase-out"));
    root.join(cli.command.name())
}

/// Config file contents (or `{}`), its directory, and the `--set` overrides applied.
fn load_input(cli: &Cli, required: bool) -> Result<(Value, PathBuf)> {
    let (mut value, base) = match &cli.config {
        Some(path) => {
            (load_value(path)?, path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(".")))
        }
        None if required => return Err(CliError::Config(format!("{} needs --config", cli.command.name()))),
        None => (json!({}), PathBuf::from(".")),
    };
    apply_overrides(&mut value, &cli.overrides)?;
    Ok((value, base))
}

fn run(cli: &Cli) -> Result<String> {
    let out = out_dir(cli);
    match &cli.command {
        Command::Simulate => {
            let (input, base) = load_input(cli, true)?;
            let manifest = commands::simulate(input, &base, &out, cli.timing)?;
            Ok(format!("termination={} out={}", manifest.status.unwrap_or_default(), out.display()))
        }
        Command::Tw { c, a, e, n_points, length } => {
            let (mut input, _) = load_input(cli, false)?;
            let flags = [("c", *c), ("a", *a), ("e", *e), ("length", *length)];
            for (key, value) in flags {
                if let Some(v) = value {
                    set_path(&mut input, key, json!(v))?;
                }
            }
            if let Some(n) = n_points {
                set_path(&mut input, "n_points", json!(n))?;
            }
            let manifest = commands::tw(input, &out, cli.timing)?;
            Ok(format!("regularity={} out={}", manifest.status.unwrap_or_default(), out.display()))
        }
        Command::Symmetry { run, symmetry_tol, travel_tol } => {
            let report = commands::symmetry(run, *symmetry_tol, *travel_tol)?;
            let verdict = serde_json::to_value(report.verdict).unwrap_or(Value::Null);
            Ok(format!(
                "verdict={} speed={:.11e} travel_error={:.3e}",
                verdict.as_str().unwrap_or("?"),
                report.speed_estimate,
                report.travel_error
            ))
        }
        Command::Weakform { dir, count } => {
            let report = commands::weakform(dir, cli.seed.unwrap_or(0), *count)?;
            Ok(format!("max_abs_residual={:.3e} count={}", report.max_abs_residual, report.per_test_function.len()))
        }
        Command::Sweep => {
            let (input, base) = load_input(cli, true)?;
            let manifest = commands::sweep(input, &base, &out, cli.workers, cli.timing)?;
            Ok(format!("status={} out={}", manifest.status.unwrap_or_default(), out.display()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.one_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
