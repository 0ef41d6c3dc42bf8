//! Command-line front end: presets, sweeps and single runs written as CSV.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gyrosense::experiment::{
    run_experiment, run_ideal, run_sensitivity, run_sweep, run_udynamics, Artifact, ExperimentConfig, ExperimentId,
    SweepSpec,
};
use gyrosense::{parallel, Error, Execution};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "gyrosense", version, about = "Phase sensitivity of a squeezed-probe quantum gyroscope")]
struct Cli {
    /// JSON config with schema_version; unknown keys are rejected.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory. Without it, single-table commands print to stdout
    /// and `figure` writes to ./out.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and spectral sums.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Reserved. Every computation is deterministic, so the seed has no effect.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lossless mean, variance, δφ and case ratios at the configured probe and phase.
    Ideal,
    /// Mode amplitudes u₁(t), u₂(t) for each configured bath.
    Udynamics,
    /// δφ(t) and 1/k(t) for each configured bath.
    Sensitivity,
    /// Run a figure preset (fig2a … fig6c), or `all`.
    Figure {
        #[arg(value_name = "ID")]
        id: String,
    },
    /// Sweep one parameter over a grid.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Parameter name: G, phi, R, phi1, phi2, abs_alpha, gamma, omega_c or s.
    #[arg(long)]
    param: Option<String>,
    /// Explicit grid, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    values: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    stop: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

enum Failure {
    Config(String),
    Solver(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) | Failure::Io(_) => 3,
        }
    }

    fn record(&self) -> serde_json::Value {
        let (kind, message) = match self {
            Failure::Config(m) => ("config", m),
            Failure::Solver(m) => ("solver", m),
            Failure::Io(m) => ("io", m),
        };
        json!({ "status": "error", "kind": kind, "exit_code": self.code(), "message": message })
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    match path {
        None => Ok(ExperimentConfig::preset(ExperimentId::Custom)),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            ExperimentConfig::from_json(&text).map_err(Failure::from)
        }
    }
}

fn sweep_spec(args: SweepArgs, cfg: &ExperimentConfig) -> Result<SweepSpec, Failure> {
    let from_flags = args.param.is_some() || !args.values.is_empty() || args.start.is_some();
    if !from_flags {
        return cfg
            .sweep
            .clone()
            .ok_or_else(|| Failure::Config("sweep needs --param or a `sweep` block in the config".into()));
    }
    let parameter = args
        .param
        .or_else(|| cfg.sweep.as_ref().map(|s| s.parameter.clone()))
        .ok_or_else(|| Failure::Config("sweep needs --param".into()))?;
    Ok(SweepSpec { parameter, values: args.values, start: args.start, stop: args.stop, points: args.points })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = load_config(cli.config.as_deref())?;
    let out = cli.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
    let exec = Execution::Parallel;
    let threads = cli.threads.map(usize::from);
    let (artifacts, default_dir) = match cli.command {
        Command::Ideal => (vec![run_ideal(&cfg)?], None),
        Command::Udynamics => (parallel::with_threads(threads, || run_udynamics(&cfg, exec))?, None),
        Command::Sensitivity => (parallel::with_threads(threads, || run_sensitivity(&cfg, exec))?, None),
        Command::Figure { id } => {
            let ids = if id == "all" { ExperimentId::FIGURES.to_vec() } else { vec![ExperimentId::parse(&id)?] };
            let mut all = Vec::new();
            for id in ids {
                cfg.experiment = id;
                all.extend(parallel::with_threads(threads, || run_experiment(&cfg, exec))?);
            }
            (all, Some(PathBuf::from("out")))
        }
        Command::Sweep(args) => {
            let spec = sweep_spec(args, &cfg)?;
            (vec![parallel::with_threads(threads, || run_sweep(&cfg, &spec, exec))?], None)
        }
    };
    emit(&artifacts, out.or(default_dir).as_deref())
}

fn emit(artifacts: &[Artifact], dir: Option<&Path>) -> Result<(), Failure> {
    let Some(dir) = dir else {
        let mut text = String::new();
        for a in artifacts {
            text.push_str(&a.table.render());
        }
        print!("{text}");
        return Ok(());
    };
    let mut files = Vec::new();
    for a in artifacts {
        let path = dir.join(&a.name);
        a.table.write_to(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        files.push(path.display().to_string());
    }
    println!("{}", json!({ "status": "ok", "files": files }));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let f = Failure::Config(e.kind().to_string());
            eprintln!("{}", f.record());
            return ExitCode::from(f.code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.record());
            ExitCode::from(f.code())
        }
    }
}
