//! `ehd` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use ehd::check::run_checks;
use ehd::sim::{presets, run, SimConfig};
use ehd::stationary::solve_pb;
use ehd::EhdError;

#[derive(Parser, Debug)]
#[command(name = "ehd", version, about = "2D electrohydrodynamics simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a simulation and write diagnostics.csv, snapshots and the stationary state.
    Run(Common),
    /// Solve the stationary Poisson-Boltzmann problem only.
    Stationary(Common),
    /// Check invariants and inequalities on the initial state and a short trajectory.
    Check {
        #[command(flatten)]
        common: Common,
        /// Number of time steps to take after checking the initial state.
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// List the available initial-data presets.
    Presets,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Dotted override applied after the file, e.g. grid.nx=128. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Initial-data preset (overrides initial.preset).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Only print errors.
    #[arg(long)]
    quiet: bool,
}

enum Failure {
    Usage(String),
    Solver(String),
    Check,
}

impl From<EhdError> for Failure {
    fn from(e: EhdError) -> Self {
        if e.is_solver_failure() {
            Failure::Solver(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn load(c: &Common) -> Result<SimConfig, Failure> {
    let mut overrides = c.overrides.clone();
    if let Some(p) = &c.preset {
        overrides.push(format!("initial.preset={}", toml_string(p)));
    }
    if let Some(d) = &c.out {
        overrides.push(format!("output.dir={}", toml_string(&d.to_string_lossy())));
    }
    let cfg = match &c.config {
        Some(path) => SimConfig::from_file(path, &overrides)?,
        None => SimConfig::with_overrides(&overrides)?,
    };
    Ok(cfg)
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn init_logging(quiet: bool) {
    let level = if quiet { "error" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Presets => {
            for p in presets() {
                println!("{:<18} {}", p.name, p.description);
            }
            Ok(())
        }
        Command::Run(c) => {
            init_logging(c.quiet);
            let cfg = load(&c)?;
            let out = run(&cfg)?;
            if cfg.output.dir.is_none() {
                print!("{}", out.csv());
            } else if let Some(last) = out.reports.last() {
                info!(
                    "t = {:.4}, W = {:.6e}, W_rel = {:.6e}",
                    last.t, last.w, last.w_rel
                );
            }
            Ok(())
        }
        Command::Stationary(c) => {
            init_logging(c.quiet);
            let cfg = load(&c)?;
            let s = solve_pb(cfg.initial.m, cfg.initial.n, cfg.grid()?, cfg.tolerances.pb)?;
            let dir = cfg
                .output
                .dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("stationary"));
            s.export(&dir)?;
            info!(
                "stationary solution: {} Newton steps, residual {:.3e}, max |phi| = {:.6e}, written to {}",
                s.iterations,
                s.residual,
                s.phi.max_abs(),
                dir.display()
            );
            Ok(())
        }
        Command::Check { common, steps } => {
            init_logging(common.quiet);
            let cfg = load(&common)?;
            let results = run_checks(&cfg, steps)?;
            let mut ok = true;
            for r in &results {
                println!("{r}");
                ok &= r.passed;
            }
            if ok {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver failure: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check) => {
            eprintln!("property check failed");
            ExitCode::from(3)
        }
    }
}
