use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use psystem::experiment::{apply_flags, apply_text, exit_code_for_error, execute, ExperimentConfig, ExperimentKind};
use psystem::Error;

/// Damped p-system experiments: runs, sweeps, threshold maps and checks.
#[derive(Parser)]
#[command(name = "psystem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single run; `kind=decay_fit` adds decay-exponent fits.
    Run(Common),
    /// Lifespans over the `epsilons` list with a scaling fit.
    Sweep(Common),
    /// Global/blow-up classification over `mu_grid` × `lambda_grid`.
    ThresholdMap(Common),
    /// Weighted damping-integral bound.
    LemmaCheck(Common),
    /// Numerical lifespan against the λ = 0 Lax formula.
    OracleCompare(Common),
}

#[derive(Args)]
struct Common {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides: key=value, --key=value or --key value.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

fn configure(kind: ExperimentKind, c: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            location: path.display().to_string(),
            message: e.to_string(),
        })?;
        apply_text(&mut cfg, &text)?;
    }
    apply_flags(&mut cfg, &c.overrides)?;
    if let Some(out) = &c.out {
        cfg.output = out.clone();
    }
    if let Some(w) = c.workers {
        cfg.workers = w;
    }
    let keep_fit = kind == ExperimentKind::Run && cfg.kind == ExperimentKind::DecayFit;
    if !keep_fit {
        cfg.kind = kind;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match &cli.command {
        Command::Run(c) => (ExperimentKind::Run, c),
        Command::Sweep(c) => (ExperimentKind::LifespanSweep, c),
        Command::ThresholdMap(c) => (ExperimentKind::ThresholdMap, c),
        Command::LemmaCheck(c) => (ExperimentKind::LemmaCheck, c),
        Command::OracleCompare(c) => (ExperimentKind::OracleCompare, c),
    };
    let result = configure(kind, common).and_then(|cfg| execute(&cfg));
    match result {
        Ok(exec) => {
            let results = &exec.summary["results"];
            if let Some(status) = results.get("status") {
                println!("status: {} at t = {}", status["kind"], status["t"]);
            }
            for f in &exec.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(exec.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for_error(&e) as u8)
        }
    }
}
