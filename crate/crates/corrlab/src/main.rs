use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use corrlab::config::{parse_k_poly, ExperimentConfig};
use corrlab::error::Error;
use corrlab::harness;

/// Seeded Monte Carlo harness for correlation attacks on LFSR
/// keystreams observed through noisy channels.
#[derive(Parser)]
#[command(name = "corrlab", version)]
struct Cli {
    /// JSON experiment description; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trial count override.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Keystream channel parameter override.
    #[arg(long, global = true)]
    p1: Option<f64>,
    /// Residual channel parameter override.
    #[arg(long, global = true)]
    p2: Option<f64>,
    /// Observed sequence length override.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Connection polynomial as degree:hex, e.g. 31:0x8000011F.
    #[arg(long = "k-poly", global = true)]
    k_poly: Option<String>,
    /// Iterations per round override.
    #[arg(long, global = true)]
    alpha: Option<u32>,
    /// Transfer-chart bin count override.
    #[arg(long, global = true)]
    bins: Option<usize>,
    /// Round cap override.
    #[arg(long, global = true)]
    max_rounds: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trial-count sweep of the one-shot attack over a channel grid.
    Attack1Sweep,
    /// Monte Carlo of the iterative attack with a transfer-chart report.
    Attack2Exit,
    /// Closed-form channel figures for the configured parameters.
    Info,
    /// Small-instance oracles; nonzero exit if any fails.
    Selftest,
}

fn build_config(cli: &Cli) -> corrlab::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.to_string_lossy().into_owned();
    }
    if let Some(p1) = cli.p1 {
        cfg.p1 = p1;
    }
    if let Some(p2) = cli.p2 {
        cfg.p2 = p2;
    }
    if let Some(n) = cli.n {
        cfg.n = n;
    }
    if let Some(spec) = &cli.k_poly {
        cfg.poly = parse_k_poly(spec)?;
        // a polynomial change invalidates any declared tap count
        cfg.t = None;
    }
    if let Some(alpha) = cli.alpha {
        cfg.alpha = alpha;
    }
    if let Some(bins) = cli.bins {
        cfg.d = bins;
    }
    if let Some(max_rounds) = cli.max_rounds {
        cfg.max_rounds = max_rounds;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> corrlab::Result<ExitCode> {
    let cfg = build_config(&cli)?;
    match cli.command {
        Command::Attack1Sweep => {
            let report = harness::run_attack1_sweep(&cfg)?;
            report.write_all(Path::new(&cfg.out_dir))?;
            print!("{}", report.sweep_csv());
        }
        Command::Attack2Exit => {
            let report = harness::run_attack2_exit(&cfg)?;
            report.write_all(Path::new(&cfg.out_dir))?;
            print!("{}", report.summary_json());
        }
        Command::Info => {
            print!("{}", harness::info_report(&cfg)?);
        }
        Command::Selftest => {
            let mut all_ok = true;
            for (name, ok) in harness::selftest() {
                println!("{} {name}", if ok { "PASS" } else { "FAIL" });
                all_ok &= ok;
            }
            if !all_ok {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match panic::catch_unwind(AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
        Err(_) => {
            eprintln!("error: internal invariant violation");
            ExitCode::from(3)
        }
    }
}
