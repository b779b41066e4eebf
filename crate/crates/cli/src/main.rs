use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use widthlab::lab::{self, Command, RunConfig, EXIT_CONFIG};
use widthlab::Error;

/// Numerical checks for sweepouts, geodesic networks, cones and the width
/// candidates of near-round ellipsoids.
#[derive(Parser, Debug)]
#[command(name = "widthlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// key=value config file; flags given here override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Ellipsoid coefficients a1,a2,a3 of a1 x1² + a2 x2² + a3 x3² = 1.
    #[arg(long, global = true, value_name = "A1,A2,A3")]
    surface: Option<String>,

    /// Icosahedral grid level for contouring (4..=7).
    #[arg(long, global = true, value_name = "N")]
    level: Option<String>,

    /// Uniform samples per sweepout scan.
    #[arg(long, global = true, value_name = "N")]
    budget: Option<String>,

    #[arg(long, global = true, value_name = "N")]
    seed: Option<String>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,

    /// Tolerance override, repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

#[derive(Subcommand, Debug, Clone)]
enum Sub {
    /// Sup-mass scans of F1..F8 with Crofton and concentration checks.
    Scan,
    /// Density, mass-growth and first-variation checks on cones.
    ConeCheck,
    /// Junction classification and stationarity of a network file, or of
    /// the built-in labeled fixtures.
    NetworkCheck {
        #[arg(long, value_name = "FILE")]
        network: Option<PathBuf>,
    },
    /// Index and nullity of the principal ellipses and the closed-geodesic
    /// search.
    Index,
    /// Candidate table, width assignment and counterexample report.
    Widths,
    /// Every stage.
    All,
}

fn config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    let flags = [
        ("surface", &cli.surface),
        ("level", &cli.level),
        ("budget", &cli.budget),
        ("seed", &cli.seed),
        ("out", &cli.out),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.apply(key, v)?;
        }
    }
    for t in &cli.tol {
        let (name, value) = t
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--tol expects NAME=VALUE, got '{t}'")))?;
        cfg.apply(&format!("tol.{}", name.trim()), value)?;
    }
    if let Sub::NetworkCheck { network: Some(p) } = &cli.command {
        cfg.network = Some(p.clone());
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let cfg = match config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("widthlab: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let cmd = match cli.command {
        Sub::Scan => Command::Scan,
        Sub::ConeCheck => Command::ConeCheck,
        Sub::NetworkCheck { .. } => Command::NetworkCheck,
        Sub::Index => Command::Index,
        Sub::Widths => Command::Widths,
        Sub::All => Command::All,
    };
    match lab::run_command(cmd, &cfg) {
        Ok(report) => {
            print!("{}", lab::summary(&report));
            println!("artifacts in {}", cfg.out.display());
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("widthlab: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
