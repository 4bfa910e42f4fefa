//! Command-line front end for the four-wave-mixing biphoton library:
//! computes pump expansions, coincidence-amplitude tensors,
//! entanglement reports, coincidence maps and parameter sweeps from a
//! single TOML experiment description.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

use commands::{CommandError, CommandResult};
use config::ExperimentConfig;
use output::{FormatChoice, OutputDir};

const EXIT_CONFIG: i32 = 2;
const EXIT_CONVERGENCE: i32 = 3;

#[derive(Parser)]
#[command(
    name = "fwm",
    about = "Biphoton states from degenerate four-wave mixing with structured pumps",
    version
)]
struct Cli {
    /// Experiment configuration (TOML). Defaults apply for every
    /// missing field.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Amplitude representation.
    #[arg(long, global = true, default_value = "position")]
    rep: String,

    /// Output directory for data files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Tabular data format; JSON-only reports are always written.
    #[arg(long, global = true, default_value = "both")]
    format: String,

    /// Worker threads (0 = all cores). Results are bit-identical for
    /// any value.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Print the fully resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one LG mode on the configured grid.
    Modes {
        /// Topological charge.
        #[arg(long, default_value_t = 0)]
        ell: i32,
        /// Radial index.
        #[arg(long, default_value_t = 0)]
        p: u32,
        /// Longitudinal plane (m).
        #[arg(long, default_value_t = 0.0)]
        z: f64,
    },
    /// Expand the squared pump in LG modes.
    PumpExpand,
    /// Coincidence-amplitude tensor in the chosen representation.
    Amplitudes {
        /// Evaluate the momentum tensor by direct quadrature instead of
        /// the nested-sum formula.
        #[arg(long)]
        quadrature: bool,
    },
    /// Spiral bandwidth, entropy, purity and Schmidt numbers.
    Entanglement,
    /// Coincidence-count maps for the configured detection scheme.
    G2,
    /// Distance between the position and momentum representations.
    Distance,
    /// Sweep one parameter and tabulate metrics.
    Sweep,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("fwm: cannot configure thread pool: {e}");
            return 1;
        }
    }

    let cfg = match &cli.config {
        Some(path) => match ExperimentConfig::from_path(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("fwm: {e}");
                return EXIT_CONFIG;
            }
        },
        None => ExperimentConfig::default(),
    };

    if cli.print_config {
        print!("{}", cfg.to_toml());
        return 0;
    }

    let Some(command) = &cli.command else {
        eprintln!("fwm: no subcommand given (try --help)");
        return EXIT_CONFIG;
    };

    let rep = match config::parse_representation(&cli.rep) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("fwm: {e}");
            return EXIT_CONFIG;
        }
    };

    let Some(format) = FormatChoice::parse(&cli.format) else {
        eprintln!(
            "fwm: config error: unknown format '{}' (expected csv|json|both)",
            cli.format
        );
        return EXIT_CONFIG;
    };

    let out = match OutputDir::create(&cli.out, format) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("fwm: cannot create output directory: {e}");
            return 1;
        }
    };

    let (label, result): (&str, CommandResult) = match command {
        Command::Modes { ell, p, z } => ("modes", commands::run_modes(&cfg, &out, *ell, *p, *z)),
        Command::PumpExpand => ("pump-expand", commands::run_pump_expand(&cfg, &out)),
        Command::Amplitudes { quadrature } => (
            "amplitudes",
            commands::run_amplitudes(&cfg, &out, rep, *quadrature),
        ),
        Command::Entanglement => ("entanglement", commands::run_entanglement(&cfg, &out, rep)),
        Command::G2 => ("g2", commands::run_g2(&cfg, &out, rep)),
        Command::Distance => ("distance", commands::run_distance(&cfg, &out)),
        Command::Sweep => ("sweep", commands::run_sweep(&cfg, &out, rep)),
    };

    match result {
        Ok(files) => {
            let _ = out.log_run(label);
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(CommandError::Config(msg)) => {
            eprintln!("fwm: config error: {msg}");
            EXIT_CONFIG
        }
        Err(CommandError::Convergence(msg)) => {
            eprintln!("fwm: convergence failure: {msg}");
            EXIT_CONVERGENCE
        }
        Err(CommandError::Io(msg)) => {
            eprintln!("fwm: io error: {msg}");
            1
        }
    }
}
