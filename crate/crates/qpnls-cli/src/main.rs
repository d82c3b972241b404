//! Batch front door for the spectral NLS engine.
//!
//! Exit codes: 0 success, 2 validation failure, 3 divergence, 4 bound-check
//! failure, 5 missing artifacts.

mod commands;
mod config;
mod emit;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "qpnls",
    about = "Spectral Picard/Galerkin engine for the 2D cubic NLS with quasi-periodic data",
    version
)]
struct Cli {
    /// Cap the worker pool for intra-run parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the Picard iteration and write snapshots, diffs.csv, and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Permit t_end beyond the guaranteed horizon T_eps.
        #[arg(long)]
        override_te: bool,
    },
    /// Emit the branch census / majorant table as CSV.
    Tree {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 12)]
        ell_cap: u32,
        #[arg(long)]
        x: f64,
        /// Output CSV path (default tree.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the decay/Cauchy/asymptotic bounds of a finished run.
    Verify {
        #[arg(long)]
        run_dir: PathBuf,
        /// Cross-check that this config produced the run directory.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Sweep epsilon at horizons t ~ eps^(eta-1) plus a fixed-t slope fit.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
        #[arg(long)]
        eta: f64,
        /// Horizon coefficient (default: the te-scale constant of the profile).
        #[arg(long)]
        t_coeff: Option<f64>,
        /// Hard cap on every horizon.
        #[arg(long)]
        t_cap: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the same truncated system with RK4 and compare.
    Oracle {
        #[arg(long)]
        run_dir: PathBuf,
        /// RK4 micro-steps per grid interval.
        #[arg(long, default_value_t = 8)]
        substeps: usize,
    },
    /// Sample the nonlinear and linear solutions in physical space.
    Synth {
        #[arg(long)]
        run_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        node: usize,
        #[arg(long, default_value_t = 16)]
        nx: usize,
        #[arg(long, default_value_t = 16)]
        ny: usize,
        #[arg(long, default_value_t = 0.0)]
        x_min: f64,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        x_max: f64,
        #[arg(long, default_value_t = 0.0)]
        y_min: f64,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        y_max: f64,
        /// Output CSV path (default <run_dir>/synth.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: could not configure thread pool: {e}");
        }
    }
    let result = match cli.cmd {
        Cmd::Run {
            config,
            out,
            override_te,
        } => commands::cmd_run(&config, out, override_te),
        Cmd::Tree { k, ell_cap, x, out } => commands::cmd_tree(k, ell_cap, x, out),
        Cmd::Verify { run_dir, config } => commands::cmd_verify(&run_dir, config),
        Cmd::Sweep {
            config,
            epsilons,
            eta,
            t_coeff,
            t_cap,
            out,
        } => commands::cmd_sweep(&config, &epsilons, eta, t_coeff, t_cap, out),
        Cmd::Oracle { run_dir, substeps } => commands::cmd_oracle(&run_dir, substeps),
        Cmd::Synth {
            run_dir,
            node,
            nx,
            ny,
            x_min,
            x_max,
            y_min,
            y_max,
            out,
        } => commands::cmd_synth(&run_dir, node, nx, ny, (x_min, x_max), (y_min, y_max), out),
    };
    if let Err(e) = result {
        e.print();
        std::process::exit(e.exit_code());
    }
}
