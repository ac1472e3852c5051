//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "tovlab",
    about = "Closed-form TOV solution catalog: verification, classification, scans, pressure solving, tail certificates",
    version
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Config file (TOML); falls back to $TOVLAB_CONFIG.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write machine output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Machine output format.
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    pub format: Option<String>,
    /// Parallel workers for sweeps and per-row verification.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    pub quad_rel: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true)]
    pub quad_abs: Option<f64>,
    /// Root bracket tolerance.
    #[arg(long, global = true)]
    pub root_tol: Option<f64>,
    /// Base finite-difference step.
    #[arg(long, global = true)]
    pub fd_step: Option<f64>,
    /// Residual acceptance threshold.
    #[arg(long, global = true)]
    pub residual_tol: Option<f64>,
    /// Relative guard band around singular radii.
    #[arg(long, global = true)]
    pub guard_band: Option<f64>,
    /// Base point for path integrals.
    #[arg(long, global = true)]
    pub base_point: Option<f64>,
    /// Radius cap for unbounded grids.
    #[arg(long, global = true)]
    pub r_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ParamOpts {
    /// First family constant.
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    /// Second family constant.
    #[arg(long, default_value_t = 1.0)]
    pub c2: f64,
    /// Density of the constant entry (alias for --c1 when --row constant).
    #[arg(long)]
    pub c: Option<f64>,
}

impl ParamOpts {
    pub fn params(&self) -> tovlab_core::catalog::Params {
        match self.c {
            Some(c) => tovlab_core::catalog::Params::new(c, self.c2),
            None => tovlab_core::catalog::Params::new(self.c1, self.c2),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify catalog rows against the h-ODE, linear-part, and continuity residuals.
    Verify {
        /// Rows: "all", "constant", "sec33", or comma-separated indices 1-10.
        #[arg(long, default_value = "all")]
        rows: String,
        #[command(flatten)]
        params: ParamOpts,
        /// Grid points per row.
        #[arg(long, default_value_t = 200)]
        grid_points: usize,
    },
    /// Classify one row's density: singularities, cavities, matter segments, flags.
    Classify {
        #[arg(long)]
        row: String,
        #[command(flatten)]
        params: ParamOpts,
        /// Also write a (r, rho, flag) CSV of the profile here.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Points for the plot grid.
        #[arg(long, default_value_t = 400)]
        grid_points: usize,
    },
    /// Sweep c1 or c2 and locate classification change points.
    Scan {
        #[arg(long)]
        row: String,
        /// Which constant to sweep.
        #[arg(long, value_parser = ["c1", "c2"])]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[command(flatten)]
        params: ParamOpts,
    },
    /// Evaluate the explicit pressure solution and its residuals on a grid.
    Solve {
        #[arg(long)]
        row: String,
        #[command(flatten)]
        params: ParamOpts,
        /// Integration constant of the pressure formula.
        #[arg(long, default_value_t = 1.0)]
        c0: f64,
        /// Grid points.
        #[arg(long, default_value_t = 200)]
        grid_points: usize,
    },
    /// Tail reports and certificates for the nonlinear coupling part.
    Tails {
        #[arg(long, default_value = "all")]
        rows: String,
        #[command(flatten)]
        params: ParamOpts,
    },
    /// Dump catalog metadata as JSON.
    CatalogDump,
}
