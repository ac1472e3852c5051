//! Run configuration: defaults, TOML config file (path from `--config` or the
//! `TOVLAB_CONFIG` environment variable), and flag overrides. Flags win.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use tovlab_core::numerics::Tolerances;

use crate::cli::GlobalOpts;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tolerances: Tolerances,
    pub base_point: f64,
    pub r_max: f64,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            base_point: 1.0,
            r_max: 1e6,
            output_format: OutputFormat::Json,
            output_path: None,
            jobs: 1,
        }
    }
}

/// Documented config-file keys; everything else is rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    quad_rel: Option<f64>,
    quad_abs: Option<f64>,
    root_tol: Option<f64>,
    fd_step: Option<f64>,
    residual_tol: Option<f64>,
    guard_band: Option<f64>,
    base_point: Option<f64>,
    r_max: Option<f64>,
    format: Option<String>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
}

fn load_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

pub fn resolve(opts: &GlobalOpts) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let path = opts
        .config
        .clone()
        .or_else(|| std::env::var_os("TOVLAB_CONFIG").map(PathBuf::from));
    if let Some(path) = path {
        let file = load_file(&path)?;
        let t = &mut cfg.tolerances;
        if let Some(v) = file.quad_rel {
            t.quad_rel = v;
        }
        if let Some(v) = file.quad_abs {
            t.quad_abs = v;
        }
        if let Some(v) = file.root_tol {
            t.root_tol = v;
        }
        if let Some(v) = file.fd_step {
            t.fd_step = v;
        }
        if let Some(v) = file.residual_tol {
            t.residual_tol = v;
        }
        if let Some(v) = file.guard_band {
            t.guard_band = v;
        }
        if let Some(v) = file.base_point {
            cfg.base_point = v;
        }
        if let Some(v) = file.r_max {
            cfg.r_max = v;
        }
        if let Some(v) = file.format {
            cfg.output_format = parse_format(&v)?;
        }
        if let Some(v) = file.out {
            cfg.output_path = Some(v);
        }
        if let Some(v) = file.jobs {
            cfg.jobs = v;
        }
    }
    // flags override the file
    let t = &mut cfg.tolerances;
    if let Some(v) = opts.quad_rel {
        t.quad_rel = v;
    }
    if let Some(v) = opts.quad_abs {
        t.quad_abs = v;
    }
    if let Some(v) = opts.root_tol {
        t.root_tol = v;
    }
    if let Some(v) = opts.fd_step {
        t.fd_step = v;
    }
    if let Some(v) = opts.residual_tol {
        t.residual_tol = v;
    }
    if let Some(v) = opts.guard_band {
        t.guard_band = v;
    }
    if let Some(v) = opts.base_point {
        cfg.base_point = v;
    }
    if let Some(v) = opts.r_max {
        cfg.r_max = v;
    }
    if let Some(v) = &opts.format {
        cfg.output_format = parse_format(v)?;
    }
    if let Some(v) = &opts.out {
        cfg.output_path = Some(v.clone());
    }
    if let Some(v) = opts.jobs {
        cfg.jobs = v;
    }
    cfg.tolerances.validate().map_err(|e| anyhow::anyhow!("bad tolerances: {e}"))?;
    if !(cfg.base_point > 0.0) {
        bail!("base_point must be positive");
    }
    if cfg.jobs == 0 {
        bail!("jobs must be at least 1");
    }
    Ok(cfg)
}

pub fn parse_format(s: &str) -> Result<OutputFormat> {
    match s {
        "json" => Ok(OutputFormat::Json),
        "csv" => Ok(OutputFormat::Csv),
        other => bail!("unknown format '{other}' (expected json or csv)"),
    }
}
