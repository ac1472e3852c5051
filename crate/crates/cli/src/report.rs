//! Machine output: the versioned JSON envelope and small CSV writers.
//! All outputs are deterministic functions of the inputs.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

pub const SCHEMA: &str = "tovlab/1";

#[derive(Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema: &'static str,
    pub kind: &'static str,
    pub payload: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(kind: &'static str, payload: T) -> Self {
        Self { schema: SCHEMA, kind, payload }
    }
}

/// Write to the configured path, or stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            f.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                f.write_all(b"\n")?;
            }
            Ok(())
        }
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

pub fn emit_json<T: Serialize>(out: Option<&Path>, kind: &'static str, payload: T) -> Result<()> {
    let text = serde_json::to_string_pretty(&Envelope::new(kind, payload))?;
    emit(out, &text)
}

/// Plot-data CSV: `r,value,flag` with flag ∈ {ok, near_singularity}.
pub fn plot_csv(samples: &[(f64, f64)], singularities: &[f64]) -> String {
    let mut s = String::from("r,value,flag\n");
    for &(r, v) in samples {
        let near = singularities
            .iter()
            .any(|&x| (r - x).abs() <= 1e-2 * (1.0 + x.abs()));
        let flag = if near { "near_singularity" } else { "ok" };
        s.push_str(&format!("{r},{v},{flag}\n"));
    }
    s
}
