//! Output directory, run manifest and timing log.
//!
//! Everything written as CSV, JSON or SVG is a pure function of the inputs
//! and the manifest. Wall-clock measurements go to `timings.tsv` only.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

pub const MANIFEST: &str = "manifest.json";
pub const TIMINGS: &str = "timings.tsv";

/// JSON number, with non-finite values spelled out as strings since JSON has
/// no literal for them.
pub fn json_num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn json_opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, json_num)
}

/// Shortest round-trip representation, `inf`/`nan` for non-finite values.
pub fn csv_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn csv_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, csv_num)
}

pub struct OutDir {
    root: PathBuf,
    outputs: Vec<String>,
    timings: Vec<(String, f64)>,
    clock: Instant,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)
            .with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            outputs: Vec::new(),
            timings: Vec::new(),
            clock: Instant::now(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    /// Writes a CSV from a header and rows of already formatted fields.
    pub fn write_csv<I, R, S>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(header)?;
        for row in rows {
            wtr.write_record(row)?;
        }
        let bytes = wtr.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        self.write(name, bytes)
    }

    /// Records the time since the previous mark under `phase`.
    pub fn mark(&mut self, phase: &str) {
        let now = Instant::now();
        self.timings
            .push((phase.to_string(), (now - self.clock).as_secs_f64()));
        self.clock = now;
    }

    pub fn add_timing(&mut self, phase: &str, seconds: f64) {
        self.timings.push((phase.to_string(), seconds));
    }

    /// Writes the timing log and the manifest. `config` is the merged option
    /// set; replaying it with `--config manifest.json` repeats the run.
    pub fn finish<T: Serialize>(mut self, command: &str, config: &T, extra: Value) -> Result<()> {
        let mut tsv = String::from("phase\tseconds\n");
        for (phase, s) in &self.timings {
            tsv.push_str(&format!("{phase}\t{s:.6}\n"));
        }
        let path = self.path(TIMINGS);
        fs::write(&path, tsv).with_context(|| format!("writing {}", path.display()))?;

        let mut outputs = std::mem::take(&mut self.outputs);
        outputs.sort();
        let manifest = json!({
            "tool": "amdc",
            "version": env!("CARGO_PKG_VERSION"),
            "library_version": amdc::VERSION,
            "command": command,
            "config": config,
            "run": extra,
            "outputs": outputs,
        });
        self.write_json(MANIFEST, &manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_numbers_are_spelled_out() {
        assert_eq!(json_num(f64::INFINITY), json!("inf"));
        assert_eq!(json_num(1.5), json!(1.5));
        assert_eq!(csv_num(f64::NEG_INFINITY), "-inf");
        assert_eq!(csv_opt(None), "");
        assert_eq!(csv_num(0.1), "0.1");
    }
}
