//! Report bundles: a JSON summary, CSV tables and long-format plot data.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::{LabError, Stage};

/// Identifier of the generator behind every seeded corpus.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64)";

#[derive(Debug, Clone, Default, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.push(row.iter().map(|x| fmt_f64(*x)).collect());
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.12e}")
}

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub summary: Value,
    pub tables: Vec<Table>,
    pub plots: Vec<Table>,
    /// Human-readable lines for `summary.txt`.
    pub lines: Vec<String>,
    pub passed: bool,
}

impl ReportBundle {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            config: config.clone(),
            config_hash: config.hash(),
            summary: Value::Null,
            tables: Vec::new(),
            plots: Vec::new(),
            lines: Vec::new(),
            passed: true,
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn plot(&self, name: &str) -> Option<&Table> {
        self.plots.iter().find(|t| t.name == name)
    }

    /// The versioned JSON document written as `summary.json`.
    pub fn json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "kind": self.config.kind.name(),
            "config_hash": self.config_hash,
            "seed": self.config.seed,
            "rng": RNG_ALGORITHM,
            "passed": self.passed,
            "config": self.config,
            "result": self.summary,
        })
    }

    fn write_table(&self, dir: &Path, prefix: &str, t: &Table) -> Result<PathBuf, LabError> {
        let path = dir.join(format!("{prefix}{}.csv", t.name));
        let mut buf = Vec::new();
        writeln!(buf, "# config_hash={}", self.config_hash).unwrap();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&t.header).map_err(|e| Stage::Output.err(e))?;
            for r in &t.rows {
                w.write_record(r).map_err(|e| Stage::Output.err(e))?;
            }
            w.flush().map_err(|e| Stage::Output.err(e))?;
        }
        fs::write(&path, buf).map_err(|e| Stage::Output.err(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    /// Write `summary.json`, `summary.txt`, `config.toml` and one CSV per table.
    pub fn write(&self, dir: &Path, elapsed: Option<std::time::Duration>) -> Result<Vec<PathBuf>, LabError> {
        fs::create_dir_all(dir).map_err(|e| Stage::Output.err(format!("{}: {e}", dir.display())))?;
        let mut out = Vec::new();
        let put = |name: &str, text: String| -> Result<PathBuf, LabError> {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Stage::Output.err(format!("{}: {e}", p.display())))?;
            Ok(p)
        };
        out.push(put("summary.json", serde_json::to_string_pretty(&self.json()).unwrap() + "\n")?);
        let mut txt = format!(
            "{} run, config {}\nseed {} ({RNG_ALGORITHM})\n",
            self.config.kind.name(),
            self.config_hash,
            self.config.seed
        );
        if let Some(e) = elapsed {
            txt += &format!("elapsed {:.3} s\n", e.as_secs_f64());
        }
        for l in &self.lines {
            txt += l;
            txt.push('\n');
        }
        txt += if self.passed { "status: pass\n" } else { "status: FAIL\n" };
        out.push(put("summary.txt", txt)?);
        out.push(put(
            "config.toml",
            format!("# config_hash={}\n{}", self.config_hash, self.config.to_toml()),
        )?);
        for t in &self.tables {
            out.push(self.write_table(dir, "", t)?);
        }
        Ok(out)
    }
}

/// Write the long-format plot tables as `plot_<name>.csv`; empty tables keep their header.
pub fn emit_plotdata(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    fs::create_dir_all(dir).map_err(|e| Stage::Output.err(format!("{}: {e}", dir.display())))?;
    bundle.plots.iter().map(|t| bundle.write_table(dir, "plot_", t)).collect()
}
