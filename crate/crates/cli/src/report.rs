//! Report files: `report.json`, its aligned-text twin `report.txt`, and a
//! separate `metadata.json` holding everything that varies between runs.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

pub const LOCK_FILE: &str = ".spacelike.lock";

/// One asserted check.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Passing requires `value <= bound`.
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            bound,
            pass: value <= bound,
        }
    }

    /// A yes/no condition, recorded as value 0 (holds) or 1 (fails) against 0.
    pub fn holds(name: &str, ok: bool) -> Self {
        Self {
            name: name.to_string(),
            value: if ok { 0.0 } else { 1.0 },
            bound: 0.0,
            pass: ok,
        }
    }
}

/// What a command hands back to the runner.
#[derive(Debug)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub result: Value,
    /// Extra files written into the run directory, relative names.
    pub artifacts: Vec<String>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn report_value(cfg: &RunConfig, outcome: &Outcome) -> Value {
    json!({
        "command": cfg.command.name(),
        "seed": cfg.seed,
        "pass": outcome.pass(),
        "config": cfg,
        "checks": outcome.checks,
        "result": outcome.result,
        "artifacts": outcome.artifacts,
    })
}

/// Report for a run whose computation stopped with an error.
pub fn failure_value(cfg: &RunConfig, message: &str) -> Value {
    json!({
        "command": cfg.command.name(),
        "seed": cfg.seed,
        "pass": false,
        "config": cfg,
        "checks": [],
        "error": message,
    })
}

/// Flatten to `path  value` lines, one per leaf, in JSON order.
pub fn to_text(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten(v, String::new(), &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, val) in rows {
        out.push_str(&format!("{k:<width$}  {val}\n"));
    }
    out
}

fn flatten(v: &Value, prefix: String, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(child, key, rows);
            }
        }
        Value::Array(items) if !items.is_empty() => {
            for (i, child) in items.iter().enumerate() {
                flatten(child, format!("{prefix}[{i}]"), rows);
            }
        }
        Value::String(s) => rows.push((prefix, s.clone())),
        other => rows.push((prefix, other.to_string())),
    }
}

pub fn write_report(dir: &Path, report: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    write(&dir.join("report.json"), text.as_bytes())?;
    write(&dir.join("report.txt"), to_text(report).as_bytes())
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Exclusive hold on a run directory; released on drop.
pub struct RunLock {
    path: PathBuf,
    _file: File,
}

impl RunLock {
    pub fn acquire(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        let path = dir.join(LOCK_FILE);
        let mut file = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| {
                CliError::Io(format!("cannot lock {} ({e}); is another run using it?", dir.display()))
            })?;
        let _ = writeln!(file, "{}", std::process::id());
        Ok(Self { path, _file: file })
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_lines_follow_json_leaves() {
        let v = json!({"a": 1.5, "b": {"c": [1, 2]}, "d": "x", "e": null});
        let text = to_text(&v);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, ["a       1.5", "b.c[0]  1", "b.c[1]  2", "d       x", "e       null"]);
    }

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let first = RunLock::acquire(dir.path()).unwrap();
        assert!(RunLock::acquire(dir.path()).is_err());
        drop(first);
        assert!(RunLock::acquire(dir.path()).is_ok());
    }
}
