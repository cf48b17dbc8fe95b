//! Record files: JSON, CSV histories and histograms, SVG.
//!
//! For an experiment named `ghz_prep` the output directory receives
//!
//! - `ghz_prep.json`, the full [`AggregateRecord`]
//! - `ghz_prep_<optimizer>_best.csv` and `ghz_prep_<optimizer>_average.csv`
//! - `ghz_prep_<optimizer>_fidelity.csv` and `..._delta_theta.csv` for unitary experiments
//! - `ghz_prep.svg`

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{BenchError, Result};
use crate::experiment::AggregateRecord;
use crate::plot::emit_plot;

/// `iteration,cost` with one row per recorded cost.
pub fn history_csv(history: &[f64]) -> String {
    let mut out = String::from("iteration,cost\n");
    for (i, c) in history.iter().enumerate() {
        let _ = writeln!(out, "{i},{c:e}");
    }
    out
}

/// One value per row under a single header.
pub fn column_csv(header: &str, values: impl IntoIterator<Item = f64>) -> String {
    let mut out = format!("{header}\n");
    for v in values {
        let _ = writeln!(out, "{v:e}");
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| BenchError::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))
}

/// Writes history and histogram CSVs into `dir` and returns their paths.
pub fn export_csv(record: &AggregateRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let name = record.config.experiment.name();
    let mut files = Vec::new();
    for r in &record.results {
        for (suffix, history) in [("best", &r.best.cost_history), ("average", &r.average_history)] {
            let path = dir.join(format!("{name}_{}_{suffix}.csv", r.optimizer));
            write(&path, &history_csv(history))?;
            files.push(path);
        }
    }
    for h in &record.histograms {
        let path = dir.join(format!("{name}_{}_fidelity.csv", h.optimizer));
        write(&path, &column_csv("fidelity", h.samples.iter().map(|s| s.fidelity)))?;
        files.push(path);
        let path = dir.join(format!("{name}_{}_delta_theta.csv", h.optimizer));
        write(&path, &column_csv("delta_theta", h.samples.iter().map(|s| s.delta_theta)))?;
        files.push(path);
    }
    Ok(files)
}

pub fn export_json(record: &AggregateRecord, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(record).map_err(|e| BenchError::Json { path: path.into(), source: e })?;
    text.push('\n');
    write(path, &text)
}

pub fn read_record(path: &Path) -> Result<AggregateRecord> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| BenchError::Json { path: path.into(), source: e })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExportedFiles {
    pub json: PathBuf,
    pub csv: Vec<PathBuf>,
    pub plot: Option<PathBuf>,
}

/// JSON, CSV and SVG output of one record, written from a single thread.
pub fn export_all(record: &AggregateRecord, dir: &Path) -> Result<ExportedFiles> {
    ensure_dir(dir)?;
    let name = record.config.experiment.name();
    let json = dir.join(format!("{name}.json"));
    export_json(record, &json)?;
    let csv = export_csv(record, dir)?;
    let svg = dir.join(format!("{name}.svg"));
    let plot = emit_plot(record, &svg)?.then_some(svg);
    Ok(ExportedFiles { json, csv, plot })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn history_rows() {
        let csv = history_csv(&[1.0, 0.5, 1e-17]);
        assert_eq!(csv, "iteration,cost\n0,1e0\n1,5e-1\n2,1e-17\n");
        assert_eq!(history_csv(&vec![0.25; 33]).lines().count(), 34);
    }

    #[test]
    fn values_survive_text() {
        let v = [0.1 + 0.2, std::f64::consts::PI, 2.2250738585072014e-308, 1.0 - f64::EPSILON];
        let csv = column_csv("x", v);
        let back: Vec<f64> = csv.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        assert_eq!(back, v);
    }

    #[test]
    fn io_errors_name_the_path() {
        let e = write(Path::new("/nonexistent-dir/sub/x.csv"), "").unwrap_err();
        assert!(e.to_string().contains("/nonexistent-dir/sub/x.csv"), "{e}");
        assert_eq!(e.exit_code(), 1);
    }
}
