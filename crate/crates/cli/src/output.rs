//! CSV, summary and manifest writers.

use std::fmt::{Display, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use ising_ge::analysis::{EnsembleResult, RealizationSeries};

use crate::AppError;

pub const SERIES_HEADER: &str = "t,P1_mean,P1_sem,P2_mean,P2_sem,F_mean,F_sem,xi_mean,xi_sem";
pub const RAW_HEADER: &str = "t,P1,P2,F,xi";
pub const TC_HEADER: &str = "delta,J,J_over_delta,tc,censored,measure";

pub fn series_csv(r: &EnsembleResult) -> String {
    let mut s = String::with_capacity(r.times.len() * 160);
    s.push_str(SERIES_HEADER);
    s.push('\n');
    for (k, t) in r.times.iter().enumerate() {
        let _ = writeln!(
            s,
            "{t},{},{},{},{},{},{},{},{}",
            r.p1.mean[k],
            r.p1.sem[k],
            r.p2.mean[k],
            r.p2.sem[k],
            r.fidelity.mean[k],
            r.fidelity.sem[k],
            r.xi.mean[k],
            r.xi.sem[k]
        );
    }
    s
}

pub fn raw_csv(times: &[f64], r: &RealizationSeries) -> String {
    let mut s = String::from(RAW_HEADER);
    s.push('\n');
    for (k, t) in times.iter().enumerate() {
        let _ = writeln!(s, "{t},{},{},{},{}", r.p1[k], r.p2[k], r.fidelity[k], r.xi[k]);
    }
    s
}

/// Flat `key = value` lines, in insertion order.
#[derive(Debug, Default, Clone)]
pub struct Summary {
    lines: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn push_opt(&mut self, key: impl Into<String>, value: Option<f64>) {
        match value {
            Some(v) => self.push(key, v),
            None => self.push(key, "none"),
        }
    }

    /// Appends `other` with every key prefixed by `prefix.`.
    pub fn extend_prefixed(&mut self, prefix: &str, other: Summary) {
        for (k, v) in other.lines {
            self.lines.push((format!("{prefix}.{k}"), v));
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse(text: &str) -> Vec<(String, String)> {
        text.lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }
}

#[derive(Debug, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Complete configuration(s) that produced the outputs, as TOML.
    pub config: Vec<String>,
    pub seeds: Vec<u64>,
    pub workers: usize,
    pub deterministic: bool,
    pub wall_clock_seconds: f64,
    pub partial: bool,
    pub failures: Vec<String>,
    pub files: Vec<FileRecord>,
}

/// Output directory that remembers what it wrote.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileRecord>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, AppError> {
        fs::create_dir_all(root).map_err(|e| AppError::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, rel: &str, contents: &str) -> Result<(), AppError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| AppError::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| AppError::io(&path, e))?;
        self.files.push(FileRecord {
            path: rel.to_string(),
            bytes: contents.len(),
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
        });
        Ok(())
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(self, mut manifest: Manifest) -> Result<PathBuf, AppError> {
        manifest.files = self.files;
        let path = self.root.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        fs::write(&path, text + "\n").map_err(|e| AppError::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_round_trip() {
        let mut s = Summary::default();
        s.push("fit.model", "exponential");
        s.push("rate", 0.125);
        s.push_opt("gamma", None);
        let parsed = Summary::parse(&s.render());
        assert_eq!(parsed[1], ("rate".into(), "0.125".into()));
        assert_eq!(parsed[2].1, "none");
    }

    #[test]
    fn floats_round_trip_through_csv_text() {
        for v in [0.1 + 0.2, 1.0 / 3.0, 1e-300, 0.9999999999999999] {
            assert_eq!(format!("{v}").parse::<f64>().unwrap(), v);
        }
    }
}
