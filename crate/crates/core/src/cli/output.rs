// SPDX-License-Identifier: Apache-2.0

//! Manifest records and file emission. Every file is rendered to a string
//! first and written in one call, so repeated runs produce identical bytes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::symplectic::BogoliubovTransform;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCAN_FILE: &str = "scan.csv";
pub const COMPARISON_FILE: &str = "comparison.json";

pub fn transform_file(method: &str) -> String {
    format!("transform_{method}.json")
}

pub fn spectrum_file(method: &str) -> String {
    format!("spectrum_{method}.csv")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// The scenario with command line overrides applied.
    pub config: ScenarioConfig,
    pub derived: Derived,
    #[serde(default)]
    pub methods: Vec<MethodRecord>,
    #[serde(default)]
    pub comparisons: Vec<PairDifference>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanRecord>,
}

/// Quantities computed from the config before any method runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub r_s: f64,
    /// Conformal wall positions at `t = 0`.
    pub x1: f64,
    pub x2: f64,
    pub conformal_length: f64,
    pub n_modes: usize,
    pub duration: f64,
    pub trajectory: String,
    pub frequencies: Vec<f64>,
    pub max_speed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub m: usize,
    pub n: usize,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub interior: usize,
    pub alpha_alpha: f64,
    pub alpha_beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub method: String,
    pub transform: String,
    pub spectrum: String,
    pub dominant_beta: Entry,
    pub total_particles: f64,
    pub residuals: Residuals,
    /// Quadrature or step-doubling error estimate; zero where the method is exact.
    pub error_estimate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Mode pairs evaluated on a resonant limit branch (closed form only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub limit_branches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDifference {
    pub a: String,
    pub b: String,
    pub n_modes: usize,
    pub alpha_max: f64,
    pub alpha_frobenius: f64,
    pub beta_max: f64,
    pub beta_frobenius: f64,
    /// `|b - a| / |a|` for the dominant `beta` entry of `a`.
    pub dominant_relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub file: String,
    pub rows: usize,
    pub peaks: Vec<PeakRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakRecord {
    pub m: usize,
    pub n: usize,
    pub nu: f64,
    pub abs_beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonance: Option<String>,
}

/// Entrywise max and Frobenius norm of `a - b`.
pub fn matrix_difference(a: &crate::linalg::CMatrix, b: &crate::linalg::CMatrix) -> (f64, f64) {
    let d = a - b;
    (crate::linalg::max_abs(&d), d.norm())
}

pub fn difference(name_a: &str, a: &BogoliubovTransform, name_b: &str, b: &BogoliubovTransform) -> Result<PairDifference> {
    if a.n_modes() != b.n_modes() {
        return Err(Error::InvalidArgument(format!(
            "cannot compare {name_a} ({} modes) with {name_b} ({} modes)",
            a.n_modes(),
            b.n_modes()
        )));
    }
    let (alpha_max, alpha_frobenius) = matrix_difference(&a.alpha, &b.alpha);
    let (beta_max, beta_frobenius) = matrix_difference(&a.beta, &b.beta);
    let ((m, n), dom) = a.dominant_beta(a.n_modes());
    let dominant_relative = if dom.norm() > 0.0 { (b.beta_at(m, n) - dom).norm() / dom.norm() } else { 0.0 };
    Ok(PairDifference {
        a: name_a.to_string(),
        b: name_b.to_string(),
        n_modes: a.n_modes(),
        alpha_max,
        alpha_frobenius,
        beta_max,
        beta_frobenius,
        dominant_relative,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::NumericalFailure(format!("cannot serialize: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Collects rendered files and writes them once all of them exist.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_transform(path: &Path) -> Result<BogoliubovTransform> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Reads a `mode,mean_particles` table.
pub fn read_spectrum(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some("mode,mean_particles") {
        return Err(Error::Parse(format!("{}: missing header mode,mean_particles", path.display())));
    }
    let mut values = Vec::new();
    for (k, line) in lines.enumerate() {
        let bad = || Error::Parse(format!("{}:{}: malformed row {line:?}", path.display(), k + 2));
        let (mode, value) = line.split_once(',').ok_or_else(bad)?;
        if mode.parse::<usize>().ok() != Some(k + 1) {
            return Err(bad());
        }
        values.push(value.parse::<f64>().map_err(|_| bad())?);
    }
    Ok(values)
}
