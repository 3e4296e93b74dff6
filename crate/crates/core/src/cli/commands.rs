// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::config::{build_scenario, parse_scenario, MethodName, Scenario};
use super::output::{
    difference, read_manifest, read_spectrum, read_transform, spectrum_file, to_json, transform_file, Derived, Entry,
    Manifest, MethodRecord, OutputSet, PairDifference, PeakRecord, Residuals, ScanRecord, COMPARISON_FILE,
    MANIFEST_FILE, SCAN_FILE,
};
use crate::error::{Error, Result};
use crate::integrator::integrate;
use crate::linalg::{cis, CMatrix};
use crate::perturbative::{dyson_transform, linear_grid, oscillating_beta_closed_form, resonance_scan, ScanOptions};
use crate::scattering::{evolve, extract_coefficients};
use crate::symplectic::{identity_residuals, vacuum_particle_numbers, BogoliubovTransform, FrequencyMatrix};

const DEFAULT_OUT_DIR: &str = "dce-out";

/// Flags shared by every command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GlobalOptions {
    /// Worker threads; 0 lets the pool pick one per core.
    pub workers: usize,
    pub out_dir: Option<PathBuf>,
    /// Replaces every tolerance of the config (and bounds `compare` differences).
    pub tolerance: Option<f64>,
}

/// What a command produced: the text for standard output and the files written.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub stdout: String,
    pub files: Vec<PathBuf>,
}

/// Loads a scenario file and applies the command line overrides before validation.
pub fn load_with_overrides(path: &Path, options: &GlobalOptions) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut config = parse_scenario(&text).map_err(|e| e.context(&path.display().to_string()))?;
    if let Some(tol) = options.tolerance {
        config.run.tolerance = tol;
        config.run.integrator_tolerance = tol;
    }
    build_scenario(config).map_err(|e| e.context(&path.display().to_string()))
}

fn output_dir(scenario: &Scenario, options: &GlobalOptions) -> PathBuf {
    options
        .out_dir
        .clone()
        .or_else(|| scenario.config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if workers == 0 {
        return job();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::NumericalFailure(format!("cannot start worker pool: {e}")))?
        .install(job)
}

struct MethodResult {
    name: MethodName,
    transform: BogoliubovTransform,
    error_estimate: f64,
    steps: Option<usize>,
    limit_branches: Vec<String>,
}

fn run_method(scenario: &Scenario, name: MethodName) -> Result<MethodResult> {
    let cavity = &scenario.cavity;
    let traj = &scenario.trajectory;
    let quad = scenario.quadrature();
    let mut result = MethodResult { name, transform: BogoliubovTransform::identity(cavity.n_modes()), error_estimate: 0.0, steps: None, limit_branches: Vec::new() };
    match name {
        MethodName::Dyson => {
            let r = dyson_transform(traj, cavity, &FrequencyMatrix::from_config(cavity), &quad)?;
            result.transform = r.transform;
            result.error_estimate = r.quadrature_error;
        }
        MethodName::Integrate => {
            let r = integrate(traj, cavity, &scenario.integration_settings())?;
            result.transform = r.transform;
            result.error_estimate = r.error_estimate;
            result.steps = Some(r.steps);
        }
        MethodName::Scattering => {
            let state = evolve(traj, cavity, &quad)?;
            result.error_estimate = state.quadrature_error;
            result.transform = extract_coefficients(&state, cavity)?.transform;
        }
        MethodName::ClosedForm => {
            let osc = scenario.oscillating.as_ref().ok_or_else(|| {
                Error::UnsupportedTrajectory("the closed form covers the oscillating wall only".into())
            })?;
            let n = cavity.n_modes();
            let t_end = osc.duration();
            let mut alpha = CMatrix::zeros(n, n);
            let mut beta = CMatrix::zeros(n, n);
            for i in 0..n {
                // zeroth order only: the closed form carries no alpha correction
                alpha[(i, i)] = cis(osc.base_frequency(&scenario.spacetime, i + 1)? * t_end);
                for j in 0..n {
                    let v = oscillating_beta_closed_form(osc, &scenario.spacetime, i + 1, j + 1, true)?;
                    if v.branch != crate::perturbative::EvaluationBranch::Regular {
                        result.limit_branches.push(format!("({},{}) {}", i + 1, j + 1, v.branch.as_str()));
                    }
                    beta[(i, j)] = v.value;
                }
            }
            result.transform = BogoliubovTransform::new(alpha, beta)?;
        }
    }
    Ok(result)
}

fn entry(m: usize, n: usize, v: Complex64) -> Entry {
    Entry { m, n, re: v.re, im: v.im, abs: v.norm() }
}

fn derived(scenario: &Scenario) -> Derived {
    let cavity = &scenario.cavity;
    Derived {
        r_s: scenario.spacetime.r_s(),
        x1: cavity.x1(),
        x2: cavity.x2(),
        conformal_length: cavity.length(),
        n_modes: cavity.n_modes(),
        duration: scenario.trajectory.duration(),
        trajectory: scenario.radial.kind_name().to_string(),
        frequencies: cavity.frequencies(),
        max_speed: scenario.trajectory.validate().max_speed,
        nu: scenario.oscillating.map(|o| o.nu),
        epsilon: scenario.oscillating.map(|o| o.epsilon()),
    }
}

fn scan_outputs(scenario: &Scenario, workers: usize, files: &mut OutputSet, out: &mut String) -> Result<Option<ScanRecord>> {
    let Some(block) = &scenario.config.scan else {
        return Ok(None);
    };
    let osc = scenario
        .oscillating
        .as_ref()
        .ok_or_else(|| Error::UnsupportedTrajectory("scans drive the oscillating wall".into()))?;
    let grid = linear_grid(block.nu_min, block.nu_max, block.points)?;
    let pairs: Vec<(usize, usize)> = block.pairs.iter().map(|p| (p[0], p[1])).collect();
    let options = ScanOptions { workers, peak_fraction: block.peak_fraction };
    let scan = resonance_scan(osc, &scenario.spacetime, &grid, &pairs, &options).map_err(|e| e.context("scan"))?;
    files.add(SCAN_FILE, scan.to_csv());
    let peaks: Vec<PeakRecord> = scan
        .peaks
        .iter()
        .map(|p| PeakRecord { m: p.m, n: p.n, nu: p.nu, abs_beta: p.abs_beta, resonance: p.resonance.map(|r| r.as_str().to_string()) })
        .collect();
    let _ = writeln!(out, "scan: {} rows, {} peaks", scan.rows.len(), peaks.len());
    for p in &peaks {
        let _ = writeln!(
            out,
            "  peak ({},{}) nu = {:.12e} |beta| = {:.6e} {}",
            p.m,
            p.n,
            p.nu,
            p.abs_beta,
            p.resonance.as_deref().unwrap_or("unclassified")
        );
    }
    Ok(Some(ScanRecord { file: SCAN_FILE.to_string(), rows: scan.rows.len(), peaks }))
}

fn finish(manifest: &Manifest, mut files: OutputSet, dir: &Path, mut stdout: String) -> Result<Report> {
    files.add(MANIFEST_FILE, to_json(manifest)?);
    let written = files.write_to(dir)?;
    let _ = writeln!(stdout, "wrote {} files to {}", written.len(), dir.display());
    Ok(Report { stdout, files: written })
}

/// Runs every requested method, writes the tables and the manifest.
pub fn run(config_path: &Path, options: &GlobalOptions) -> Result<Report> {
    let scenario = load_with_overrides(config_path, options)?;
    let dir = output_dir(&scenario, options);
    let methods = scenario.config.run.methods.clone();

    let results: Vec<MethodResult> = with_pool(options.workers, || {
        use rayon::prelude::*;
        methods
            .par_iter()
            .map(|&m| run_method(&scenario, m).map_err(|e| e.context(&format!("method {}", m.as_str()))))
            .collect::<Result<Vec<_>>>()
    })?;

    let n = scenario.cavity.n_modes();
    let interior = (n / 2).max(1);
    let mut files = OutputSet::default();
    let mut stdout = String::new();
    let mut records = Vec::new();
    for r in &results {
        let name = r.name.as_str();
        let spectrum = vacuum_particle_numbers(&r.transform);
        let (res_aa, res_ab) = identity_residuals(&r.transform, interior)?;
        let ((m, k), dom) = r.transform.dominant_beta(n);
        files.add(transform_file(name), to_json(&r.transform)?);
        files.add(spectrum_file(name), spectrum.to_csv());
        let _ = writeln!(
            stdout,
            "{name}: dominant beta({m},{k}) = {:.9e}{:+.9e}i |beta| = {:.6e}, total particles {:.6e}, residuals {:.3e} {:.3e} (interior {interior})",
            dom.re,
            dom.im,
            dom.norm(),
            spectrum.total(),
            res_aa,
            res_ab
        );
        records.push(MethodRecord {
            method: name.to_string(),
            transform: transform_file(name),
            spectrum: spectrum_file(name),
            dominant_beta: entry(m, k, dom),
            total_particles: spectrum.total(),
            residuals: Residuals { interior, alpha_alpha: res_aa, alpha_beta: res_ab },
            error_estimate: r.error_estimate,
            steps: r.steps,
            limit_branches: r.limit_branches.clone(),
        });
    }
    let mut comparisons = Vec::new();
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            let d = difference(a.name.as_str(), &a.transform, b.name.as_str(), &b.transform)?;
            let _ = writeln!(
                stdout,
                "{} vs {}: max |d beta| = {:.3e}, max |d alpha| = {:.3e}, dominant relative {:.3e}",
                d.a, d.b, d.beta_max, d.alpha_max, d.dominant_relative
            );
            comparisons.push(d);
        }
    }
    let scan = scan_outputs(&scenario, options.workers, &mut files, &mut stdout)?;
    let manifest = Manifest {
        tool: "dce".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "run".into(),
        config: scenario.config.clone(),
        derived: derived(&scenario),
        methods: records,
        comparisons,
        scan,
    };
    finish(&manifest, files, &dir, stdout)
}

/// Evaluates the `[scan]` block only.
pub fn scan(config_path: &Path, options: &GlobalOptions) -> Result<Report> {
    let scenario = load_with_overrides(config_path, options)?;
    if scenario.config.scan.is_none() {
        return Err(Error::Validation(vec![format!("{}: the scan command needs a [scan] block", config_path.display())]));
    }
    let dir = output_dir(&scenario, options);
    let mut files = OutputSet::default();
    let mut stdout = String::new();
    let scan = scan_outputs(&scenario, options.workers, &mut files, &mut stdout)?;
    let manifest = Manifest {
        tool: "dce".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "scan".into(),
        config: scenario.config.clone(),
        derived: derived(&scenario),
        methods: Vec::new(),
        comparisons: Vec::new(),
        scan,
    };
    finish(&manifest, files, &dir, stdout)
}

/// Checks a scenario without computing anything.
pub fn validate(config_path: &Path, options: &GlobalOptions) -> Result<Report> {
    let scenario = load_with_overrides(config_path, options)?;
    let stdout = format!(
        "ok: {} modes, {} trajectory, duration {}, methods [{}]\n",
        scenario.cavity.n_modes(),
        scenario.radial.kind_name(),
        scenario.trajectory.duration(),
        scenario.config.run.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(", ")
    );
    Ok(Report { stdout, files: Vec::new() })
}

/// One compared pair of methods from two manifests.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ComparedPair {
    #[serde(flatten)]
    pub difference: PairDifference,
    pub spectrum_max: f64,
    pub spectrum_frobenius: f64,
    pub total_a: f64,
    pub total_b: f64,
    /// `total_b / total_a`; absent when `a` creates no particles.
    pub total_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ComparisonReport {
    pub pairs: Vec<ComparedPair>,
    pub tolerance: Option<f64>,
    pub within_tolerance: Option<bool>,
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Differences of the transforms and spectra recorded by two manifests.
///
/// Methods present in both manifests are paired by name; when the manifests
/// share no method every method of `a` is paired with every method of `b`.
pub fn compare(manifest_a: &Path, manifest_b: &Path, options: &GlobalOptions) -> Result<Report> {
    let a = read_manifest(manifest_a)?;
    let b = read_manifest(manifest_b)?;
    if a.methods.is_empty() || b.methods.is_empty() {
        return Err(Error::InvalidArgument("both manifests must record at least one method".into()));
    }
    let (dir_a, dir_b) = (manifest_dir(manifest_a), manifest_dir(manifest_b));
    let shared: Vec<(&MethodRecord, &MethodRecord)> = a
        .methods
        .iter()
        .filter_map(|ra| b.methods.iter().find(|rb| rb.method == ra.method).map(|rb| (ra, rb)))
        .collect();
    let pairs: Vec<(&MethodRecord, &MethodRecord)> = if shared.is_empty() {
        a.methods.iter().flat_map(|ra| b.methods.iter().map(move |rb| (ra, rb))).collect()
    } else {
        shared
    };

    let mut stdout = String::new();
    let mut compared = Vec::new();
    for (ra, rb) in pairs {
        let ta = read_transform(&dir_a.join(&ra.transform))?;
        let tb = read_transform(&dir_b.join(&rb.transform))?;
        let name_a = format!("a:{}", ra.method);
        let name_b = format!("b:{}", rb.method);
        let difference = difference(&name_a, &ta, &name_b, &tb)?;
        let sa = read_spectrum(&dir_a.join(&ra.spectrum))?;
        let sb = read_spectrum(&dir_b.join(&rb.spectrum))?;
        if sa.len() != sb.len() {
            return Err(Error::InvalidArgument(format!("spectra of {name_a} and {name_b} cover different mode counts")));
        }
        let spectrum_max = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let spectrum_frobenius = sa.iter().zip(&sb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        let (total_a, total_b) = (sa.iter().sum::<f64>(), sb.iter().sum::<f64>());
        let total_ratio = (total_a > 0.0).then(|| total_b / total_a);
        let _ = writeln!(
            stdout,
            "{name_a} vs {name_b}: beta max {:.3e} frobenius {:.3e}; alpha max {:.3e} frobenius {:.3e}; spectrum max {:.3e}; particle ratio {}",
            difference.beta_max,
            difference.beta_frobenius,
            difference.alpha_max,
            difference.alpha_frobenius,
            spectrum_max,
            total_ratio.map_or("n/a".to_string(), |r| format!("{r:.12}"))
        );
        compared.push(ComparedPair { difference, spectrum_max, spectrum_frobenius, total_a, total_b, total_ratio });
    }
    let within_tolerance = options
        .tolerance
        .map(|tol| compared.iter().all(|p| p.difference.alpha_max.max(p.difference.beta_max) <= tol));
    let report = ComparisonReport { pairs: compared, tolerance: options.tolerance, within_tolerance };
    let mut files = Vec::new();
    if let Some(dir) = &options.out_dir {
        let mut set = OutputSet::default();
        set.add(COMPARISON_FILE, to_json(&report)?);
        files = set.write_to(dir)?;
        let _ = writeln!(stdout, "wrote {}", files[0].display());
    }
    if within_tolerance == Some(false) {
        return Err(Error::NumericalFailure(format!(
            "differences exceed the tolerance {}\n{}",
            options.tolerance.unwrap_or_default(),
            stdout.trim_end()
        )));
    }
    Ok(Report { stdout, files })
}
