//! CSV and manifest writers. Every CSV starts with a `#` comment stating the
//! unit system; floats are written with 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hhgbox::observables::DipoleSeries;
use hhgbox::simulation::{BasisConvergence, RunResult};
use hhgbox::{render_config, PowerSpectrum, SimulationConfig, Window};
use serde::Serialize;

const UNITS: &str =
    "# atomic units (hbar = m_e = e = 1): t in hbar/E_h, omega in E_h/hbar, dipole in bohr";

fn write(path: &Path, body: &str) -> Result<PathBuf> {
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(path.to_path_buf())
}

pub fn dipole_csv(series: &DipoleSeries) -> String {
    let mut out = format!("{UNITS}\nt,dipole\n");
    for (t, d) in series.times.iter().zip(&series.values) {
        let _ = writeln!(out, "{t:.16e},{d:.16e}");
    }
    out
}

pub fn spectrum_csv(spec: &PowerSpectrum) -> String {
    let mut out = format!("{UNITS}\nomega,power\n");
    for (w, p) in spec.omegas.iter().zip(&spec.values) {
        let _ = writeln!(out, "{w:.16e},{p:.16e}");
    }
    out
}

pub fn harmonics_csv(harmonics: &[(usize, f64)]) -> String {
    let mut out = format!("{UNITS}\nharmonic_order,power\n");
    for (k, p) in harmonics {
        let _ = writeln!(out, "{k},{p:.16e}");
    }
    out
}

/// Rows `(param_value, harmonic_order, power)`.
pub fn sweep_csv(rows: &[(f64, usize, f64)]) -> String {
    let mut out = format!("{UNITS}\nparam_value,harmonic_order,power\n");
    for (v, k, p) in rows {
        let _ = writeln!(out, "{v:.16e},{k},{p:.16e}");
    }
    out
}

#[derive(Debug, Serialize)]
pub struct NormFlag {
    pub max_drift: f64,
    pub limit: f64,
    pub ok: bool,
}

#[derive(Debug, Serialize)]
pub struct BasisFlag {
    pub basis_size: usize,
    pub reference_size: usize,
    pub max_relative_change: f64,
    pub worst_harmonic: usize,
    pub limit: f64,
    pub ok: bool,
}

impl From<&BasisConvergence> for BasisFlag {
    fn from(c: &BasisConvergence) -> Self {
        Self {
            basis_size: c.basis_size,
            reference_size: c.reference_size,
            max_relative_change: c.max_relative_change,
            worst_harmonic: c.worst_order,
            limit: hhgbox::simulation::BASIS_CONVERGENCE_LIMIT,
            ok: c.converged,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Flags {
    pub norm: NormFlag,
    pub basis: BasisFlag,
    /// Only set when a non-default taper was requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<&'static str>,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub software: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Resolved configuration, one `key = value` entry per key.
    pub config: BTreeMap<String, String>,
    pub spectrum_grid: String,
    pub wall_clock_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flags: Option<Flags>,
    pub outputs: Vec<String>,
}

pub fn config_echo(config: &SimulationConfig) -> BTreeMap<String, String> {
    render_config(config)
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

pub fn window_name(window: Window) -> Option<&'static str> {
    match window {
        Window::None => None,
        Window::Hann => Some("hann (not part of the reference spectrum definition)"),
    }
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<PathBuf> {
    let body = serde_json::to_string_pretty(manifest)? + "\n";
    write(&dir.join("manifest.json"), &body)
}

/// Writes the three data files of a run and returns their paths.
pub fn write_run(dir: &Path, run: &RunResult) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(vec![
        write(&dir.join("dipole.csv"), &dipole_csv(&run.dipole))?,
        write(&dir.join("spectrum.csv"), &spectrum_csv(&run.spectrum))?,
        write(&dir.join("harmonics.csv"), &harmonics_csv(&run.harmonics))?,
    ])
}

pub fn write_sweep(path: &Path, rows: &[(f64, usize, f64)]) -> Result<PathBuf> {
    write(path, &sweep_csv(rows))
}
