//! Flat `key = value` configuration files for [`SimulationConfig`].
//!
//! Blank lines and `#` comments are ignored. Every key is optional and
//! falls back to [`SimulationConfig::baseline`]; unknown or repeated keys
//! are errors.
//!
//! ```text
//! a = 100
//! b = 10
//! omega0 = 1
//! Z = 1
//! l = 0
//! N = 100
//! initial = box        # or: eigenstate
//! n1 = 1               # box mode index, initial = box
//! k = 1                # eigenstate index, initial = eigenstate
//! r_ref = 110          # static box radius, initial = eigenstate
//! T = 100
//! samples = 4001
//! tolerance = 1e-10
//! quadrature_order = 64
//! ```
//!
//! With `initial = eigenstate` and no `r_ref`, the static box radius is taken
//! to be `r0(0) = a + b`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::boundary::BreathingLaw;
use crate::error::{Error, Result};
use crate::propagator::{InitialState, SimulationConfig};

pub const KEYS: [&str; 14] = [
    "a",
    "b",
    "omega0",
    "Z",
    "l",
    "N",
    "initial",
    "n1",
    "k",
    "r_ref",
    "T",
    "samples",
    "tolerance",
    "quadrature_order",
];

struct Entry {
    line: usize,
    value: String,
}

fn parse_value<T: FromStr>(entries: &HashMap<&str, Entry>, key: &str, default: T) -> Result<T> {
    match entries.get(key) {
        None => Ok(default),
        Some(e) => e.value.parse().map_err(|_| Error::Config {
            line: e.line,
            msg: format!("`{key}`: cannot parse `{}`", e.value),
        }),
    }
}

/// Parses configuration text. Physical constraints such as `a > b` are
/// checked before returning.
pub fn parse_config(text: &str) -> Result<SimulationConfig> {
    let mut entries: HashMap<&str, Entry> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            });
        };
        let key = key.trim();
        let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
            return Err(Error::Config {
                line,
                msg: format!("unknown key `{key}`"),
            });
        };
        let value = value.trim().to_string();
        if value.is_empty() {
            return Err(Error::Config {
                line,
                msg: format!("`{key}` has no value"),
            });
        }
        if let Some(prev) = entries.insert(known, Entry { line, value }) {
            return Err(Error::Config {
                line,
                msg: format!("`{key}` already set on line {}", prev.line),
            });
        }
    }

    let base = SimulationConfig::baseline();
    let a = parse_value(&entries, "a", base.law.a)?;
    let b = parse_value(&entries, "b", base.law.b)?;
    let omega0 = parse_value(&entries, "omega0", base.law.omega0)?;
    let law = BreathingLaw::new(a, b, omega0)?;

    let initial_kind: String = parse_value(&entries, "initial", "box".to_string())?;
    let mismatched = |key: &str, kind: &str| -> Result<()> {
        match entries.get(key) {
            Some(e) => Err(Error::Config {
                line: e.line,
                msg: format!("`{key}` does not apply to initial = {kind}"),
            }),
            None => Ok(()),
        }
    };
    let initial = match initial_kind.as_str() {
        "box" => {
            mismatched("k", "box")?;
            mismatched("r_ref", "box")?;
            InitialState::BoxMode {
                n: parse_value(&entries, "n1", 1)?,
            }
        }
        "eigenstate" => {
            mismatched("n1", "eigenstate")?;
            InitialState::Eigenstate {
                k: parse_value(&entries, "k", 1)?,
                r_ref: parse_value(&entries, "r_ref", law.radius(0.0))?,
            }
        }
        other => {
            let line = entries["initial"].line;
            return Err(Error::Config {
                line,
                msg: format!("`initial` must be `box` or `eigenstate`, got `{other}`"),
            });
        }
    };

    let config = SimulationConfig {
        law,
        z: parse_value(&entries, "Z", base.z)?,
        l: parse_value(&entries, "l", base.l)?,
        basis_size: parse_value(&entries, "N", base.basis_size)?,
        initial,
        total_time: parse_value(&entries, "T", base.total_time)?,
        samples: parse_value(&entries, "samples", base.samples)?,
        tolerance: parse_value(&entries, "tolerance", base.tolerance)?,
        quadrature_order: parse_value(&entries, "quadrature_order", base.quadrature_order)?,
    };
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<SimulationConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Every key with its resolved value, in [`KEYS`] order. Parsing the output
/// reproduces `config`.
pub fn render_config(config: &SimulationConfig) -> String {
    let mut out = String::new();
    let law = &config.law;
    let _ = writeln!(out, "a = {:?}", law.a);
    let _ = writeln!(out, "b = {:?}", law.b);
    let _ = writeln!(out, "omega0 = {:?}", law.omega0);
    let _ = writeln!(out, "Z = {:?}", config.z);
    let _ = writeln!(out, "l = {}", config.l);
    let _ = writeln!(out, "N = {}", config.basis_size);
    match config.initial {
        InitialState::BoxMode { n } => {
            let _ = writeln!(out, "initial = box");
            let _ = writeln!(out, "n1 = {n}");
        }
        InitialState::Eigenstate { k, r_ref } => {
            let _ = writeln!(out, "initial = eigenstate");
            let _ = writeln!(out, "k = {k}");
            let _ = writeln!(out, "r_ref = {r_ref:?}");
        }
    }
    let _ = writeln!(out, "T = {:?}", config.total_time);
    let _ = writeln!(out, "samples = {}", config.samples);
    let _ = writeln!(out, "tolerance = {:?}", config.tolerance);
    let _ = writeln!(out, "quadrature_order = {}", config.quadrature_order);
    out
}
