//! Parameter files and `key=value` overrides.
//!
//! A parameter file is TOML with one flat key per parameter. Values are
//! strings carrying a unit tag, or bare numbers in SI / rad/s:
//!
//! ```toml
//! # coupled resonators
//! cavity_freq = "193 2pi·THz"
//! cavity_loss = "6.43 MHz"
//! coupling    = "0.5 omega_m"
//! radius      = "34.5 um"
//! pump_power  = "10 uW"
//! detuning    = "0.5 omega_m"
//! # mechanics
//! mech_freq   = "23.4 2pi·MHz"
//! mech_loss   = "0.24 MHz"
//! eff_mass    = "50 ng"
//! # defect, given directly ...
//! tls_freq     = "1 omega_m"
//! tls_loss     = "1 gamma"
//! tls_coupling = "1 MHz"
//! # ... or through material constants (all five, instead of tls_freq/tls_coupling)
//! # deformation_potential = "1 eV"
//! # tunnel_splitting = "0.8 omega_m"
//! # asymmetry = "0.6 omega_m"
//! # youngs_modulus = "72 GPa"
//! # mode_volume = "0.25 um^3"
//! validity_ratio = 0.05
//! ```
//!
//! Every key is optional; an overlay is applied on top of a base parameter
//! set. `omega_m` and `gamma` tags refer to the *resolved* ω_m and γ.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::params::{
    is_material_path, path_class, MaterialParams, ParamError, SystemParams, TlsSource,
};
use crate::units::{Quantity, Reference, Unit, UnitClass, UnitError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{}unknown key `{key}`", at(*line))]
    UnknownKey { key: String, line: usize },
    #[error("{}key `{key}`: expected {expected} ({}): {source}", at(*line), expected.accepted())]
    Unit {
        key: String,
        line: usize,
        expected: UnitClass,
        source: UnitError,
    },
    #[error("{}key `{key}`: expected a string with a unit tag or a number", at(*line))]
    BadValue { key: String, line: usize },
    #[error("{0}")]
    Conflict(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn at(line: usize) -> String {
    if line == 0 {
        "command line: ".to_string()
    } else {
        format!("line {line}: ")
    }
}

/// One parsed assignment. `line` is 0 for command-line overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub key: String,
    pub quantity: Quantity,
    pub line: usize,
}

/// An ordered set of assignments; later entries win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub entries: Vec<Entry>,
    pub validity_ratio: Option<f64>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn parse_entry(key: &str, raw: &str, line: usize) -> Result<Entry, ConfigError> {
    let class = path_class(key).ok_or_else(|| ConfigError::UnknownKey {
        key: key.to_string(),
        line,
    })?;
    let quantity = Quantity::parse(raw, class).map_err(|source| ConfigError::Unit {
        key: key.to_string(),
        line,
        expected: class,
        source,
    })?;
    let self_reference = matches!(
        (key, quantity.unit),
        ("mech_freq", Unit::Relative(Reference::OmegaM))
            | ("cavity_loss", Unit::Relative(Reference::Gamma))
    );
    if self_reference {
        return Err(ConfigError::Conflict(format!(
            "{}`{key}` cannot be expressed relative to itself",
            at(line)
        )));
    }
    Ok(Entry {
        key: key.to_string(),
        quantity,
        line,
    })
}

impl Overlay {
    /// Parse a parameter file.
    pub fn from_toml(text: &str) -> Result<Overlay, ConfigError> {
        let table: BTreeMap<String, toml::Spanned<toml::Value>> =
            toml::from_str(text).map_err(|e| ConfigError::Syntax {
                line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
                message: e.message().to_string(),
            })?;
        let mut overlay = Overlay::default();
        let mut items: Vec<_> = table.into_iter().collect();
        items.sort_by_key(|(_, v)| v.span().start);
        for (key, value) in items {
            let line = line_of(text, value.span().start);
            let raw = match value.get_ref() {
                toml::Value::String(s) => s.clone(),
                toml::Value::Float(x) => format!("{x:e}"),
                toml::Value::Integer(i) => i.to_string(),
                _ => return Err(ConfigError::BadValue { key, line }),
            };
            if key == "validity_ratio" {
                let ratio: f64 = raw
                    .trim()
                    .parse()
                    .map_err(|_| ConfigError::BadValue { key, line })?;
                overlay.validity_ratio = Some(ratio);
                continue;
            }
            overlay.entries.push(parse_entry(&key, &raw, line)?);
        }
        Ok(overlay)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Overlay, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Overlay::from_toml(&text)
    }

    /// Parse `key=value` command-line assignments.
    pub fn from_assignments<S: AsRef<str>>(items: &[S]) -> Result<Overlay, ConfigError> {
        let mut overlay = Overlay::default();
        for item in items {
            let item = item.as_ref();
            let (key, value) = item.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: 0,
                message: format!("expected key=value, got {item:?}"),
            })?;
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            if key == "validity_ratio" {
                overlay.validity_ratio =
                    Some(value.parse().map_err(|_| ConfigError::BadValue {
                        key: key.to_string(),
                        line: 0,
                    })?);
                continue;
            }
            overlay.entries.push(parse_entry(key, value, 0)?);
        }
        Ok(overlay)
    }

    /// Entries of `self` followed by those of `later` (which take precedence).
    pub fn then(mut self, later: Overlay) -> Overlay {
        self.entries.extend(later.entries);
        if later.validity_ratio.is_some() {
            self.validity_ratio = later.validity_ratio;
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.validity_ratio.is_none()
    }

    /// Keys assigned by this overlay.
    pub fn keys(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.key.as_str()).collect()
    }

    /// Apply on top of `base` and validate the result.
    pub fn apply(&self, base: &SystemParams) -> Result<SystemParams, ConfigError> {
        // last assignment per key wins
        let mut latest: BTreeMap<&str, &Entry> = BTreeMap::new();
        for e in &self.entries {
            latest.insert(e.key.as_str(), e);
        }

        let mut params = *base;
        if let Some(r) = self.validity_ratio {
            params.validity_ratio = r;
        }

        let material_keys: Vec<&str> = latest
            .keys()
            .copied()
            .filter(|k| is_material_path(k))
            .collect();
        if !material_keys.is_empty() {
            if latest.contains_key("tls_freq") || latest.contains_key("tls_coupling") {
                return Err(ConfigError::Conflict(
                    "give the TLS either directly (tls_freq, tls_coupling) or through \
                     material constants, not both"
                        .to_string(),
                ));
            }
            if let TlsSource::Direct(tls) = params.tls {
                let required = [
                    "deformation_potential",
                    "tunnel_splitting",
                    "asymmetry",
                    "youngs_modulus",
                    "mode_volume",
                ];
                let missing: Vec<_> = required
                    .iter()
                    .filter(|k| !latest.contains_key(*k))
                    .collect();
                if !missing.is_empty() {
                    return Err(ConfigError::Conflict(format!(
                        "material-derived TLS needs all material constants; missing {missing:?}"
                    )));
                }
                params.tls = TlsSource::Material {
                    material: MaterialParams {
                        deformation_potential: 0.0,
                        tunnel_splitting: 0.0,
                        asymmetry: 0.0,
                        youngs_modulus: 0.0,
                        mode_volume: 0.0,
                    },
                    tls_loss: tls.tls_loss,
                };
            }
        }

        // references first, so relative tags resolve against the final values
        let mut omega_m = params.mechanical.mech_freq;
        let mut gamma = params.optical.cavity_loss;
        let mech = latest.get("mech_freq").map(|e| e.quantity);
        let loss = latest.get("cavity_loss").map(|e| e.quantity);
        if let (Some(m), Some(l)) = (mech, loss) {
            if m.is_relative() && l.is_relative() {
                return Err(ConfigError::Conflict(
                    "mech_freq and cavity_loss cannot both be relative".to_string(),
                ));
            }
        }
        if let Some(q) = mech.filter(|q| !q.is_relative()) {
            omega_m = q.resolve(0.0, 0.0);
        }
        if let Some(q) = loss.filter(|q| !q.is_relative()) {
            gamma = q.resolve(0.0, 0.0);
        }
        if let Some(q) = mech.filter(|q| q.is_relative()) {
            omega_m = q.resolve(omega_m, gamma);
        }
        if let Some(q) = loss.filter(|q| q.is_relative()) {
            gamma = q.resolve(omega_m, gamma);
        }

        for (key, entry) in &latest {
            let value = entry.quantity.resolve(omega_m, gamma);
            params.set_unchecked(key, value).map_err(|e| match e {
                ParamError::WrongTlsMode { path, mode } => ConfigError::Conflict(format!(
                    "{}`{path}` cannot be set when the TLS is {mode}",
                    at(entry.line)
                )),
                other => other.into(),
            })?;
        }
        params.validate()?;
        Ok(params)
    }
}

/// Load a parameter file and apply it to `base`.
pub fn load(path: &std::path::Path, base: &SystemParams) -> Result<SystemParams, ConfigError> {
    Overlay::from_file(path)?.apply(base)
}

/// Serialize parameters in the file format, all values in SI / rad/s with
/// shortest round-trip formatting, so that parsing the output reproduces
/// `params` bit for bit.
pub fn to_config_string(params: &SystemParams) -> String {
    let mut out = String::new();
    let mut put = |key: &str, value: f64, unit: &str| {
        let _ = writeln!(out, "{key} = \"{value:e} {unit}\"");
    };
    let o = &params.optical;
    let m = &params.mechanical;
    put("cavity_freq", o.cavity_freq, "rad/s");
    put("cavity_loss", o.cavity_loss, "rad/s");
    put("coupling", o.coupling, "rad/s");
    put("radius", o.radius, "m");
    put("pump_power", o.pump_power, "W");
    put("detuning", o.detuning, "rad/s");
    put("mech_freq", m.mech_freq, "rad/s");
    put("mech_loss", m.mech_loss, "rad/s");
    put("eff_mass", m.eff_mass, "kg");
    match &params.tls {
        TlsSource::Direct(tls) => {
            put("tls_freq", tls.tls_freq, "rad/s");
            put("tls_loss", tls.tls_loss, "rad/s");
            put("tls_coupling", tls.coupling, "rad/s");
        }
        TlsSource::Material { material, tls_loss } => {
            put("tls_loss", *tls_loss, "rad/s");
            put("deformation_potential", material.deformation_potential, "J");
            put("tunnel_splitting", material.tunnel_splitting, "rad/s");
            put("asymmetry", material.asymmetry, "rad/s");
            put("youngs_modulus", material.youngs_modulus, "Pa");
            put("mode_volume", material.mode_volume, "m^3");
        }
    }
    let _ = writeln!(out, "validity_ratio = {:e}", params.validity_ratio);
    out
}
