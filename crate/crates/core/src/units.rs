//! Physical constants and unit-tagged quantity parsing.
//!
//! Every rate and frequency is stored in rad/s. The plain frequency tags
//! (`Hz`, `kHz`, `MHz`, `GHz`, `THz`) are *rate* tags: `"6.43 MHz"` means
//! 6.43e6 rad/s with no factor of 2π. Use the `2pi·` prefix (`"23.4 2pi·MHz"`,
//! also spelled `2pi*MHz`, `2pi MHz` or `2π·MHz`) to multiply by 2π.
//!
//! Two relative tags are understood for frequencies: `omega_m` (multiples of
//! the mechanical frequency) and `gamma` (multiples of the optical loss). They
//! are resolved by [`Quantity::resolve`] once the reference values are known.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Elementary charge, J per eV.
pub const EV: f64 = 1.602_176_634e-19;

/// Dimension of a parsed quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitClass {
    /// Rates and angular frequencies (rad/s).
    Frequency,
    Power,
    Length,
    Mass,
    Energy,
    Pressure,
    Volume,
    Dimensionless,
}

impl UnitClass {
    /// Tags accepted for this class, for error messages.
    pub fn accepted(self) -> &'static str {
        match self {
            UnitClass::Frequency => {
                "rad/s, Hz, kHz, MHz, GHz, THz, 2pi·<prefix>Hz, omega_m, gamma"
            }
            UnitClass::Power => "W, mW, uW (µW), nW",
            UnitClass::Length => "m, mm, um (µm), nm",
            UnitClass::Mass => "kg, g, mg, ug (µg), ng, pg",
            UnitClass::Energy => "J, eV, meV",
            UnitClass::Pressure => "Pa, kPa, MPa, GPa",
            UnitClass::Volume => "m^3, mm^3, um^3 (µm^3)",
            UnitClass::Dimensionless => "no unit",
        }
    }
}

impl fmt::Display for UnitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            UnitClass::Frequency => "frequency",
            UnitClass::Power => "power",
            UnitClass::Length => "length",
            UnitClass::Mass => "mass",
            UnitClass::Energy => "energy",
            UnitClass::Pressure => "pressure",
            UnitClass::Volume => "volume",
            UnitClass::Dimensionless => "dimensionless",
        };
        f.write_str(s)
    }
}

/// A relative reference a frequency may be expressed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    OmegaM,
    Gamma,
}

/// A unit tag with its scale to SI (or rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Unit {
    Absolute { class: UnitClass, scale: f64 },
    Relative(Reference),
}

impl Unit {
    pub fn class(&self) -> UnitClass {
        match self {
            Unit::Absolute { class, .. } => *class,
            Unit::Relative(_) => UnitClass::Frequency,
        }
    }

    /// Parse a unit tag such as `MHz`, `2pi·MHz`, `uW`, `omega_m`.
    pub fn parse(tag: &str) -> Option<Unit> {
        let tag = tag.trim();
        if let Some(rest) = strip_two_pi(tag) {
            let scale = frequency_prefix(rest)?;
            return Some(Unit::Absolute {
                class: UnitClass::Frequency,
                scale: 2.0 * PI * scale,
            });
        }
        if let Some(scale) = frequency_prefix(tag) {
            return Some(Unit::Absolute {
                class: UnitClass::Frequency,
                scale,
            });
        }
        let abs = |class, scale| Some(Unit::Absolute { class, scale });
        match tag {
            "rad/s" | "1/s" | "s^-1" => abs(UnitClass::Frequency, 1.0),
            "omega_m" | "ω_m" | "wm" => Some(Unit::Relative(Reference::OmegaM)),
            "gamma" | "γ" => Some(Unit::Relative(Reference::Gamma)),
            "W" => abs(UnitClass::Power, 1.0),
            "mW" => abs(UnitClass::Power, 1e-3),
            "uW" | "µW" | "μW" => abs(UnitClass::Power, 1e-6),
            "nW" => abs(UnitClass::Power, 1e-9),
            "m" => abs(UnitClass::Length, 1.0),
            "mm" => abs(UnitClass::Length, 1e-3),
            "um" | "µm" | "μm" => abs(UnitClass::Length, 1e-6),
            "nm" => abs(UnitClass::Length, 1e-9),
            "kg" => abs(UnitClass::Mass, 1.0),
            "g" => abs(UnitClass::Mass, 1e-3),
            "mg" => abs(UnitClass::Mass, 1e-6),
            "ug" | "µg" | "μg" => abs(UnitClass::Mass, 1e-9),
            "ng" => abs(UnitClass::Mass, 1e-12),
            "pg" => abs(UnitClass::Mass, 1e-15),
            "J" => abs(UnitClass::Energy, 1.0),
            "eV" => abs(UnitClass::Energy, EV),
            "meV" => abs(UnitClass::Energy, 1e-3 * EV),
            "Pa" => abs(UnitClass::Pressure, 1.0),
            "kPa" => abs(UnitClass::Pressure, 1e3),
            "MPa" => abs(UnitClass::Pressure, 1e6),
            "GPa" => abs(UnitClass::Pressure, 1e9),
            "m^3" | "m3" => abs(UnitClass::Volume, 1.0),
            "mm^3" | "mm3" => abs(UnitClass::Volume, 1e-9),
            "um^3" | "µm^3" | "μm^3" | "um3" => abs(UnitClass::Volume, 1e-18),
            _ => None,
        }
    }
}

fn strip_two_pi(tag: &str) -> Option<&str> {
    for prefix in ["2pi", "2π"] {
        if let Some(rest) = tag.strip_prefix(prefix) {
            let rest = rest.trim_start_matches(['·', '*', '×', 'x', ' ']);
            return Some(rest);
        }
    }
    None
}

fn frequency_prefix(tag: &str) -> Option<f64> {
    match tag {
        "Hz" => Some(1.0),
        "kHz" => Some(1e3),
        "MHz" => Some(1e6),
        "GHz" => Some(1e9),
        "THz" => Some(1e12),
        _ => None,
    }
}

/// Convert a value in MHz-tagged rate units to rad/s.
pub fn mhz(value: f64) -> f64 {
    value * 1e6
}

/// Convert a value in `2pi·MHz` to rad/s.
pub fn two_pi_mhz(value: f64) -> f64 {
    2.0 * PI * value * 1e6
}

/// A number with its unit, not yet resolved against any reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UnitError {
    #[error("cannot parse number in {0:?}")]
    BadNumber(String),
    #[error("unknown unit tag {0:?}")]
    UnknownUnit(String),
    #[error("expected a {expected} quantity ({}), got {found} in {text:?}", expected.accepted())]
    WrongClass {
        expected: UnitClass,
        found: UnitClass,
        text: String,
    },
}

impl Quantity {
    /// Parse `"<number> [unit]"`. A bare number is in SI base units (rad/s
    /// for frequencies).
    pub fn parse(text: &str, expected: UnitClass) -> Result<Quantity, UnitError> {
        let trimmed = text.trim();
        let (num, tag) = match trimmed.find(char::is_whitespace) {
            Some(idx) => (&trimmed[..idx], trimmed[idx..].trim()),
            None => (trimmed, ""),
        };
        let value: f64 = num
            .parse()
            .map_err(|_| UnitError::BadNumber(text.to_string()))?;
        let unit = if tag.is_empty() {
            let scale = 1.0;
            Unit::Absolute {
                class: expected,
                scale,
            }
        } else {
            Unit::parse(tag).ok_or_else(|| UnitError::UnknownUnit(tag.to_string()))?
        };
        if unit.class() != expected {
            return Err(UnitError::WrongClass {
                expected,
                found: unit.class(),
                text: text.to_string(),
            });
        }
        Ok(Quantity { value, unit })
    }

    /// Value in SI / rad/s given the reference frequencies.
    pub fn resolve(&self, omega_m: f64, gamma: f64) -> f64 {
        match self.unit {
            Unit::Absolute { scale, .. } => self.value * scale,
            Unit::Relative(Reference::OmegaM) => self.value * omega_m,
            Unit::Relative(Reference::Gamma) => self.value * gamma,
        }
    }

    pub fn is_relative(&self) -> bool {
        matches!(self.unit, Unit::Relative(_))
    }
}
