//! Physical parameters of the defect-coupled optomechanical system.
//!
//! All rates and frequencies are rad/s, everything else SI. Parameters are
//! plain values; [`SystemParams::validate`] checks every invariant, and the
//! constructors and setters call it.

use serde::{Deserialize, Serialize};

use crate::units::{two_pi_mhz, UnitClass, HBAR};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("invalid parameter `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("unknown parameter path `{0}`")]
    UnknownPath(String),
    #[error("parameter `{path}` is not available when the TLS is {mode}")]
    WrongTlsMode { path: String, mode: &'static str },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ParamError {
    ParamError::Invalid {
        field,
        reason: reason.into(),
    }
}

fn require(field: &'static str, value: f64, ok: bool, what: &str) -> Result<(), ParamError> {
    if !value.is_finite() {
        return Err(invalid(field, format!("must be finite, got {value}")));
    }
    if !ok {
        return Err(invalid(field, format!("must be {what}, got {value}")));
    }
    Ok(())
}

/// Two coupled whispering-gallery resonators and their pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalParams {
    /// Cavity resonance ω_c (rad/s).
    pub cavity_freq: f64,
    /// Cavity loss γ (rad/s).
    pub cavity_loss: f64,
    /// Inter-cavity tunnelling J (rad/s).
    pub coupling: f64,
    /// Resonator radius R (m).
    pub radius: f64,
    /// Pump power P_l (W).
    pub pump_power: f64,
    /// Pump detuning Δ = ω_l − ω_c (rad/s).
    pub detuning: f64,
}

impl OpticalParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        require("cavity_freq", self.cavity_freq, self.cavity_freq > 0.0, "> 0")?;
        require("cavity_loss", self.cavity_loss, self.cavity_loss > 0.0, "> 0")?;
        require("coupling", self.coupling, self.coupling >= 0.0, ">= 0")?;
        require("radius", self.radius, self.radius > 0.0, "> 0")?;
        require("pump_power", self.pump_power, self.pump_power >= 0.0, ">= 0")?;
        require("detuning", self.detuning, true, "")?;
        let omega_l = self.cavity_freq + self.detuning;
        if omega_l <= 0.0 {
            return Err(invalid(
                "detuning",
                format!("pump frequency ω_c + Δ must be > 0, got {omega_l}"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicalParams {
    /// ω_m (rad/s).
    pub mech_freq: f64,
    /// γ_m (rad/s).
    pub mech_loss: f64,
    /// Effective mass m (kg).
    pub eff_mass: f64,
}

impl MechanicalParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        require("mech_freq", self.mech_freq, self.mech_freq > 0.0, "> 0")?;
        require("mech_loss", self.mech_loss, self.mech_loss > 0.0, "> 0")?;
        require("eff_mass", self.eff_mass, self.eff_mass > 0.0, "> 0")?;
        Ok(())
    }

    /// Zero-point displacement x0 = sqrt(ħ / (2 m ω_m)).
    pub fn zero_point_displacement(&self) -> f64 {
        (HBAR / (2.0 * self.eff_mass * self.mech_freq)).sqrt()
    }
}

/// A single two-level defect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsParams {
    /// ω_q (rad/s).
    pub tls_freq: f64,
    /// γ_q (rad/s).
    pub tls_loss: f64,
    /// TLS–phonon coupling g_d (rad/s).
    pub coupling: f64,
}

impl TlsParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        require("tls_freq", self.tls_freq, self.tls_freq > 0.0, "> 0")?;
        require("tls_loss", self.tls_loss, self.tls_loss >= 0.0, ">= 0")?;
        require("tls_coupling", self.coupling, self.coupling >= 0.0, ">= 0")?;
        Ok(())
    }

    /// Whether the Jaynes–Cummings description holds, g_d / ω_q < `ratio`.
    pub fn is_valid_regime(&self, ratio: f64) -> bool {
        self.coupling / self.tls_freq < ratio
    }
}

/// Material constants from which g_d and ω_q are derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Deformation potential D_T (J).
    pub deformation_potential: f64,
    /// Tunnel splitting Δ0 (rad/s).
    pub tunnel_splitting: f64,
    /// Asymmetry Δa (rad/s).
    pub asymmetry: f64,
    /// Young's modulus Y (Pa).
    pub youngs_modulus: f64,
    /// Mechanical mode volume V_m (m³).
    pub mode_volume: f64,
}

impl MaterialParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        require(
            "deformation_potential",
            self.deformation_potential,
            true,
            "",
        )?;
        require(
            "tunnel_splitting",
            self.tunnel_splitting,
            self.tunnel_splitting >= 0.0,
            ">= 0",
        )?;
        require("asymmetry", self.asymmetry, self.asymmetry >= 0.0, ">= 0")?;
        require(
            "youngs_modulus",
            self.youngs_modulus,
            self.youngs_modulus > 0.0,
            "> 0",
        )?;
        require("mode_volume", self.mode_volume, self.mode_volume > 0.0, "> 0")?;
        if self.tunnel_splitting == 0.0 && self.asymmetry == 0.0 {
            return Err(invalid(
                "tunnel_splitting",
                "tunnel splitting and asymmetry cannot both be zero",
            ));
        }
        Ok(())
    }

    /// Zero-point strain fluctuation S_zpf = sqrt(ħ ω_m / (2 Y V_m)).
    pub fn zero_point_strain(&self, mech: &MechanicalParams) -> f64 {
        (HBAR * mech.mech_freq / (2.0 * self.youngs_modulus * self.mode_volume)).sqrt()
    }
}

/// TLS frequency and strain coupling from material constants.
///
/// ω_q = sqrt(Δ0² + Δa²) and g_d = (D_T/ħ)(Δ0/ω_q) S_zpf. The TLS loss is not
/// fixed by the material and must be supplied.
pub fn compute_gd(
    material: &MaterialParams,
    mech: &MechanicalParams,
    tls_loss: f64,
) -> Result<TlsParams, ParamError> {
    material.validate()?;
    mech.validate()?;
    if material.tunnel_splitting.hypot(material.asymmetry) == 0.0 {
        return Err(invalid("tunnel_splitting", "ω_q vanishes"));
    }
    let tls = material_tls(material, mech, tls_loss);
    tls.validate()?;
    Ok(tls)
}

fn material_tls(material: &MaterialParams, mech: &MechanicalParams, tls_loss: f64) -> TlsParams {
    let tls_freq = material.tunnel_splitting.hypot(material.asymmetry);
    let strain = material.zero_point_strain(mech);
    let coupling =
        (material.deformation_potential / HBAR) * (material.tunnel_splitting / tls_freq) * strain;
    TlsParams {
        tls_freq,
        tls_loss,
        coupling: coupling.abs(),
    }
}

/// How the TLS is specified: directly, or through material constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TlsSource {
    Direct(TlsParams),
    Material {
        material: MaterialParams,
        tls_loss: f64,
    },
}

impl TlsSource {
    fn mode_name(&self) -> &'static str {
        match self {
            TlsSource::Direct(_) => "given directly",
            TlsSource::Material { .. } => "derived from material",
        }
    }
}

pub const DEFAULT_VALIDITY_RATIO: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub optical: OpticalParams,
    pub mechanical: MechanicalParams,
    pub tls: TlsSource,
    /// Warn when g_d / ω_q reaches this ratio.
    pub validity_ratio: f64,
}

/// Quantities derived from [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    /// x0 (m).
    pub x0: f64,
    /// ξ = ω_c / R (rad/s per m).
    pub xi: f64,
    /// Pump frequency ω_l = ω_c + Δ (rad/s).
    pub omega_l: f64,
    /// Pump amplitude ε_l = sqrt(2 P_l γ / (ħ ω_l)) (s⁻¹ᐟ²·s⁻¹ᐟ², i.e. s⁻¹).
    pub eps_l: f64,
    /// Supermode frequencies ω_± = −Δ ± J.
    pub omega_plus: f64,
    pub omega_minus: f64,
}

impl DerivedQuantities {
    /// Single-phonon optomechanical rate ξ·x0.
    pub fn xi_x0(&self) -> f64 {
        self.xi * self.x0
    }
}

/// Parameter paths accepted by [`SystemParams::get`] / [`SystemParams::set`].
pub const PARAM_PATHS: &[(&str, UnitClass)] = &[
    ("cavity_freq", UnitClass::Frequency),
    ("cavity_loss", UnitClass::Frequency),
    ("coupling", UnitClass::Frequency),
    ("radius", UnitClass::Length),
    ("pump_power", UnitClass::Power),
    ("detuning", UnitClass::Frequency),
    ("mech_freq", UnitClass::Frequency),
    ("mech_loss", UnitClass::Frequency),
    ("eff_mass", UnitClass::Mass),
    ("tls_freq", UnitClass::Frequency),
    ("tls_loss", UnitClass::Frequency),
    ("tls_coupling", UnitClass::Frequency),
    ("deformation_potential", UnitClass::Energy),
    ("tunnel_splitting", UnitClass::Frequency),
    ("asymmetry", UnitClass::Frequency),
    ("youngs_modulus", UnitClass::Pressure),
    ("mode_volume", UnitClass::Volume),
];

/// Unit class of a parameter path.
pub fn path_class(path: &str) -> Option<UnitClass> {
    PARAM_PATHS
        .iter()
        .find(|(p, _)| *p == path)
        .map(|(_, c)| *c)
}

pub fn is_material_path(path: &str) -> bool {
    matches!(
        path,
        "deformation_potential" | "tunnel_splitting" | "asymmetry" | "youngs_modulus" | "mode_volume"
    )
}

impl SystemParams {
    pub fn new(
        optical: OpticalParams,
        mechanical: MechanicalParams,
        tls: TlsSource,
    ) -> Result<Self, ParamError> {
        let params = SystemParams {
            optical,
            mechanical,
            tls,
            validity_ratio: DEFAULT_VALIDITY_RATIO,
        };
        params.validate()?;
        Ok(params)
    }

    /// The whispering-gallery device used throughout the figures: R = 34.5 µm,
    /// m = 50 ng, ω_c = 2π × 193 THz, ω_m = 2π × 23.4 MHz, γ = 6.43 MHz,
    /// γ_m = 0.24 MHz, with J = Δ = 0.5 ω_m, P_l = 10 µW, and a resonant TLS
    /// with γ_q = γ and g_d = 1 MHz.
    pub fn reference_device() -> Self {
        let omega_m = two_pi_mhz(23.4);
        let gamma = 6.43e6;
        SystemParams {
            optical: OpticalParams {
                cavity_freq: 2.0 * std::f64::consts::PI * 193e12,
                cavity_loss: gamma,
                coupling: 0.5 * omega_m,
                radius: 34.5e-6,
                pump_power: 10e-6,
                detuning: 0.5 * omega_m,
            },
            mechanical: MechanicalParams {
                mech_freq: omega_m,
                mech_loss: 0.24e6,
                eff_mass: 50e-12,
            },
            tls: TlsSource::Direct(TlsParams {
                tls_freq: omega_m,
                tls_loss: gamma,
                coupling: 1e6,
            }),
            validity_ratio: DEFAULT_VALIDITY_RATIO,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        self.optical.validate()?;
        self.mechanical.validate()?;
        match &self.tls {
            TlsSource::Direct(tls) => tls.validate()?,
            TlsSource::Material { material, tls_loss } => {
                material.validate()?;
                require("tls_loss", *tls_loss, *tls_loss >= 0.0, ">= 0")?;
            }
        }
        require(
            "validity_ratio",
            self.validity_ratio,
            self.validity_ratio > 0.0,
            "> 0",
        )?;
        Ok(())
    }

    /// The TLS, derived from the material constants when needed.
    pub fn tls(&self) -> TlsParams {
        match &self.tls {
            TlsSource::Direct(tls) => *tls,
            TlsSource::Material { material, tls_loss } => {
                material_tls(material, &self.mechanical, *tls_loss)
            }
        }
    }

    /// Non-fatal diagnostics, e.g. a TLS coupling outside the JC regime.
    pub fn warnings(&self) -> Vec<String> {
        let tls = self.tls();
        let mut out = Vec::new();
        if !tls.is_valid_regime(self.validity_ratio) {
            out.push(format!(
                "g_d/ω_q = {:.3e} is not below {} (JC model validity)",
                tls.coupling / tls.tls_freq,
                self.validity_ratio
            ));
        }
        out
    }

    pub fn get(&self, path: &str) -> Result<f64, ParamError> {
        let o = &self.optical;
        let m = &self.mechanical;
        let value = match path {
            "cavity_freq" => o.cavity_freq,
            "cavity_loss" => o.cavity_loss,
            "coupling" => o.coupling,
            "radius" => o.radius,
            "pump_power" => o.pump_power,
            "detuning" => o.detuning,
            "mech_freq" => m.mech_freq,
            "mech_loss" => m.mech_loss,
            "eff_mass" => m.eff_mass,
            "tls_freq" => self.tls().tls_freq,
            "tls_loss" => self.tls().tls_loss,
            "tls_coupling" => self.tls().coupling,
            p if is_material_path(p) => match &self.tls {
                TlsSource::Material { material, .. } => match p {
                    "deformation_potential" => material.deformation_potential,
                    "tunnel_splitting" => material.tunnel_splitting,
                    "asymmetry" => material.asymmetry,
                    "youngs_modulus" => material.youngs_modulus,
                    _ => material.mode_volume,
                },
                src => {
                    return Err(ParamError::WrongTlsMode {
                        path: p.to_string(),
                        mode: src.mode_name(),
                    })
                }
            },
            other => return Err(ParamError::UnknownPath(other.to_string())),
        };
        Ok(value)
    }

    /// Set one parameter without validating; see [`SystemParams::set`].
    pub fn set_unchecked(&mut self, path: &str, value: f64) -> Result<(), ParamError> {
        let mode = self.tls.mode_name();
        let wrong_mode = || ParamError::WrongTlsMode {
            path: path.to_string(),
            mode,
        };
        match path {
            "cavity_freq" => self.optical.cavity_freq = value,
            "cavity_loss" => self.optical.cavity_loss = value,
            "coupling" => self.optical.coupling = value,
            "radius" => self.optical.radius = value,
            "pump_power" => self.optical.pump_power = value,
            "detuning" => self.optical.detuning = value,
            "mech_freq" => self.mechanical.mech_freq = value,
            "mech_loss" => self.mechanical.mech_loss = value,
            "eff_mass" => self.mechanical.eff_mass = value,
            "tls_loss" => match &mut self.tls {
                TlsSource::Direct(tls) => tls.tls_loss = value,
                TlsSource::Material { tls_loss, .. } => *tls_loss = value,
            },
            "tls_freq" | "tls_coupling" => match &mut self.tls {
                TlsSource::Direct(tls) if path == "tls_freq" => tls.tls_freq = value,
                TlsSource::Direct(tls) => tls.coupling = value,
                TlsSource::Material { .. } => return Err(wrong_mode()),
            },
            p if is_material_path(p) => match &mut self.tls {
                TlsSource::Material { material, .. } => match p {
                    "deformation_potential" => material.deformation_potential = value,
                    "tunnel_splitting" => material.tunnel_splitting = value,
                    "asymmetry" => material.asymmetry = value,
                    "youngs_modulus" => material.youngs_modulus = value,
                    _ => material.mode_volume = value,
                },
                TlsSource::Direct(_) => return Err(wrong_mode()),
            },
            other => return Err(ParamError::UnknownPath(other.to_string())),
        }
        Ok(())
    }

    /// Set one parameter by path and re-check all invariants.
    pub fn set(&mut self, path: &str, value: f64) -> Result<(), ParamError> {
        let mut next = *self;
        next.set_unchecked(path, value)?;
        next.validate()?;
        *self = next;
        Ok(())
    }

    pub fn with(mut self, path: &str, value: f64) -> Result<Self, ParamError> {
        self.set(path, value)?;
        Ok(self)
    }

    pub fn derive(&self) -> DerivedQuantities {
        derive_quantities(self)
    }
}

/// x0, ξ, ε_l, ω_l and ω_± for a parameter set.
pub fn derive_quantities(params: &SystemParams) -> DerivedQuantities {
    let o = &params.optical;
    let omega_l = o.cavity_freq + o.detuning;
    DerivedQuantities {
        x0: params.mechanical.zero_point_displacement(),
        xi: o.cavity_freq / o.radius,
        omega_l,
        eps_l: (2.0 * o.pump_power * o.cavity_loss / (HBAR * omega_l)).sqrt(),
        omega_plus: -o.detuning + o.coupling,
        omega_minus: -o.detuning - o.coupling,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn silica() -> MaterialParams {
        MaterialParams {
            deformation_potential: 1.0 * crate::units::EV,
            tunnel_splitting: 0.8 * two_pi_mhz(23.4),
            asymmetry: 0.6 * two_pi_mhz(23.4),
            youngs_modulus: 72e9,
            mode_volume: 0.25e-18,
        }
    }

    #[test]
    fn zero_tunnel_splitting_gives_zero_coupling() {
        let mut mat = silica();
        mat.tunnel_splitting = 0.0;
        let mech = SystemParams::reference_device().mechanical;
        let tls = compute_gd(&mat, &mech, 1e6).unwrap();
        assert_eq!(tls.coupling, 0.0);
        assert_eq!(tls.tls_freq, mat.asymmetry);
    }

    #[test]
    fn symmetric_tls_has_full_coupling() {
        let mut mat = silica();
        mat.asymmetry = 0.0;
        let mech = SystemParams::reference_device().mechanical;
        let tls = compute_gd(&mat, &mech, 1e6).unwrap();
        assert_eq!(tls.tls_freq, mat.tunnel_splitting);
        let expect = mat.deformation_potential / HBAR * mat.zero_point_strain(&mech);
        assert!((tls.coupling - expect).abs() <= 1e-15 * expect);
    }

    #[test]
    fn silica_coupling_matches_hand_evaluation() {
        // D_T = 1 eV, Y = 72 GPa, V_m = 0.25 µm³, ω_m = 2π·23.4 MHz,
        // Δ0/ω_q = 0.8. Evaluated by hand:
        //   S_zpf = sqrt(1.054571817e-34 · 1.470265e8 / (2 · 72e9 · 0.25e-18))
        //         = 6.5627e-10
        //   g_d   = 1.602176634e-19 / 1.054571817e-34 · 0.8 · S_zpf
        //         = 7.9764e5 rad/s
        let mech = SystemParams::reference_device().mechanical;
        let tls = compute_gd(&silica(), &mech, 1e6).unwrap();
        assert!((tls.coupling - 7.9764e5).abs() < 1e-4 * 7.9764e5, "{}", tls.coupling);
        assert!((tls.tls_freq - two_pi_mhz(23.4)).abs() < 1e-6);
    }

    #[test]
    fn both_splittings_zero_is_rejected() {
        let mut mat = silica();
        mat.tunnel_splitting = 0.0;
        mat.asymmetry = 0.0;
        let mech = SystemParams::reference_device().mechanical;
        assert!(compute_gd(&mat, &mech, 1e6).is_err());
    }

    #[test]
    fn zero_drive_has_zero_amplitude() {
        let p = SystemParams::reference_device()
            .with("pump_power", 0.0)
            .unwrap();
        assert_eq!(p.derive().eps_l, 0.0);
    }

    #[test]
    fn zero_detuning_supermodes_are_symmetric() {
        let p = SystemParams::reference_device().with("detuning", 0.0).unwrap();
        let d = p.derive();
        assert_eq!(d.omega_plus, p.optical.coupling);
        assert_eq!(d.omega_minus, -p.optical.coupling);
    }

    #[test]
    fn reference_device_round_trips_through_json() {
        let p = SystemParams::reference_device();
        let text = serde_json::to_string(&p).unwrap();
        let back: SystemParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.optical.radius.to_bits(), 34.5e-6f64.to_bits());
        assert_eq!(back.mechanical.eff_mass.to_bits(), 50e-12f64.to_bits());
        assert_eq!(back.mechanical.mech_loss.to_bits(), 0.24e6f64.to_bits());
        assert_eq!(back.optical.cavity_loss.to_bits(), 6.43e6f64.to_bits());
    }

    #[test]
    fn setters_validate() {
        let mut p = SystemParams::reference_device();
        assert!(p.set("cavity_loss", 0.0).is_err());
        assert!(p.set("pump_power", -1.0).is_err());
        assert!(p.set("nonsense", 1.0).is_err());
        assert!(matches!(
            p.set("mode_volume", 1.0),
            Err(ParamError::WrongTlsMode { .. })
        ));
        p.set("detuning", 0.1).unwrap();
        assert_eq!(p.get("detuning").unwrap(), 0.1);
    }

    #[test]
    fn strong_coupling_is_flagged_not_rejected() {
        let p = SystemParams::reference_device()
            .with("tls_coupling", 0.2 * two_pi_mhz(23.4))
            .unwrap();
        assert_eq!(p.warnings().len(), 1);
        assert!(SystemParams::reference_device().warnings().is_empty());
    }

    #[test]
    fn material_route_resolves_tls() {
        let mut p = SystemParams::reference_device();
        p.tls = TlsSource::Material {
            material: silica(),
            tls_loss: 2e6,
        };
        p.validate().unwrap();
        let direct = compute_gd(&silica(), &p.mechanical, 2e6).unwrap();
        assert_eq!(p.tls(), direct);
        assert!(p.set("tls_coupling", 1.0).is_err());
        p.set("mode_volume", 1e-18).unwrap();
        assert!(p.tls().coupling < direct.coupling);
    }

    proptest::proptest! {
        #[test]
        fn tls_frequency_is_hypot(d0 in 1e3f64..1e9, da in 0f64..1e9) {
            let mut mat = silica();
            mat.tunnel_splitting = d0;
            mat.asymmetry = da;
            let mech = SystemParams::reference_device().mechanical;
            let tls = compute_gd(&mat, &mech, 0.0).unwrap();
            let sq = d0 * d0 + da * da;
            proptest::prop_assert!((tls.tls_freq * tls.tls_freq - sq).abs() <= 1e-12 * sq);
        }

        #[test]
        fn derive_is_pure(p_l in 0f64..1e-3, det in -1e8f64..1e8) {
            let p = SystemParams::reference_device()
                .with("pump_power", p_l).unwrap()
                .with("detuning", det).unwrap();
            let a = derive_quantities(&p);
            let b = derive_quantities(&p);
            proptest::prop_assert_eq!(a.eps_l.to_bits(), b.eps_l.to_bits());
            proptest::prop_assert_eq!(a.x0.to_bits(), b.x0.to_bits());
            proptest::prop_assert_eq!(a.omega_plus.to_bits(), b.omega_plus.to_bits());
        }
    }
}
