//! Figure presets.
//!
//! Each preset starts from the reference device, applies the values its
//! figure quotes and lists everything else it had to choose. Axis ranges
//! the figures leave open default to Δ ∈ [−1, 1]·ω_m, γ_q ∈ [0.05, 6]·γ (log)
//! and P_l ∈ [0.1, 20] µW.

use crate::params::SystemParams;
use crate::sweep::{Axis, NbMode, Observable, Scale, StatedParam, SweepError, SweepSpec};

pub const PRESET_NAMES: [&str; 8] = [
    "fig2a", "fig2b", "fig3a", "fig3b", "fig4", "fig5", "fig6a", "fig6b",
];

const GQ_POINTS: usize = 200;

struct Builder {
    base: SystemParams,
    stated: Vec<StatedParam>,
    defaulted: Vec<String>,
    omega_m: f64,
    gamma: f64,
}

impl Builder {
    fn new() -> Self {
        let base = SystemParams::reference_device();
        Builder {
            omega_m: base.mechanical.mech_freq,
            gamma: base.optical.cavity_loss,
            base,
            stated: Vec::new(),
            defaulted: Vec::new(),
        }
    }

    fn state(mut self, path: &str, value: f64, text: &str) -> Self {
        self.base = self.base.with(path, value).expect("preset values are valid");
        self.stated.push(StatedParam {
            path: path.to_string(),
            value,
            text: text.to_string(),
        });
        self
    }

    fn default(mut self, path: &str, value: f64, note: &str) -> Self {
        self.base = self.base.with(path, value).expect("preset values are valid");
        self.defaulted.push(format!("{path} = {value:e}: {note}"));
        self
    }

    fn note(mut self, note: &str) -> Self {
        self.defaulted.push(note.to_string());
        self
    }

    fn stated_j(self) -> Self {
        let j = 0.5 * self.omega_m;
        self.state("coupling", j, "J = 0.5 omega_m")
    }

    fn stated_power(self, micro_watts: f64) -> Self {
        let text = format!("P_l = {micro_watts} uW");
        self.state("pump_power", micro_watts / 1e6, &text)
    }

    fn gq_axis(&self) -> Axis {
        Axis::range(
            "tls_loss",
            0.05 * self.gamma,
            6.0 * self.gamma,
            GQ_POINTS,
            Scale::Log,
        )
    }

    fn build(self, name: &str, axes: Vec<Axis>, quantities: Vec<Observable>, mode: NbMode) -> SweepSpec {
        let mut spec = SweepSpec::new(name, self.base, axes, quantities, mode);
        spec.stated = self.stated;
        spec.defaulted = self.defaulted;
        spec
    }
}

fn detuning_range_note() -> &'static str {
    "detuning axis range [-1, 1] omega_m (201 points) is not given by the figure"
}

fn gq_range_note() -> &'static str {
    "tls_loss axis range [0.05, 6] gamma, 200 log-spaced points, is not given by the figure"
}

/// Resolved sweep for a figure id.
pub fn preset(name: &str) -> Result<SweepSpec, SweepError> {
    let b = Builder::new();
    let wm = b.omega_m;
    let gamma = b.gamma;
    let gd = 1e6;
    let spec = match name {
        "fig2a" => b
            .state("tls_loss", gamma, "gamma_q / gamma = 1")
            .state("tls_coupling", gd, "g_d = 1 MHz")
            .stated_j()
            .stated_power(10.0)
            .default("tls_freq", wm, "omega_q = omega_m")
            .note(detuning_range_note())
            .note("n_b fixed at 1 (phonon number not given by the figure)")
            .build(
                name,
                vec![Axis::range("detuning", -wm, wm, 201, Scale::Linear)],
                vec![Observable::G0, Observable::G, Observable::Gd],
                NbMode::Fixed(1.0),
            ),
        "fig2b" => {
            let b = b
                .state("detuning", 0.5 * wm, "Delta = 0.5 omega_m")
                .stated_j()
                .stated_power(10.0)
                .default("tls_coupling", gd, "g_d = 1 MHz as in panel (a)")
                .default("tls_freq", wm, "omega_q = omega_m")
                .note(gq_range_note())
                .note("n_b from the self-consistent fixed point at each point");
            let axis = b.gq_axis();
            b.build(
                name,
                vec![axis],
                vec![Observable::G, Observable::G0, Observable::Gd, Observable::Nb],
                NbMode::SelfConsistent,
            )
        }
        "fig3a" => b
            .state("tls_loss", gamma, "gamma_q = gamma")
            .state("tls_coupling", gd, "g_d = 1 MHz")
            .state("tls_freq", wm, "omega_q = omega_m")
            .stated_power(10.0)
            .note(detuning_range_note())
            .note("coupling axis range [0, 1] omega_m (101 points) is not given by the figure")
            .note("n_b fixed at 1 (phonon number not given by the figure)")
            .build(
                name,
                vec![
                    Axis::range("detuning", -wm, wm, 201, Scale::Linear),
                    Axis::range("coupling", 0.0, wm, 101, Scale::Linear),
                ],
                vec![Observable::G],
                NbMode::Fixed(1.0),
            ),
        "fig3b" => {
            let b = b
                .stated_j()
                .state("detuning", 0.5 * wm, "Delta = 0.5 omega_m")
                .state("tls_freq", wm, "omega_q = omega_m")
                .stated_power(10.0)
                .default("tls_coupling", gd, "g_d = 1 MHz as in fig2a/fig2b")
                .note(gq_range_note())
                .note("n_b from the self-consistent fixed point at each point");
            let axis = b.gq_axis();
            b.build(
                name,
                vec![axis],
                vec![Observable::PTh, Observable::PTh0, Observable::PThd],
                NbMode::SelfConsistent,
            )
        }
        "fig4" => {
            let b = b
                .stated_j()
                .state("tls_loss", gamma, "gamma_q / gamma = 1 (base value; the axis sweeps gamma_q)")
                .stated_power(7.0)
                .default("detuning", 0.5 * wm, "Delta = 0.5 omega_m, the fig3a optimum")
                .default("tls_coupling", gd, "g_d = 1 MHz as in fig2a/fig2b")
                .default("tls_freq", wm, "omega_q = omega_m")
                .note("the figure does not name its abscissa; gamma_q is swept")
                .note(gq_range_note())
                .note("n_b from the self-consistent fixed point at each point");
            let axis = b.gq_axis();
            b.build(
                name,
                vec![axis],
                vec![
                    Observable::EPlus,
                    Observable::EMinus,
                    Observable::Gap,
                    Observable::L,
                    Observable::Phase,
                    Observable::GammaQEp,
                    Observable::GammaQMin,
                ],
                NbMode::SelfConsistent,
            )
        }
        "fig5" => {
            let b = b
                .stated_j()
                .state("tls_freq", wm, "omega_q / omega_m = 1")
                .stated_power(10.0)
                .default("tls_coupling", gd, "g_d = 1 MHz as in fig2a/fig2b")
                .note("detuning values {0.1, 0.3, 0.5, 0.7} omega_m are not given by the figure")
                .note(gq_range_note())
                .note("n_b from the self-consistent fixed point at each point");
            let axis = b.gq_axis();
            b.build(
                name,
                vec![
                    Axis::list("detuning", [0.1, 0.3, 0.5, 0.7].iter().map(|x| x * wm).collect()),
                    axis,
                ],
                vec![Observable::G, Observable::GammaQEp, Observable::GammaQMin],
                NbMode::SelfConsistent,
            )
        }
        "fig6a" => b
            .state("tls_freq", wm, "omega_q / omega_m = 1")
            .stated_power(10.0)
            .default("tls_loss", gamma, "gamma_q = gamma as in fig2a/fig2b")
            .default("tls_coupling", gd, "g_d = 1 MHz as in fig2a/fig2b")
            .default("detuning", 0.5 * wm, "Delta = 0.5 omega_m")
            .default("coupling", 0.5 * wm, "J = 0.5 omega_m")
            .note("pump_power axis range [0.1, 20] uW (200 points) is not given by the figure; it overrides P_l")
            .note("n_b from the self-consistent fixed point at each point")
            .build(
                name,
                vec![Axis::range("pump_power", 0.1e-6, 20e-6, 200, Scale::Linear)],
                vec![Observable::Nb, Observable::NbStar, Observable::G],
                NbMode::SelfConsistent,
            ),
        "fig6b" => {
            let b = b
                .state("tls_freq", wm, "omega_q / omega_m = 1")
                .state("tls_loss", gamma, "gamma_q / gamma = 1 (base value; the axis sweeps gamma_q)")
                .state("tls_coupling", gd, "g_d = 1 MHz")
                .default("pump_power", 10e-6, "P_l = 10 uW as in panel (a)")
                .default("detuning", 0.5 * wm, "Delta = 0.5 omega_m")
                .default("coupling", 0.5 * wm, "J = 0.5 omega_m")
                .note(gq_range_note())
                .note("n_b from the self-consistent fixed point at each point");
            let axis = b.gq_axis();
            b.build(
                name,
                vec![axis],
                vec![Observable::Nb, Observable::G, Observable::NbStar],
                NbMode::SelfConsistent,
            )
        }
        other => return Err(SweepError::UnknownPreset(other.to_string())),
    };
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::two_pi_mhz;

    #[test]
    fn every_preset_resolves_and_validates() {
        for name in PRESET_NAMES {
            let spec = preset(name).unwrap();
            spec.validate().unwrap();
            assert!(!spec.defaulted.is_empty(), "{name}");
            for s in &spec.stated {
                // stated values survive unless an axis sweeps that parameter
                if spec.axes.iter().all(|a| a.path != s.path) {
                    assert_eq!(spec.base.get(&s.path).unwrap(), s.value, "{name} {}", s.path);
                }
            }
        }
    }

    #[test]
    fn fig2b_encodes_its_stated_values() {
        let s = preset("fig2b").unwrap();
        let wm = two_pi_mhz(23.4);
        assert_eq!(s.axes[0].path, "tls_loss");
        assert_eq!(s.base.optical.detuning, 0.5 * wm);
        assert_eq!(s.base.optical.coupling, 0.5 * wm);
        assert_eq!(s.base.optical.pump_power, 10e-6);
    }

    #[test]
    fn fig4_and_fig5() {
        let s = preset("fig4").unwrap();
        assert_eq!(s.axes[0].path, "tls_loss");
        assert_eq!(s.base.optical.pump_power, 7e-6);
        assert!(s.quantities.contains(&Observable::EPlus));
        let s = preset("fig5").unwrap();
        assert_eq!(s.axes[0].path, "detuning");
        assert_eq!(s.axes[0].len(), 4);
        assert_eq!(s.base.tls().tls_freq, s.base.mechanical.mech_freq);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(preset("fig9"), Err(SweepError::UnknownPreset(_))));
    }
}
