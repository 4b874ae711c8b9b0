//! Effective non-Hermitian TLS–phonon Hamiltonian.
//!
//! In the two-state sector {|n_b, g⟩, |n_b − 1, e⟩} the Hamiltonian is
//!
//! ```text
//! ⎡ n_b (ω_m − iγ′_m)          g_d √n_b                           ⎤
//! ⎣ g_d √n_b                   (n_b − 1)(ω_m − iγ′_m) + ω_q − iγ_q ⎦
//! ```
//!
//! with the effective damping γ′_m = γ_m − G0. Its two eigenvalues coalesce at
//! an exceptional point (EP); at ω_q = ω_m that happens at
//! γ_q = γ′_m + 2√n_b g_d. The gain minimum (turning point) sits at
//! γ_q = √(2 n_b) g_d in the same resonant case.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::params::SystemParams;
use crate::steadystate::{gain, SteadyStateError};

/// Default half-width of the at-EP window, relative to ω_m.
pub const EP_TOL_REL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectrumError {
    #[error("invalid effective parameter {field} = {value}: {reason}")]
    Invalid {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("no discriminant minimum inside [{lo:e}, {hi:e}] rad/s")]
    NotFound { lo: f64, hi: f64 },
    #[error(transparent)]
    Gain(#[from] SteadyStateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    /// Phonon-number sector label; the spectrum needs n_b ≥ 1.
    pub n_b: f64,
    pub omega_m: f64,
    pub omega_q: f64,
    /// γ′_m, negative under net gain.
    pub gamma_m_eff: f64,
    pub gamma_q: f64,
    pub g_d: f64,
}

fn invalid(field: &'static str, value: f64, reason: &'static str) -> SpectrumError {
    SpectrumError::Invalid {
        field,
        value,
        reason,
    }
}

impl EffectiveParams {
    /// Effective parameters at one point of the full model; γ′_m = γ_m − G0(n_b).
    pub fn from_system(params: &SystemParams, n_b: f64) -> Result<Self, SpectrumError> {
        let g = gain(params, n_b)?;
        let tls = params.tls();
        let eff = EffectiveParams {
            n_b,
            omega_m: params.mechanical.mech_freq,
            omega_q: tls.tls_freq,
            gamma_m_eff: params.mechanical.mech_loss - g.g0,
            gamma_q: tls.tls_loss,
            g_d: tls.coupling,
        };
        eff.check_finite()?;
        Ok(eff)
    }

    fn check_finite(&self) -> Result<(), SpectrumError> {
        for (field, v) in [
            ("n_b", self.n_b),
            ("omega_m", self.omega_m),
            ("omega_q", self.omega_q),
            ("gamma_m_eff", self.gamma_m_eff),
            ("gamma_q", self.gamma_q),
            ("g_d", self.g_d),
        ] {
            if !v.is_finite() {
                return Err(invalid(field, v, "must be finite"));
            }
        }
        if self.n_b < 0.0 {
            return Err(invalid("n_b", self.n_b, "must be >= 0"));
        }
        if self.g_d < 0.0 {
            return Err(invalid("g_d", self.g_d, "must be >= 0"));
        }
        Ok(())
    }

    /// Invariants required by [`eigenvalues`].
    pub fn validate(&self) -> Result<(), SpectrumError> {
        self.check_finite()?;
        if self.n_b < 1.0 {
            return Err(invalid("n_b", self.n_b, "the sector needs at least one phonon"));
        }
        Ok(())
    }

    pub fn with_gamma_q(mut self, gamma_q: f64) -> Self {
        self.gamma_q = gamma_q;
        self
    }

    /// 4 n_b g_d² + [ω_q − ω_m − i(γ_q − γ′_m)]².
    ///
    /// Evaluated in double-double: near an EP the two terms cancel and the
    /// eigenvalue splitting goes as the square root of what is left.
    pub fn discriminant(&self, gamma_q: f64) -> Complex64 {
        let d = Cdd {
            re: TwoFloat::new_add(self.omega_q, -self.omega_m),
            im: -TwoFloat::new_add(gamma_q, -self.gamma_m_eff),
        };
        let coupling = TwoFloat::from(self.n_b) * self.g_d * self.g_d * 4.0;
        d.square().add_re(coupling).to_c64()
    }

    /// The 2×2 matrix, row major.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let mech = Complex64::new(self.omega_m, -self.gamma_m_eff);
        let off = Complex64::new(self.g_d * self.n_b.sqrt(), 0.0);
        [
            [self.n_b * mech, off],
            [
                off,
                (self.n_b - 1.0) * mech + Complex64::new(self.omega_q, -self.gamma_q),
            ],
        ]
    }

    /// γ_q minimizing |discriminant|: γ′_m + √(4n_b g_d² − (ω_q − ω_m)²), or
    /// γ′_m when the detuning is too large for the discriminant to vanish.
    pub fn gamma_q_ep(&self) -> f64 {
        let x = self.omega_q - self.omega_m;
        let r = 4.0 * self.n_b * self.g_d * self.g_d - x * x;
        self.gamma_m_eff + r.max(0.0).sqrt()
    }

    /// γ_q at which the defect loss G_d is largest, √((ω_q − ω_m)² + 2n_b g_d²).
    pub fn gamma_q_min(&self) -> f64 {
        let x = self.omega_q - self.omega_m;
        (x * x + 2.0 * self.n_b * self.g_d * self.g_d).sqrt()
    }
}

#[derive(Clone, Copy)]
struct Cdd {
    re: TwoFloat,
    im: TwoFloat,
}

impl Cdd {
    fn square(self) -> Self {
        Cdd {
            re: self.re * self.re - self.im * self.im,
            im: self.re * self.im * 2.0,
        }
    }

    fn add_re(self, x: TwoFloat) -> Self {
        Cdd {
            re: self.re + x,
            im: self.im,
        }
    }

    fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.into(), self.im.into())
    }
}

/// Principal square root with Re ≥ 0; on the branch cut Im ≥ 0.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.re < 0.0 || (s.re == 0.0 && s.im < 0.0) {
        -s
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    BelowEp,
    AtEp,
    AboveEp,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::BelowEp => "below-EP",
            Phase::AtEp => "at-EP",
            Phase::AboveEp => "above-EP",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub gamma_q: f64,
    pub n_b: f64,
    pub e_plus: Complex64,
    pub e_minus: Complex64,
    /// Normalized eigenvectors (phonon, TLS components).
    pub eigvec_plus: [Complex64; 2],
    pub eigvec_minus: [Complex64; 2],
    /// (|phonon|², |TLS|²) for E+ and E−.
    pub eigvec_weights: [[f64; 2]; 2],
    pub gap: f64,
    pub gamma_q_ep: f64,
    pub gamma_q_min: f64,
    pub phase: Phase,
    /// Largest relative difference between the closed form and the direct
    /// diagonalization.
    pub crosscheck: f64,
    /// |⟨v+|v−⟩|; reaches 1 when the eigenvectors coalesce.
    pub overlap: f64,
    /// ω_m, kept for scale-aware tolerances.
    pub omega_m: f64,
}

impl SpectrumResult {
    /// max over eigenvectors of | |w_phonon|² − |w_TLS|² |.
    pub fn localization(&self) -> f64 {
        self.eigvec_weights
            .iter()
            .map(|w| (w[0] - w[1]).abs())
            .fold(0.0, f64::max)
    }

    /// 2-norm condition number of the eigenvector matrix.
    pub fn condition_number(&self) -> f64 {
        let c = self.overlap.min(1.0);
        ((1.0 + c) / (1.0 - c)).sqrt()
    }

    pub const CSV_HEADER: [&'static str; 8] = [
        "gamma_q", "re_E_plus", "im_E_plus", "re_E_minus", "im_E_minus", "gap", "L", "phase",
    ];

    pub fn csv_row(&self) -> String {
        use crate::output::fmt_float;
        let nums = [
            self.gamma_q,
            self.e_plus.re,
            self.e_plus.im,
            self.e_minus.re,
            self.e_minus.im,
            self.gap,
            self.localization(),
        ];
        let mut out: Vec<String> = nums.iter().map(|v| fmt_float(*v)).collect();
        out.push(self.phase.label().to_string());
        out.join(",")
    }
}

/// Closed-form eigenvalues (E+, E−).
pub fn closed_form(eff: &EffectiveParams) -> (Complex64, Complex64) {
    let n = eff.n_b;
    let centre = Complex64::new(
        (n - 0.5) * eff.omega_m + eff.omega_q / 2.0,
        -0.5 * ((2.0 * n - 1.0) * eff.gamma_m_eff + eff.gamma_q),
    );
    let root = 0.5 * principal_sqrt(eff.discriminant(eff.gamma_q));
    (centre + root, centre - root)
}

/// Eigen-decomposition of the explicit matrix: the diagonal shift n_b·(first
/// entry) is removed, the characteristic polynomial λ² − tλ + det is solved
/// in the cancellation-free form, and the shift is added back. The shifted
/// entries and the discriminant are formed in double-double from the
/// parameters, since rounding the matrix first would split an EP by ~√ε.
fn direct(eff: &EffectiveParams) -> [(Complex64, [Complex64; 2]); 2] {
    let n = TwoFloat::from(eff.n_b);
    let n1 = TwoFloat::new_add(eff.n_b, -1.0);
    let shifted = Cdd {
        re: n1 * eff.omega_m + eff.omega_q - n * eff.omega_m,
        im: n * eff.gamma_m_eff - n1 * eff.gamma_m_eff - eff.gamma_q,
    };
    let off = n.sqrt() * eff.g_d;
    let off2 = off * off;

    let shift = eff.matrix()[0][0];
    let a = Complex64::new(0.0, 0.0);
    let b = Complex64::new(off.into(), 0.0);
    let c = b;
    let d = shifted.to_c64();
    let trace = d;
    let det = Complex64::new(-f64::from(off2), 0.0);
    let disc = shifted.square().add_re(off2 * 4.0).to_c64();
    let s = principal_sqrt(disc);
    // pick the sign that adds magnitudes, then use the product of roots
    let q = if (trace.conj() * s).re >= 0.0 {
        0.5 * (trace + s)
    } else {
        0.5 * (trace - s)
    };
    let zero = Complex64::new(0.0, 0.0);
    let (l1, l2) = if q == zero { (zero, zero) } else { (q, det / q) };

    let vec_for = |lam: Complex64, fallback: usize| -> [Complex64; 2] {
        // rows of (M − λ) give two candidate null vectors
        let v1 = [b, lam - a];
        let v2 = [lam - d, c];
        let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
        let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        if n == 0.0 {
            let mut e = [zero, zero];
            e[fallback] = Complex64::new(1.0, 0.0);
            e
        } else {
            let k = 1.0 / n.sqrt();
            [v[0] * k, v[1] * k]
        }
    };
    [(l1 + shift, vec_for(l1, 0)), (l2 + shift, vec_for(l2, 1))]
}

fn rel_diff(x: Complex64, y: Complex64) -> f64 {
    let scale = x.norm().max(y.norm());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).norm() / scale
    }
}

/// Eigenvalues, eigenvectors, EP and turning-point locations and phase at
/// one parameter point.
pub fn eigenvalues(eff: &EffectiveParams) -> Result<SpectrumResult, SpectrumError> {
    eff.validate()?;
    let (e_plus, e_minus) = closed_form(eff);
    let [(l1, v1), (l2, v2)] = direct(eff);

    // label the direct pair by proximity to the closed-form E+
    let straight = rel_diff(l1, e_plus).max(rel_diff(l2, e_minus));
    let swapped = rel_diff(l2, e_plus).max(rel_diff(l1, e_minus));
    let (vp, vm, crosscheck) = if straight <= swapped {
        (v1, v2, straight)
    } else {
        (v2, v1, swapped)
    };

    let weights = |v: &[Complex64; 2]| [v[0].norm_sqr(), v[1].norm_sqr()];
    let overlap = (vp[0].conj() * vm[0] + vp[1].conj() * vm[1]).norm();

    let gamma_q_ep = eff.gamma_q_ep();
    let tol = EP_TOL_REL * eff.omega_m;
    Ok(SpectrumResult {
        gamma_q: eff.gamma_q,
        n_b: eff.n_b,
        e_plus,
        e_minus,
        eigvec_plus: vp,
        eigvec_minus: vm,
        eigvec_weights: [weights(&vp), weights(&vm)],
        gap: (e_plus - e_minus).norm(),
        gamma_q_ep,
        gamma_q_min: eff.gamma_q_min(),
        phase: phase_of(eff.gamma_q, gamma_q_ep, tol),
        crosscheck,
        overlap,
        omega_m: eff.omega_m,
    })
}

fn phase_of(gamma_q: f64, gamma_q_ep: f64, tol: f64) -> Phase {
    if (gamma_q - gamma_q_ep).abs() <= tol {
        Phase::AtEp
    } else if gamma_q < gamma_q_ep {
        Phase::BelowEp
    } else {
        Phase::AboveEp
    }
}

/// Phase label and localization of one spectrum point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub phase: Phase,
    /// Localization metric L ∈ [0, 1].
    pub localization: f64,
    pub condition_number: f64,
    /// Eigenvector matrix numerically singular (κ > 1e6).
    pub ill_conditioned: bool,
}

/// Classify the phase with an at-EP window of half-width `tol` (rad/s) around
/// γ_q^EP.
pub fn classify_phase(res: &SpectrumResult, tol: f64) -> PhaseReport {
    let kappa = res.condition_number();
    PhaseReport {
        phase: phase_of(res.gamma_q, res.gamma_q_ep, tol),
        localization: res.localization(),
        condition_number: kappa,
        ill_conditioned: !(kappa <= 1e6),
    }
}

/// γ_q minimizing |discriminant| inside `bracket`, to 1e-9·ω_m.
///
/// A coarse scan picks the best cell, then golden-section search refines it.
/// A minimum sitting on the bracket edge is reported as not found.
pub fn locate_ep(eff: &EffectiveParams, bracket: (f64, f64)) -> Result<f64, SpectrumError> {
    eff.check_finite()?;
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(SpectrumError::NotFound { lo, hi });
    }
    let f = |x: f64| eff.discriminant(x).norm();
    let tol = EP_TOL_REL * eff.omega_m;

    const CELLS: usize = 256;
    let step = (hi - lo) / CELLS as f64;
    let best = (0..=CELLS)
        .map(|k| lo + step * k as f64)
        .map(|x| (x, f(x)))
        .fold((lo, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });
    let mut a = (best.0 - step).max(lo);
    let mut b = (best.0 + step).min(hi);

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if c == d {
            break;
        }
    }
    let x = 0.5 * (a + b);
    if x - lo <= tol || hi - x <= tol {
        return Err(SpectrumError::NotFound { lo, hi });
    }
    Ok(x)
}

/// γ_q at the turning point of G, i.e. where ∂G_d/∂γ_q = 0.
///
/// Resonant case: √(2 n_b) g_d. Otherwise the derivative's root is bracketed
/// and bisected.
pub fn turning_point(eff: &EffectiveParams) -> Result<f64, SpectrumError> {
    eff.check_finite()?;
    let x = eff.omega_q - eff.omega_m;
    let k = 2.0 * eff.n_b * eff.g_d * eff.g_d;
    if x == 0.0 {
        return Ok(k.sqrt());
    }
    // sign of ∂/∂γ [γ / (γ² + x² + k)] is that of x² + k − γ²
    let slope = |g: f64| x * x + k - g * g;
    let mut lo = 0.0;
    let mut hi = x.abs() + eff.g_d * (2.0 * eff.n_b).sqrt() + 1.0;
    while slope(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Reorder (E+, E−) pairs along a sweep so each curve continues the one
/// closest to it at the previous point.
pub fn track_branches(points: &[(Complex64, Complex64)]) -> Vec<(Complex64, Complex64)> {
    let mut out: Vec<(Complex64, Complex64)> = Vec::with_capacity(points.len());
    for &(p, m) in points {
        match out.last() {
            None => out.push((p, m)),
            Some(&(pp, pm)) => {
                let keep = (p - pp).norm() + (m - pm).norm();
                let swap = (m - pp).norm() + (p - pm).norm();
                out.push(if swap < keep { (m, p) } else { (p, m) });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resonant(n_b: f64, g_d: f64, gamma_m_eff: f64, gamma_q: f64) -> EffectiveParams {
        let w = 2.0 * std::f64::consts::PI * 23.4e6;
        EffectiveParams {
            n_b,
            omega_m: w,
            omega_q: w,
            gamma_m_eff,
            gamma_q,
            g_d,
        }
    }

    #[test]
    fn decoupled_limit_gives_bare_values() {
        let eff = resonant(3.0, 0.0, 0.2e6, 5e6);
        let r = eigenvalues(&eff).unwrap();
        let root = 0.5 * principal_sqrt(eff.discriminant(eff.gamma_q));
        assert_eq!(root.re, 0.0);
        assert!((root.im.abs() - 0.5 * (5e6 - 0.2e6)).abs() < 1e-6);
        assert_eq!((r.e_plus - r.e_minus).re, 0.0);
        // one eigenvector is the bare phonon, the other the bare TLS
        assert_eq!(r.localization(), 1.0);
    }

    #[test]
    fn exact_ep_example_coalesces() {
        let r = eigenvalues(&resonant(1.0, 1e6, 0.0, 2e6)).unwrap();
        assert_eq!(r.gap, 0.0);
        assert_eq!(r.phase, Phase::AtEp);
        let rep = classify_phase(&r, 1e-3);
        assert!(rep.ill_conditioned, "{rep:?}");
    }

    #[test]
    fn ep_locations_from_closed_form() {
        assert_eq!(resonant(1.0, 1e6, 0.0, 0.0).gamma_q_ep(), 2e6);
        assert_eq!(resonant(4.0, 1e6, 0.5e6, 0.0).gamma_q_ep(), 4.5e6);
    }

    #[test]
    fn locate_ep_matches_closed_form() {
        let tol = EP_TOL_REL * 2.0 * std::f64::consts::PI * 23.4e6;
        let x = locate_ep(&resonant(1.0, 1e6, 0.0, 0.0), (0.1e6, 40e6)).unwrap();
        assert!((x - 2e6).abs() <= tol, "{x}");
        let x = locate_ep(&resonant(4.0, 1e6, 0.5e6, 0.0), (0.1e6, 40e6)).unwrap();
        assert!((x - 4.5e6).abs() <= tol, "{x}");
    }

    #[test]
    fn locate_ep_reports_edge_minimum() {
        let err = locate_ep(&resonant(1.0, 1e6, 0.0, 0.0), (3e6, 10e6)).unwrap_err();
        assert!(matches!(err, SpectrumError::NotFound { .. }));
    }

    #[test]
    fn turning_point_examples() {
        let tp = turning_point(&resonant(1.0, 1e6, 0.0, 0.0)).unwrap();
        assert!((tp - 2f64.sqrt() * 1e6).abs() < 1e-6);
        assert_eq!(turning_point(&resonant(0.0, 1e6, 0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(turning_point(&resonant(2.0, 1e6, 0.0, 0.0)).unwrap(), 2e6);
    }

    #[test]
    fn off_resonant_turning_point_matches_stationarity() {
        let mut eff = resonant(3.0, 1e6, 0.0, 0.0);
        eff.omega_q += 0.7e6;
        let tp = turning_point(&eff).unwrap();
        assert!((tp - eff.gamma_q_min()).abs() <= 1e-9 * tp);
    }

    #[test]
    fn sector_needs_a_phonon() {
        assert!(eigenvalues(&resonant(0.5, 1e6, 0.0, 1e6)).is_err());
    }

    #[test]
    fn weights_are_balanced_below_and_localized_far_above() {
        let eff = resonant(2.0, 1e6, 0.1e6, 0.0);
        let ep = eff.gamma_q_ep();
        let below = eigenvalues(&eff.with_gamma_q(0.1 * ep)).unwrap();
        assert!(below.localization() < 1e-12);
        for w in below.eigvec_weights {
            assert!((w[0] + w[1] - 1.0).abs() < 1e-14);
        }
        let above = eigenvalues(&eff.with_gamma_q(10.0 * ep)).unwrap();
        let [wp, wm] = above.eigvec_weights;
        assert!(wp[0].max(wm[0]) > 0.98, "{wp:?} {wm:?}");
        assert!(wp[1].max(wm[1]) > 0.98, "{wp:?} {wm:?}");
    }

    #[test]
    fn branch_tracking_undoes_label_swaps() {
        let a = Complex64::new(1.0, 0.0);
        let b = Complex64::new(5.0, 0.0);
        let pts = [(a, b), (b * 1.01, a * 1.01), (a * 1.02, b * 1.02)];
        let out = track_branches(&pts);
        assert!(out.iter().all(|(p, _)| p.re < 2.0));
    }

    #[test]
    fn csv_row_has_every_column() {
        let r = eigenvalues(&resonant(1.0, 1e6, 0.0, 1e6)).unwrap();
        assert_eq!(r.csv_row().split(',').count(), SpectrumResult::CSV_HEADER.len());
        assert!(r.csv_row().ends_with("below-EP"));
    }

    proptest::proptest! {
        #[test]
        fn trace_is_preserved(
            n in 1f64..1e4, g in 0f64..5e6, gm in -5e6f64..5e6, gq in 0f64..5e7, dq in -5e6f64..5e6,
        ) {
            let mut eff = resonant(n, g, gm, gq);
            eff.omega_q += dq;
            let r = eigenvalues(&eff).unwrap();
            let m = eff.matrix();
            let tr = m[0][0] + m[1][1];
            proptest::prop_assert!(rel_diff(r.e_plus + r.e_minus, tr) <= 1e-12);
            proptest::prop_assert!(r.crosscheck <= 1e-12, "{}", r.crosscheck);
            proptest::prop_assert!(r.gap >= 0.0);
        }

        #[test]
        fn swapping_mode_and_tls_keeps_the_spectrum(
            g in 0f64..5e6, gm in -5e6f64..5e6, gq in 0f64..5e7, dq in -5e6f64..5e6,
        ) {
            let mut eff = resonant(1.0, g, gm, gq);
            eff.omega_q += dq;
            let mut swapped = eff;
            swapped.omega_m = eff.omega_q;
            swapped.omega_q = eff.omega_m;
            swapped.gamma_m_eff = eff.gamma_q;
            swapped.gamma_q = eff.gamma_m_eff;
            let a = eigenvalues(&eff).unwrap();
            let b = eigenvalues(&swapped).unwrap();
            let same = rel_diff(a.e_plus, b.e_plus).max(rel_diff(a.e_minus, b.e_minus));
            let crossed = rel_diff(a.e_plus, b.e_minus).max(rel_diff(a.e_minus, b.e_plus));
            proptest::prop_assert!(same.min(crossed) <= 1e-12);
        }
    }
}
