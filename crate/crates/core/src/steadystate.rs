//! Adiabatic steady state, mechanical gain, threshold power and the
//! self-consistent phonon number.
//!
//! The optical supermodes and the TLS coherence are eliminated in favour of
//! the mechanical amplitude `b`. What remains is a linear equation
//! `ḃ = (−iω_m + iω′ + G − γ_m) b + C` whose real rate `G = G0 + Gd` splits into
//! an optomechanical part and a (never positive) defect part.
//!
//! Every function takes the phonon number `n_b` explicitly; it enters the
//! supermode denominator `α` and saturates the TLS. [`solve_nb_fixed_point`]
//! closes the loop with the stimulated phonon number
//! `N_b = exp[2(G − γ_m)/γ_m]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::params::{DerivedQuantities, SystemParams};
use crate::units::HBAR;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SteadyStateError {
    #[error("singular parameters: {0}")]
    Singular(&'static str),
    #[error("phonon number must be finite and >= 0, got {0}")]
    BadPhononNumber(f64),
}

/// Steady-state supermode amplitudes, coherence and TLS polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyOptics {
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub p: Complex64,
    pub sigma_minus: Complex64,
    /// α = J² + γ² − Δ² + ξ²x0² n_b / 4 (rad²/s²).
    pub alpha: f64,
    /// δn = |a+|² − |a−|².
    pub delta_n: f64,
}

fn check_nb(n_b: f64) -> Result<(), SteadyStateError> {
    if n_b.is_finite() && n_b >= 0.0 {
        Ok(())
    } else {
        Err(SteadyStateError::BadPhononNumber(n_b))
    }
}

/// Shorthand for the combinations shared by all the closed forms.
struct Terms {
    d: DerivedQuantities,
    gamma: f64,
    detuning: f64,
    coupling_j: f64,
    /// 2J − ω_m
    dj: f64,
    alpha: f64,
    /// α² + 4Δ²γ²
    denom: f64,
    /// |ε_l|²
    eps2: f64,
    /// ξ² x0²
    k2: f64,
}

impl Terms {
    fn new(params: &SystemParams, n_b: f64) -> Result<Terms, SteadyStateError> {
        check_nb(n_b)?;
        let d = params.derive();
        let o = &params.optical;
        let k2 = d.xi_x0() * d.xi_x0();
        let alpha = o.coupling * o.coupling + o.cavity_loss * o.cavity_loss
            - o.detuning * o.detuning
            + k2 * n_b / 4.0;
        let denom = alpha * alpha + 4.0 * o.detuning * o.detuning * o.cavity_loss * o.cavity_loss;
        if denom == 0.0 {
            return Err(SteadyStateError::Singular("α² + 4Δ²γ² vanishes"));
        }
        Ok(Terms {
            d,
            gamma: o.cavity_loss,
            detuning: o.detuning,
            coupling_j: o.coupling,
            dj: 2.0 * o.coupling - params.mechanical.mech_freq,
            alpha,
            denom,
            eps2: d.eps_l * d.eps_l,
            k2,
        })
    }
}

/// TLS denominator γ_q² + (ω_q − ω_m)² + 2 g_d² n_b.
fn tls_denominator(params: &SystemParams, n_b: f64) -> f64 {
    let tls = params.tls();
    let dq = tls.tls_freq - params.mechanical.mech_freq;
    tls.tls_loss * tls.tls_loss + dq * dq + 2.0 * tls.coupling * tls.coupling * n_b
}

/// Closed-form steady state for a given mechanical amplitude `b` and phonon
/// number `n_b`.
pub fn steady_optics(
    params: &SystemParams,
    b: Complex64,
    n_b: f64,
) -> Result<SteadyOptics, SteadyStateError> {
    let t = Terms::new(params, n_b)?;
    let sqrt2 = std::f64::consts::SQRT_2;
    let eps = t.d.eps_l;
    let xk = t.d.xi_x0();

    let den = Complex64::new(2.0 * sqrt2 * t.alpha, -4.0 * sqrt2 * t.gamma * t.detuning);
    let a_plus = eps * (2.0 * I * t.d.omega_minus + 2.0 * t.gamma + I * xk * b) / den;
    let a_minus = eps * (2.0 * I * t.d.omega_plus + 2.0 * t.gamma + I * xk * b.conj()) / den;
    let delta_n = a_plus.norm_sqr() - a_minus.norm_sqr();

    let drive = (eps * a_plus + eps * a_minus.conj()) / sqrt2;
    let p = (drive - I * xk / 2.0 * delta_n * b) / Complex64::new(2.0 * t.gamma, t.dj);

    let tls = params.tls();
    let sigma_minus = if tls.coupling == 0.0 || b == Complex64::new(0.0, 0.0) {
        Complex64::new(0.0, 0.0)
    } else {
        let tden = tls_denominator(params, n_b);
        if tden == 0.0 {
            return Err(SteadyStateError::Singular(
                "γ_q² + (ω_q − ω_m)² + 2g_d²n_b vanishes",
            ));
        }
        let dq = tls.tls_freq - params.mechanical.mech_freq;
        -Complex64::new(tls.coupling * dq, tls.coupling * tls.tls_loss) / tden * b
    };

    Ok(SteadyOptics {
        a_plus,
        a_minus,
        p,
        sigma_minus,
        alpha: t.alpha,
        delta_n,
    })
}

/// Threshold power split into its defect-free and defect parts (W).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub total: f64,
    pub base: f64,
    pub defect: f64,
}

/// Everything the linearized mechanical equation yields at one parameter
/// point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainResult {
    pub g: f64,
    pub g0: f64,
    pub gd: f64,
    pub omega_prime: f64,
    pub c: Complex64,
    pub alpha: f64,
    pub delta_n: f64,
    pub n_b: f64,
    /// Stimulated phonon number exp[2(G − γ_m)/γ_m].
    pub stimulated_n_b: f64,
    pub p_th: f64,
    pub p_th0: f64,
    pub p_thd: f64,
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub p: Complex64,
    pub sigma_minus: Complex64,
}

impl GainResult {
    /// Column order of [`GainResult::csv_row`].
    pub const CSV_HEADER: [&'static str; 24] = [
        "G",
        "G0",
        "Gd",
        "omega_prime",
        "re_C",
        "im_C",
        "alpha",
        "delta_n",
        "n_b",
        "N_b",
        "P_th",
        "P_th0",
        "P_thd",
        "re_a_plus",
        "im_a_plus",
        "re_a_minus",
        "im_a_minus",
        "re_p",
        "im_p",
        "re_sigma_minus",
        "im_sigma_minus",
        "G_minus_gamma_m",
        "log_N_b",
        "above_threshold",
    ];

    pub fn csv_values(&self, mech_loss: f64) -> [f64; 24] {
        [
            self.g,
            self.g0,
            self.gd,
            self.omega_prime,
            self.c.re,
            self.c.im,
            self.alpha,
            self.delta_n,
            self.n_b,
            self.stimulated_n_b,
            self.p_th,
            self.p_th0,
            self.p_thd,
            self.a_plus.re,
            self.a_plus.im,
            self.a_minus.re,
            self.a_minus.im,
            self.p.re,
            self.p.im,
            self.sigma_minus.re,
            self.sigma_minus.im,
            self.g - mech_loss,
            2.0 * (self.g - mech_loss) / mech_loss,
            if self.g > mech_loss { 1.0 } else { 0.0 },
        ]
    }

    /// One CSV row with 17 significant digits.
    pub fn csv_row(&self, mech_loss: f64) -> String {
        self.csv_values(mech_loss)
            .iter()
            .map(|v| crate::output::fmt_float(*v))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Defect contribution G_d = −g_d² γ_q / (γ_q² + (ω_q − ω_m)² + 2g_d² n_b).
pub fn defect_gain(params: &SystemParams, n_b: f64) -> Result<f64, SteadyStateError> {
    check_nb(n_b)?;
    let tls = params.tls();
    if tls.coupling == 0.0 {
        return Ok(0.0);
    }
    let den = tls_denominator(params, n_b);
    if den == 0.0 {
        return Err(SteadyStateError::Singular(
            "γ_q² + (ω_q − ω_m)² + 2g_d²n_b vanishes",
        ));
    }
    Ok(-tls.coupling * tls.coupling * tls.tls_loss / den)
}

/// Mechanical gain, frequency shift, drive term and threshold at `n_b`,
/// linearized about `b = 0`.
pub fn gain(params: &SystemParams, n_b: f64) -> Result<GainResult, SteadyStateError> {
    let t = Terms::new(params, n_b)?;
    let optics = steady_optics(params, Complex64::new(0.0, 0.0), n_b)?;
    let tls = params.tls();
    let dq = tls.tls_freq - params.mechanical.mech_freq;
    let g2 = tls.coupling * tls.coupling;

    let lorentz = 2.0 * t.dj * t.dj + 8.0 * t.gamma * t.gamma;
    let g0 = t.k2 * t.gamma / lorentz
        * (optics.delta_n - t.detuning * t.dj * t.eps2 / t.denom);
    let gd = defect_gain(params, n_b)?;
    let g = g0 + gd;

    let tls_shift = if g2 == 0.0 {
        0.0
    } else {
        g2 * dq / tls_denominator(params, n_b)
    };
    let omega_prime = tls_shift
        - t.k2 * t.dj / (16.0 * t.gamma * t.gamma + 4.0 * t.dj * t.dj)
        - t.k2 * t.detuning * t.eps2 / (lorentz * t.denom);

    let c = I * t.eps2 * t.d.xi_x0() / Complex64::new(4.0 * t.gamma, 2.0 * t.dj)
        * (Complex64::new(t.gamma, -t.coupling_j) * t.alpha
            + 2.0 * t.detuning * t.detuning * t.gamma)
        / t.denom;

    let th = threshold_from_terms(params, &t, n_b);
    let gm = params.mechanical.mech_loss;

    Ok(GainResult {
        g,
        g0,
        gd,
        omega_prime,
        c,
        alpha: t.alpha,
        delta_n: optics.delta_n,
        n_b,
        stimulated_n_b: stimulated_phonon_number(g, gm),
        p_th: th.total,
        p_th0: th.base,
        p_thd: th.defect,
        a_plus: optics.a_plus,
        a_minus: optics.a_minus,
        p: optics.p,
        sigma_minus: optics.sigma_minus,
    })
}

/// N_b = exp[2(G − γ_m)/γ_m].
pub fn stimulated_phonon_number(g: f64, mech_loss: f64) -> f64 {
    (2.0 * (g - mech_loss) / mech_loss).exp()
}

fn threshold_from_terms(params: &SystemParams, t: &Terms, n_b: f64) -> Threshold {
    let tls = params.tls();
    let wc_j = params.optical.cavity_freq + t.coupling_j;
    let gm = params.mechanical.mech_loss;
    let lorentz = t.dj * t.dj + 4.0 * t.gamma * t.gamma;
    // the undefined λ of the threshold formula is read as α
    let base = 2.0 * HBAR * lorentz * wc_j * gm / t.k2
        + HBAR * t.detuning * t.dj * wc_j * t.eps2 / t.denom;
    let defect = if tls.coupling == 0.0 {
        0.0
    } else {
        2.0 * HBAR * tls.coupling * tls.coupling * tls.tls_loss * wc_j * lorentz
            / (t.k2 * tls_denominator(params, n_b))
    };
    Threshold {
        total: base + defect,
        base,
        defect,
    }
}

/// Threshold pump power P_th = P_th,0 + P_th,d at `n_b`.
pub fn threshold_power(params: &SystemParams, n_b: f64) -> Result<Threshold, SteadyStateError> {
    let t = Terms::new(params, n_b)?;
    defect_gain(params, n_b)?;
    Ok(threshold_from_terms(params, &t, n_b))
}

/// Settings for [`solve_nb_fixed_point`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    /// Relaxation η of `n ← (1−η) n + η N_b(G(n))`; the first step always
    /// uses it.
    pub relaxation: f64,
    /// Convergence when |N_b(G(n)) − n| ≤ tol · max(1, n).
    pub tol: f64,
    pub max_iter: usize,
    /// Re-estimate η from the secant slope of the map after each step and
    /// safeguard the step with a bracket on the fixed point.
    pub adaptive: bool,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            relaxation: 0.5,
            tol: 1e-10,
            max_iter: 500,
            adaptive: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub n_b_star: f64,
    pub iterations: usize,
    /// |N_b(G(n*)) − n*| at the returned point.
    pub residual: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// Self-consistent phonon number n* = N_b(G(n*)) by damped fixed-point
/// iteration.
///
/// Non-convergence is reported, not raised; an error is returned only for
/// invalid input.
pub fn solve_nb_fixed_point(
    params: &SystemParams,
    n_b0: f64,
    opts: &FixedPointOptions,
) -> Result<FixedPointReport, SteadyStateError> {
    check_nb(n_b0)?;
    let gm = params.mechanical.mech_loss;
    let map = |n: f64| -> Result<f64, SteadyStateError> {
        let g0 = gain_g(params, n)?;
        Ok(stimulated_phonon_number(g0, gm))
    };

    let mut eta = opts.relaxation.clamp(f64::MIN_POSITIVE, 1.0);
    let mut n = n_b0;
    let mut history = vec![n];
    let mut prev: Option<(f64, f64)> = None;
    let mut residual = f64::INFINITY;
    // n below the fixed point has N_b(G(n)) > n
    let mut below = None::<f64>;
    let mut above = None::<f64>;

    for iter in 1..=opts.max_iter {
        let h = map(n)?;
        let last_residual = residual;
        residual = (h - n).abs();
        if !h.is_finite() {
            return Ok(FixedPointReport {
                n_b_star: n,
                iterations: iter,
                residual,
                converged: false,
                history,
            });
        }
        if residual <= opts.tol * n.max(1.0) {
            return Ok(FixedPointReport {
                n_b_star: n,
                iterations: iter,
                residual,
                converged: true,
                history,
            });
        }
        let mut next = (1.0 - eta) * n + eta * h;
        if opts.adaptive {
            if h > n {
                below = Some(below.map_or(n, |b: f64| b.max(n)));
            } else {
                above = Some(above.map_or(n, |a: f64| a.min(n)));
            }
            if let Some((pn, ph)) = prev {
                let slope = (h - ph) / (n - pn);
                if slope.is_finite() && slope < 1.0 {
                    eta = (1.0 / (1.0 - slope)).clamp(1e-9, 1.0);
                }
            }
            next = (1.0 - eta) * n + eta * h;
            // the map can be exponentially steep; fall back to bisection in
            // ln(1 + n) whenever the relaxed step leaves the bracket or stalls
            if let (Some(lo), Some(hi)) = (below, above) {
                let inside = next > lo.min(hi) && next < lo.max(hi);
                if !inside || residual > 0.5 * last_residual {
                    let mid = 0.5 * (lo.ln_1p() + hi.ln_1p());
                    next = mid.exp_m1();
                }
            }
        }
        prev = Some((n, h));
        n = next.max(0.0);
        history.push(n);
    }

    Ok(FixedPointReport {
        n_b_star: n,
        iterations: opts.max_iter,
        residual,
        converged: false,
        history,
    })
}

/// G alone, without assembling a full [`GainResult`].
fn gain_g(params: &SystemParams, n_b: f64) -> Result<f64, SteadyStateError> {
    let t = Terms::new(params, n_b)?;
    let eps = t.d.eps_l;
    // |a±|² at b = 0 share the denominator 8(α² + 4γ²Δ²)
    let a_plus2 = eps * eps * 4.0 * (t.d.omega_minus.powi(2) + t.gamma * t.gamma) / (8.0 * t.denom);
    let a_minus2 = eps * eps * 4.0 * (t.d.omega_plus.powi(2) + t.gamma * t.gamma) / (8.0 * t.denom);
    let delta_n = a_plus2 - a_minus2;
    let lorentz = 2.0 * t.dj * t.dj + 8.0 * t.gamma * t.gamma;
    let g0 = t.k2 * t.gamma / lorentz * (delta_n - t.detuning * t.dj * t.eps2 / t.denom);
    Ok(g0 + defect_gain(params, n_b)?)
}
