//! Mean-field integration of the supermode equations.
//!
//! [`integrate_full`] evolves (a+, a−, b, σ−, σz) with every operator product
//! factorized; [`integrate_reduced`] evolves the supermode coherence
//! p = a−* a+ instead of the two optical amplitudes, with a± taken
//! quasi-statically from the steady-state expressions at the current b.
//!
//! Both use classical fourth-order Runge–Kutta, fixed step by default, with
//! an optional step-doubling adaptive mode. Above threshold the mechanical
//! amplitude grows without bound; use [`growth_rate`] on an early window.

use std::f64::consts::SQRT_2;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::output::fmt_float;
use crate::params::SystemParams;
use crate::steadystate::{steady_optics, SteadyStateError};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

type Vec5 = [Complex64; 5];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("invalid integrator setting {field} = {value}: {reason}")]
    Settings {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("initial state is not finite")]
    NonFiniteInit,
    #[error("state diverged at t = {time:e} s")]
    Diverged { time: f64 },
    #[error("adaptive step size underflowed at t = {time:e} s")]
    StepUnderflow { time: f64 },
    #[error("fit window [{t0:e}, {t1:e}] s is not inside the trajectory [{start:e}, {end:e}] s")]
    WindowOutside { t0: f64, t1: f64, start: f64, end: f64 },
    #[error("fit window holds {0} samples, need at least 3")]
    TooFewPoints(usize),
    #[error("|b| vanishes at t = {time:e} s")]
    ZeroAmplitude { time: f64 },
    #[error(transparent)]
    SteadyState(#[from] SteadyStateError),
}

/// A state the integrators can advance.
pub trait OdeState: Copy {
    const CSV_HEADER: &'static [&'static str];
    fn pack(&self) -> Vec5;
    fn unpack(v: &Vec5) -> Self;
    fn b(&self) -> Complex64;
    fn csv_values(&self) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub b: Complex64,
    pub sigma_minus: Complex64,
    pub sigma_z: f64,
}

impl Default for MeanFieldState {
    /// Empty cavities, a 10⁻³ phonon seed and the TLS in its ground state.
    fn default() -> Self {
        MeanFieldState {
            a_plus: ZERO,
            a_minus: ZERO,
            b: Complex64::new(1e-3, 0.0),
            sigma_minus: ZERO,
            sigma_z: -1.0,
        }
    }
}

impl MeanFieldState {
    /// Optical amplitudes already at their steady state for amplitude `b`,
    /// TLS in the ground state. Skips the optical transient.
    pub fn with_steady_optics(params: &SystemParams, b: Complex64) -> Result<Self, DynamicsError> {
        let s = steady_optics(params, b, b.norm_sqr())?;
        Ok(MeanFieldState {
            a_plus: s.a_plus,
            a_minus: s.a_minus,
            b,
            sigma_minus: ZERO,
            sigma_z: -1.0,
        })
    }

    /// σz² + 4|σ−|², conserved by the undamped TLS.
    pub fn bloch_length(&self) -> f64 {
        self.sigma_z * self.sigma_z + 4.0 * self.sigma_minus.norm_sqr()
    }

    pub fn delta_n(&self) -> f64 {
        self.a_plus.norm_sqr() - self.a_minus.norm_sqr()
    }
}

impl OdeState for MeanFieldState {
    const CSV_HEADER: &'static [&'static str] = &[
        "t",
        "re_a_plus",
        "im_a_plus",
        "re_a_minus",
        "im_a_minus",
        "re_b",
        "im_b",
        "re_sigma_minus",
        "im_sigma_minus",
        "sigma_z",
        "abs_b",
    ];

    fn pack(&self) -> Vec5 {
        [
            self.a_plus,
            self.a_minus,
            self.b,
            self.sigma_minus,
            Complex64::new(self.sigma_z, 0.0),
        ]
    }

    fn unpack(v: &Vec5) -> Self {
        MeanFieldState {
            a_plus: v[0],
            a_minus: v[1],
            b: v[2],
            sigma_minus: v[3],
            sigma_z: v[4].re,
        }
    }

    fn b(&self) -> Complex64 {
        self.b
    }

    fn csv_values(&self) -> Vec<f64> {
        vec![
            self.a_plus.re,
            self.a_plus.im,
            self.a_minus.re,
            self.a_minus.im,
            self.b.re,
            self.b.im,
            self.sigma_minus.re,
            self.sigma_minus.im,
            self.sigma_z,
            self.b.norm(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    /// Supermode coherence a−* a+.
    pub p: Complex64,
    pub b: Complex64,
    pub sigma_minus: Complex64,
    pub sigma_z: f64,
    /// Population inversion |a+|² − |a−|².
    pub delta_n: f64,
}

impl ReducedState {
    /// p at the pattern the reduced equations settle into for a fixed `b`,
    /// δn at its b = 0 value, TLS in the ground state.
    ///
    /// The b-independent part of the drive is static in the pump frame and
    /// relaxes through 2γ + 2iJ; the part proportional to b co-rotates with
    /// the mechanics and relaxes through 2γ + i(2J − ω_m).
    pub fn with_steady_coherence(params: &SystemParams, b: Complex64) -> Result<Self, DynamicsError> {
        let s0 = steady_optics(params, ZERO, 0.0)?;
        let model = ReducedModel::new(params, InversionClosure::Fixed);
        let f = &model.full;
        let drive = |b: Complex64| {
            let (ap, am) = model.optics(b);
            (model.eps * ap + model.eps * am.conj()) / SQRT_2
        };
        let d0 = drive(ZERO);
        let gamma = f.gamma;
        let j = model.coupling_j;
        let static_part = d0 / Complex64::new(2.0 * gamma, 2.0 * j);
        let moving = (drive(b) - d0 - I * f.k * s0.delta_n * b)
            / Complex64::new(2.0 * gamma, 2.0 * j - f.omega_m);
        Ok(ReducedState {
            p: static_part + moving,
            b,
            sigma_minus: ZERO,
            sigma_z: -1.0,
            delta_n: s0.delta_n,
        })
    }
}

impl OdeState for ReducedState {
    const CSV_HEADER: &'static [&'static str] = &[
        "t",
        "re_p",
        "im_p",
        "re_b",
        "im_b",
        "re_sigma_minus",
        "im_sigma_minus",
        "sigma_z",
        "delta_n",
        "abs_b",
    ];

    fn pack(&self) -> Vec5 {
        [
            self.p,
            self.b,
            self.sigma_minus,
            Complex64::new(self.sigma_z, 0.0),
            Complex64::new(self.delta_n, 0.0),
        ]
    }

    fn unpack(v: &Vec5) -> Self {
        ReducedState {
            p: v[0],
            b: v[1],
            sigma_minus: v[2],
            sigma_z: v[3].re,
            delta_n: v[4].re,
        }
    }

    fn b(&self) -> Complex64 {
        self.b
    }

    fn csv_values(&self) -> Vec<f64> {
        vec![
            self.p.re,
            self.p.im,
            self.b.re,
            self.b.im,
            self.sigma_minus.re,
            self.sigma_minus.im,
            self.sigma_z,
            self.delta_n,
            self.b.norm(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rk4Fixed,
    /// RK4 with step doubling; `dt` is the initial step.
    Rk4Adaptive,
}

/// How the reduced model treats δn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InversionClosure {
    /// δn stays at its initial value.
    Fixed,
    /// δn = |a+|² − |a−|² of the quasi-static a± at the current b.
    FullClosure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub dt: f64,
    pub t_final: f64,
    pub method: Method,
    /// Record every `stride`-th step (the last step is always recorded).
    pub stride: usize,
    pub rtol: f64,
    pub atol: f64,
    pub closure: InversionClosure,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            dt: 1e-10,
            t_final: 1e-6,
            method: Method::Rk4Fixed,
            stride: 1,
            rtol: 1e-9,
            atol: 1e-12,
            closure: InversionClosure::Fixed,
        }
    }
}

impl IntegratorSettings {
    pub fn fixed(dt: f64, t_final: f64, stride: usize) -> Self {
        IntegratorSettings {
            dt,
            t_final,
            stride,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |field, value, reason| Err(DynamicsError::Settings { field, value, reason });
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", self.dt, "must be > 0");
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad("t_final", self.t_final, "must be > 0");
        }
        if self.stride == 0 {
            return bad("stride", 0.0, "must be >= 1");
        }
        if self.method == Method::Rk4Adaptive && !(self.rtol > 0.0 && self.atol >= 0.0) {
            return bad("rtol", self.rtol, "must be > 0 with atol >= 0");
        }
        Ok(())
    }

    /// Fastest frequency in the rotating frame, including the TLS Rabi
    /// frequency 2g_d|b| at amplitude `b_abs`.
    fn fastest(params: &SystemParams, b_abs: f64) -> f64 {
        let d = params.derive();
        let tls = params.tls();
        [
            params.mechanical.mech_freq,
            tls.tls_freq,
            2.0 * params.optical.coupling,
            d.omega_plus.abs(),
            d.omega_minus.abs(),
            2.0 * tls.coupling * b_abs,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Warning when a fixed step does not resolve the fastest oscillation
    /// (dt·ω_max > 0.1) at mechanical amplitude `b_abs`.
    ///
    /// The Rabi frequency grows with |b|, so a step that resolves the initial
    /// state can turn unstable once the amplitude has grown.
    pub fn resolution_warning(&self, params: &SystemParams, b_abs: f64) -> Option<String> {
        let w = Self::fastest(params, b_abs);
        let x = self.dt * w;
        (self.method == Method::Rk4Fixed && x > 0.1)
            .then(|| format!("dt·ω_max = {x:.3} exceeds 0.1; oscillations are under-resolved"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub settings: IntegratorSettings,
    pub warnings: Vec<String>,
}

impl<S: OdeState> Trajectory<S> {
    pub fn final_state(&self) -> S {
        *self.states.last().expect("trajectory holds the initial state")
    }

    /// Write the trajectory as CSV with a header row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", S::CSV_HEADER.join(","))?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = vec![fmt_float(*t)];
            row.extend(s.csv_values().into_iter().map(fmt_float));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Coefficients of the full equations.
#[derive(Debug, Clone, Copy)]
struct FullModel {
    w_plus: f64,
    w_minus: f64,
    gamma: f64,
    /// ξx0 / 2
    k: f64,
    /// ε_l / √2
    drive: f64,
    omega_m: f64,
    gamma_m: f64,
    g: f64,
    omega_q: f64,
    gamma_q: f64,
}

impl FullModel {
    fn new(params: &SystemParams) -> Self {
        let d = params.derive();
        let tls = params.tls();
        FullModel {
            w_plus: d.omega_plus,
            w_minus: d.omega_minus,
            gamma: params.optical.cavity_loss,
            k: d.xi_x0() / 2.0,
            drive: d.eps_l / SQRT_2,
            omega_m: params.mechanical.mech_freq,
            gamma_m: params.mechanical.mech_loss,
            g: tls.coupling,
            omega_q: tls.tls_freq,
            gamma_q: tls.tls_loss,
        }
    }

    fn tls_rhs(&self, b: Complex64, sm: Complex64, sz: f64) -> (Complex64, f64) {
        let dsm = Complex64::new(-self.gamma_q, -self.omega_q) * sm + I * self.g * b * sz;
        let dsz = -2.0 * self.gamma_q * (sz + 1.0) + 4.0 * self.g * (sm.conj() * b).im;
        (dsm, dsz)
    }

    fn rhs(&self, y: &Vec5) -> Vec5 {
        let [ap, am, b, sm, sz] = *y;
        let drive = Complex64::new(self.drive, 0.0);
        let dap = Complex64::new(-self.gamma, -self.w_plus) * ap + I * self.k * am * b + drive;
        let dam =
            Complex64::new(-self.gamma, -self.w_minus) * am + I * self.k * ap * b.conj() + drive;
        let db = Complex64::new(-self.gamma_m, -self.omega_m) * b + I * self.k * am.conj() * ap
            - I * self.g * sm;
        let (dsm, dsz) = self.tls_rhs(b, sm, sz.re);
        [dap, dam, db, dsm, Complex64::new(dsz, 0.0)]
    }
}

/// Coefficients of the reduced equations, with the quasi-static a± closure.
#[derive(Debug, Clone, Copy)]
struct ReducedModel {
    full: FullModel,
    coupling_j: f64,
    eps: f64,
    /// J² + γ² − Δ²
    alpha0: f64,
    /// ξ² x0²
    k2: f64,
    detuning: f64,
    closure: InversionClosure,
}

impl ReducedModel {
    fn new(params: &SystemParams, closure: InversionClosure) -> Self {
        let o = &params.optical;
        let d = params.derive();
        ReducedModel {
            full: FullModel::new(params),
            coupling_j: o.coupling,
            eps: d.eps_l,
            alpha0: o.coupling * o.coupling + o.cavity_loss * o.cavity_loss - o.detuning * o.detuning,
            k2: d.xi_x0() * d.xi_x0(),
            detuning: o.detuning,
            closure,
        }
    }

    /// Steady-state a± for amplitude `b`, with n_b = |b|².
    fn optics(&self, b: Complex64) -> (Complex64, Complex64) {
        let f = &self.full;
        let alpha = self.alpha0 + self.k2 * b.norm_sqr() / 4.0;
        let den = Complex64::new(2.0 * SQRT_2 * alpha, -4.0 * SQRT_2 * f.gamma * self.detuning);
        let xk = 2.0 * f.k;
        let ap = self.eps * (2.0 * I * f.w_minus + 2.0 * f.gamma + I * xk * b) / den;
        let am = self.eps * (2.0 * I * f.w_plus + 2.0 * f.gamma + I * xk * b.conj()) / den;
        (ap, am)
    }

    fn rhs(&self, y: &Vec5) -> Vec5 {
        let f = &self.full;
        let [p, b, sm, sz, dn] = *y;
        let (ap, am) = self.optics(b);
        let delta_n = match self.closure {
            InversionClosure::Fixed => dn.re,
            InversionClosure::FullClosure => ap.norm_sqr() - am.norm_sqr(),
        };
        let dp = Complex64::new(-2.0 * f.gamma, -2.0 * self.coupling_j) * p
            - I * f.k * delta_n * b
            + (self.eps * ap + self.eps * am.conj()) / SQRT_2;
        let db = Complex64::new(-f.gamma_m, -f.omega_m) * b + I * f.k * p - I * f.g * sm;
        let (dsm, dsz) = f.tls_rhs(b, sm, sz.re);
        // δn is carried along for output; in full-closure mode it is
        // overwritten after each step
        [dp, db, dsm, Complex64::new(dsz, 0.0), ZERO]
    }
}

fn axpy(y: &Vec5, h: f64, k: &Vec5) -> Vec5 {
    std::array::from_fn(|i| y[i] + k[i] * h)
}

fn rk4_step<F: Fn(&Vec5) -> Vec5>(f: &F, y: &Vec5, h: f64) -> Vec5 {
    let k1 = f(y);
    let k2 = f(&axpy(y, h / 2.0, &k1));
    let k3 = f(&axpy(y, h / 2.0, &k2));
    let k4 = f(&axpy(y, h, &k3));
    std::array::from_fn(|i| y[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
}

fn finite(y: &Vec5) -> bool {
    y.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Drive `f` from `y0` under `settings`; `post` fixes up each accepted state.
fn run<S, F, P>(
    f: F,
    post: P,
    init: S,
    settings: &IntegratorSettings,
    warnings: Vec<String>,
) -> Result<Trajectory<S>, DynamicsError>
where
    S: OdeState,
    F: Fn(&Vec5) -> Vec5,
    P: Fn(&mut Vec5),
{
    settings.validate()?;
    let mut y = init.pack();
    if !finite(&y) {
        return Err(DynamicsError::NonFiniteInit);
    }
    let mut times = vec![0.0];
    let mut states = vec![init];
    let t_end = settings.t_final;

    match settings.method {
        Method::Rk4Fixed => {
            let n_steps = (t_end / settings.dt).ceil().max(1.0) as usize;
            let mut t = 0.0;
            for k in 1..=n_steps {
                let t_next = if k == n_steps { t_end } else { k as f64 * settings.dt };
                y = rk4_step(&f, &y, t_next - t);
                post(&mut y);
                t = t_next;
                if !finite(&y) {
                    return Err(DynamicsError::Diverged { time: t });
                }
                if k % settings.stride == 0 || k == n_steps {
                    times.push(t);
                    states.push(S::unpack(&y));
                }
            }
        }
        Method::Rk4Adaptive => {
            let mut t = 0.0;
            let mut h = settings.dt.min(t_end);
            let mut accepted = 0usize;
            while t < t_end {
                let h_try = h.min(t_end - t);
                let full = rk4_step(&f, &y, h_try);
                let half = rk4_step(&f, &rk4_step(&f, &y, h_try / 2.0), h_try / 2.0);
                let err = (0..5)
                    .map(|i| {
                        let scale = settings.atol + settings.rtol * half[i].norm().max(y[i].norm());
                        (half[i] - full[i]).norm() / 15.0 / scale
                    })
                    .fold(0.0, f64::max);
                if !err.is_finite() {
                    return Err(DynamicsError::Diverged { time: t + h_try });
                }
                if err <= 1.0 {
                    // Richardson extrapolation of the two estimates
                    y = std::array::from_fn(|i| half[i] + (half[i] - full[i]) / 15.0);
                    post(&mut y);
                    t = if t_end - t <= h_try { t_end } else { t + h_try };
                    accepted += 1;
                    if !finite(&y) {
                        return Err(DynamicsError::Diverged { time: t });
                    }
                    if accepted.is_multiple_of(settings.stride) || t >= t_end {
                        times.push(t);
                        states.push(S::unpack(&y));
                    }
                }
                let factor = if err == 0.0 { 4.0 } else { 0.9 * err.powf(-0.2) };
                h = h_try * factor.clamp(0.2, 4.0);
                if h < 1e-14 * t_end {
                    return Err(DynamicsError::StepUnderflow { time: t });
                }
            }
        }
    }

    Ok(Trajectory {
        times,
        states,
        settings: *settings,
        warnings,
    })
}

fn collect_warnings(params: &SystemParams, settings: &IntegratorSettings, b_abs: f64) -> Vec<String> {
    let mut w = params.warnings();
    w.extend(settings.resolution_warning(params, b_abs));
    w
}

/// Integrate the full mean-field equations.
pub fn integrate_full(
    params: &SystemParams,
    init: MeanFieldState,
    settings: &IntegratorSettings,
) -> Result<Trajectory<MeanFieldState>, DynamicsError> {
    let model = FullModel::new(params);
    run(
        |y| model.rhs(y),
        |_| {},
        init,
        settings,
        collect_warnings(params, settings, init.b.norm()),
    )
}

/// Integrate the reduced equations with the quasi-static optical closure.
pub fn integrate_reduced(
    params: &SystemParams,
    init: ReducedState,
    settings: &IntegratorSettings,
) -> Result<Trajectory<ReducedState>, DynamicsError> {
    let model = ReducedModel::new(params, settings.closure);
    let mut init = init;
    if settings.closure == InversionClosure::FullClosure {
        let (ap, am) = model.optics(init.b);
        init.delta_n = ap.norm_sqr() - am.norm_sqr();
    }
    run(
        |y| model.rhs(y),
        |y| {
            if model.closure == InversionClosure::FullClosure {
                let (ap, am) = model.optics(y[1]);
                y[4] = Complex64::new(ap.norm_sqr() - am.norm_sqr(), 0.0);
            }
        },
        init,
        settings,
        collect_warnings(params, settings, init.b.norm()),
    )
}

/// Least-squares slope of ln|b(t)|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Rate (s⁻¹); positive for growth.
    pub rate: f64,
    /// Standard error of the slope from the fit residuals.
    pub stderr: f64,
    pub points: usize,
}

/// Fit ln|b| over the samples with t0 ≤ t ≤ t1.
pub fn growth_rate<S: OdeState>(
    traj: &Trajectory<S>,
    window: (f64, f64),
) -> Result<GrowthFit, DynamicsError> {
    let (t0, t1) = window;
    let start = traj.times[0];
    let end = *traj.times.last().unwrap_or(&start);
    if !(t0 >= start && t1 <= end && t0 < t1) {
        return Err(DynamicsError::WindowOutside { t0, t1, start, end });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, s) in traj.times.iter().zip(&traj.states) {
        if *t < t0 || *t > t1 {
            continue;
        }
        let amp = s.b().norm();
        if amp == 0.0 {
            return Err(DynamicsError::ZeroAmplitude { time: *t });
        }
        xs.push(*t);
        ys.push(amp.ln());
    }
    fit_line(&xs, &ys)
}

fn fit_line(xs: &[f64], ys: &[f64]) -> Result<GrowthFit, DynamicsError> {
    let n = xs.len();
    if n < 3 {
        return Err(DynamicsError::TooFewPoints(n));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    Ok(GrowthFit {
        rate: slope,
        stderr: (ssr / (nf - 2.0) / sxx).sqrt(),
        points: n,
    })
}

/// Early-time fit window: skip the first `skip` seconds, stop once |b| has
/// grown by `max_growth` over its initial value (or at the end).
pub fn growth_window<S: OdeState>(traj: &Trajectory<S>, skip: f64, max_growth: f64) -> (f64, f64) {
    let start = traj.times[0];
    let b0 = traj.states[0].b().norm();
    let mut end = *traj.times.last().unwrap_or(&start);
    for (t, s) in traj.times.iter().zip(&traj.states) {
        if *t > start + skip && s.b().norm() >= max_growth * b0 {
            end = *t;
            break;
        }
    }
    ((start + skip).min(end), end)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bare() -> SystemParams {
        SystemParams::reference_device()
            .with("pump_power", 0.0)
            .unwrap()
            .with("tls_coupling", 0.0)
            .unwrap()
    }

    #[test]
    fn decoupled_oscillator_decays_at_gamma_m() {
        let p = bare();
        let init = MeanFieldState {
            b: Complex64::new(1.0, 0.0),
            ..Default::default()
        };
        let t = 2e-6;
        let traj = integrate_full(&p, init, &IntegratorSettings::fixed(2.5e-11, t, 1000)).unwrap();
        let b = traj.final_state().b;
        let wm = p.mechanical.mech_freq;
        let expect = Complex64::from_polar((-p.mechanical.mech_loss * t).exp(), -wm * t);
        assert!((b - expect).norm() < 1e-9, "{b} vs {expect}");
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let p = SystemParams::reference_device();
        let s = IntegratorSettings::fixed(2e-10, 2e-7, 7);
        let a = integrate_full(&p, MeanFieldState::default(), &s).unwrap();
        let b = integrate_full(&p, MeanFieldState::default(), &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stride_keeps_first_and_last() {
        let s = IntegratorSettings::fixed(1e-9, 1.05e-7, 10);
        let traj = integrate_full(&bare(), MeanFieldState::default(), &s).unwrap();
        assert_eq!(traj.times[0], 0.0);
        assert_eq!(*traj.times.last().unwrap(), 1.05e-7);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(traj.times.len(), traj.states.len());
    }

    #[test]
    fn coarse_step_warns() {
        let s = IntegratorSettings::fixed(1e-8, 1e-7, 1);
        let traj = integrate_full(&bare(), MeanFieldState::default(), &s).unwrap();
        assert!(traj.warnings.iter().any(|w| w.contains("under-resolved")));
    }

    #[test]
    fn bad_settings_are_rejected() {
        let s = IntegratorSettings::fixed(0.0, 1e-7, 1);
        assert!(matches!(
            integrate_full(&bare(), MeanFieldState::default(), &s),
            Err(DynamicsError::Settings { field: "dt", .. })
        ));
        let init = MeanFieldState {
            b: Complex64::new(f64::NAN, 0.0),
            ..Default::default()
        };
        assert_eq!(
            integrate_full(&bare(), init, &IntegratorSettings::default()),
            Err(DynamicsError::NonFiniteInit)
        );
    }

    #[test]
    fn blow_up_reports_time() {
        let s = IntegratorSettings::fixed(1e-6, 1e-3, 1);
        let init = MeanFieldState {
            b: Complex64::new(1.0, 0.0),
            ..Default::default()
        };
        match integrate_full(&bare(), init, &s) {
            Err(DynamicsError::Diverged { time }) => assert!(time > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn adaptive_matches_fixed_on_decoupled_case() {
        let p = bare();
        let init = MeanFieldState {
            b: Complex64::new(1.0, 0.0),
            ..Default::default()
        };
        let mut s = IntegratorSettings::fixed(1e-10, 1e-6, 1000);
        let fixed = integrate_full(&p, init, &s).unwrap().final_state();
        s.method = Method::Rk4Adaptive;
        s.dt = 1e-11;
        let adaptive = integrate_full(&p, init, &s).unwrap().final_state();
        assert!((fixed.b - adaptive.b).norm() < 1e-7);
    }

    #[test]
    fn isolated_tls_relaxes_at_twice_its_loss() {
        let p = bare();
        let init = ReducedState {
            p: ZERO,
            b: ZERO,
            sigma_minus: ZERO,
            sigma_z: 0.5,
            delta_n: 0.0,
        };
        let t = 2e-7;
        let traj = integrate_reduced(&p, init, &IntegratorSettings::fixed(1e-10, t, 100)).unwrap();
        let gq = p.tls().tls_loss;
        let expect = -1.0 + 1.5 * (-2.0 * gq * t).exp();
        assert!((traj.final_state().sigma_z - expect).abs() < 1e-10);
    }

    #[test]
    fn exact_exponentials_fit_exactly() {
        for rate in [0.5e6, -0.24e6] {
            let times: Vec<f64> = (0..200).map(|k| k as f64 * 1e-8).collect();
            let states = times
                .iter()
                .map(|t| ReducedState {
                    p: ZERO,
                    b: Complex64::from_polar((rate * t).exp(), 3.0 * t),
                    sigma_minus: ZERO,
                    sigma_z: -1.0,
                    delta_n: 0.0,
                })
                .collect();
            let traj = Trajectory {
                times,
                states,
                settings: IntegratorSettings::default(),
                warnings: vec![],
            };
            let fit = growth_rate(&traj, (0.0, 1.99e-6)).unwrap();
            assert!((fit.rate - rate).abs() <= 1e-6 * rate.abs() + fit.stderr, "{fit:?}");
        }
    }

    #[test]
    fn fit_errors() {
        let traj = integrate_full(&bare(), MeanFieldState::default(), &IntegratorSettings::fixed(1e-9, 1e-8, 1))
            .unwrap();
        assert!(matches!(
            growth_rate(&traj, (0.0, 1.0)),
            Err(DynamicsError::WindowOutside { .. })
        ));
        let init = MeanFieldState {
            b: ZERO,
            ..Default::default()
        };
        let traj = integrate_full(&bare(), init, &IntegratorSettings::fixed(1e-9, 1e-8, 1)).unwrap();
        assert!(matches!(
            growth_rate(&traj, (0.0, 1e-8)),
            Err(DynamicsError::ZeroAmplitude { .. })
        ));
    }

    #[test]
    fn csv_header_matches_columns() {
        let traj = integrate_full(&bare(), MeanFieldState::default(), &IntegratorSettings::fixed(1e-9, 3e-9, 1))
            .unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("t,re_a_plus"));
        assert!(header.ends_with("sigma_z,abs_b"));
        let n = header.split(',').count();
        assert!(lines.all(|l| l.split(',').count() == n));
    }
}
