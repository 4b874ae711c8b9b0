//! Acceptance checks, one PASS/FAIL line each. Exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phonlase::dynamics::{
    growth_rate, growth_window, integrate_full, IntegratorSettings, MeanFieldState, Method,
};
use phonlase::spectrum::{eigenvalues, locate_ep, EffectiveParams};
use phonlase::steadystate::{defect_gain, gain, threshold_power};
use phonlase::sweep::{preset, run_sweep, Axis, NbMode, Scale, SweepTable};
use phonlase::{Complex64, SystemParams};

const MHZ: f64 = 1e6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn omega_m() -> f64 {
    2.0 * PI * 23.4 * MHZ
}

fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    let wm = 2.0 * PI * rng.gen_range(5.0..50.0) * MHZ;
    SystemParams::reference_device()
        .with("cavity_freq", 2.0 * PI * rng.gen_range(150.0..300.0) * 1e12)
        .and_then(|p| p.with("cavity_loss", rng.gen_range(1.0..20.0) * MHZ))
        .and_then(|p| p.with("mech_freq", wm))
        .and_then(|p| p.with("coupling", rng.gen_range(0.0..1.0) * wm))
        .and_then(|p| p.with("detuning", rng.gen_range(-1.0..1.0) * wm))
        .and_then(|p| p.with("radius", rng.gen_range(10.0..100.0) * 1e-6))
        .and_then(|p| p.with("pump_power", rng.gen_range(0.0..100.0) * 1e-6))
        .and_then(|p| p.with("mech_loss", rng.gen_range(0.05..1.0) * MHZ))
        .and_then(|p| p.with("eff_mass", rng.gen_range(10.0..100.0) * 1e-12))
        .and_then(|p| p.with("tls_freq", rng.gen_range(0.5..1.5) * wm))
        .and_then(|p| p.with("tls_loss", rng.gen_range(0.01..10.0) * MHZ))
        .and_then(|p| p.with("tls_coupling", 0.0))
        .expect("sampled parameters are valid")
}

fn defect_free_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for _ in 0..10_000 {
        let p = random_params(&mut rng);
        let n_b = 10f64.powf(rng.gen_range(-3.0..7.0));
        let g = gain(&p, n_b).expect("gain");
        let th = threshold_power(&p, n_b).expect("threshold");
        let dev = (g.g - g.g0).abs() / g.g0.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(dev);
        if g.gd != 0.0 || th.defect != 0.0 || g.g != g.g0 || th.total != th.base {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("10000 sets, {bad} violations, max |G-G0|/|G0| = {worst:e}"))
}

fn gq_column_argmin(table: &SweepTable, col: &str) -> usize {
    let v = table.column(col).expect("column");
    (0..v.len()).fold(0, |k, i| if v[i] < v[k] { i } else { k })
}

fn turning_point_sweep() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for n in [1.0, 2.0, 5.0] {
        let start = Instant::now();
        let mut spec = preset("fig2b").expect("preset");
        let gamma = spec.base.optical.cavity_loss;
        spec.axes = vec![Axis::range("tls_loss", 0.05 * gamma, 6.0 * gamma, 2000, Scale::Log)];
        spec.mode = NbMode::Fixed(n);
        let table = run_sweep(&spec, 1).expect("sweep");
        let elapsed = start.elapsed().as_secs_f64();
        let k = gq_column_argmin(&table, "G");
        let gq = table.rows[k][0];
        let target = (2.0 * n).sqrt() * spec.base.tls().coupling;
        let step = (6.0f64 / 0.05).ln() / 1999.0;
        let off = (gq / target).ln().abs() / step;
        let ok = off <= 1.0 && elapsed < 1.0 && k > 0 && k + 1 < table.rows.len();
        pass &= ok;
        details.push(format!("n_b={n}: {off:.2} steps off, {elapsed:.3} s"));
    }
    outcome(pass, details.join("; "))
}

fn ep_degeneracy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let wm = omega_m();
    let (mut worst_gap, mut worst_cross) = (0.0f64, 0.0f64);
    let mut done = 0;
    while done < 1000 {
        let n_b: f64 = rng.gen_range(1.0..10.0);
        let g_d = rng.gen_range(0.1..1.0) * MHZ;
        let gm = rng.gen_range(-2.0..2.0) * MHZ;
        let gq = gm + 2.0 * n_b.sqrt() * g_d;
        if gq < 0.0 {
            continue;
        }
        let eff = EffectiveParams {
            n_b,
            omega_m: wm,
            omega_q: wm,
            gamma_m_eff: gm,
            gamma_q: gq,
            g_d,
        };
        let r = eigenvalues(&eff).expect("spectrum");
        worst_gap = worst_gap.max(r.gap / wm);
        worst_cross = worst_cross.max(r.crosscheck);
        done += 1;
    }
    outcome(
        worst_gap <= 1e-9 && worst_cross <= 1e-12,
        format!("max gap/omega_m = {worst_gap:e}, max closed-vs-direct rel = {worst_cross:e}"),
    )
}

/// Minimizes `f` over ln γ ∈ [ln lo, ln hi] by a scan then golden section.
fn argmin_log(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (a0, b0) = (lo.ln(), hi.ln());
    let cells = 400;
    let h = (b0 - a0) / cells as f64;
    let k = (0..=cells)
        .min_by(|&i, &j| f((a0 + h * i as f64).exp()).total_cmp(&f((a0 + h * j as f64).exp())))
        .unwrap();
    let (mut a, mut b) = (a0 + h * (k as f64 - 1.0), a0 + h * (k as f64 + 1.0));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c.exp()) <= f(d.exp()) {
            b = d;
        } else {
            a = c;
        }
    }
    (0.5 * (a + b)).exp()
}

fn turning_point_before_ep() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let base = SystemParams::reference_device();
    let wm = base.mechanical.mech_freq;
    let mut checked = 0;
    let mut bad = Vec::new();
    let mut tries = 0;
    while checked < 200 && tries < 10_000 {
        tries += 1;
        let n_b: f64 = rng.gen_range(1.0..10.0);
        let p = base
            .with("tls_coupling", rng.gen_range(0.1..3.0) * MHZ)
            .and_then(|p| p.with("pump_power", rng.gen_range(0.0..10.0) * 1e-6))
            .and_then(|p| p.with("tls_freq", wm))
            .unwrap();
        let eff = EffectiveParams::from_system(&p, n_b).unwrap();
        let g_d = eff.g_d;
        let ep = eff.gamma_m_eff + 2.0 * n_b.sqrt() * g_d;
        if !(ep > (2.0 * n_b).sqrt() * g_d) {
            continue;
        }
        checked += 1;
        // G(γ_q) minimum from the gain itself, EP from the discriminant
        let g_of = |gq: f64| defect_gain(&p.with("tls_loss", gq).unwrap(), n_b).unwrap();
        let gq_min = argmin_log(g_of, 1e-3 * g_d, 1e3 * g_d);
        let gq_ep = locate_ep(&eff, (0.0, 10.0 * ep)).unwrap();
        if !(gq_min < gq_ep) {
            bad.push(format!("n_b={n_b:.3} g_d={g_d:e}: min {gq_min:e} vs EP {gq_ep:e}"));
        }
    }
    outcome(
        bad.is_empty() && checked == 200,
        format!("{checked} cases, {} violations {}", bad.len(), bad.join("; ")),
    )
}

fn dynamics_vs_gain() -> Outcome {
    let start = Instant::now();
    let base = SystemParams::reference_device();
    let wm = base.mechanical.mech_freq;
    let gm = base.mechanical.mech_loss;
    let mut lines = Vec::new();
    let mut worst = 0.0f64;
    let mut failed_runs = 0;
    for &p_uw in &[2.0, 3.0, 4.0, 5.0, 6.0] {
        for &g_d in &[0.5 * MHZ, 1.0 * MHZ] {
            let p = base
                .with("pump_power", p_uw / 1e6)
                .and_then(|p| p.with("tls_coupling", g_d))
                .and_then(|p| p.with("coupling", 0.5 * wm))
                .and_then(|p| p.with("tls_freq", wm))
                .unwrap();
            let init = MeanFieldState::with_steady_optics(&p, Complex64::new(30.0, 0.0)).unwrap();
            let mut settings = IntegratorSettings::fixed(2e-10, 6e-6, 5);
            settings.method = Method::Rk4Adaptive;
            settings.rtol = 1e-9;
            settings.atol = 1e-9;
            let traj = match integrate_full(&p, init, &settings) {
                Ok(t) => t,
                Err(e) => {
                    failed_runs += 1;
                    lines.push(format!("P={p_uw}uW g_d={g_d:e}: {e}"));
                    continue;
                }
            };
            let w = growth_window(&traj, 1e-6, 15.0);
            let fit = growth_rate(&traj, w).unwrap();
            let (mut nb, mut count) = (0.0, 0.0);
            for (t, s) in traj.times.iter().zip(&traj.states) {
                if *t >= w.0 && *t <= w.1 {
                    nb += s.b.norm_sqr();
                    count += 1.0;
                }
            }
            let expect = gain(&p, nb / count).unwrap().g - gm;
            let rel = (fit.rate - expect).abs() / expect.abs();
            worst = worst.max(rel);
            lines.push(format!("P={p_uw}uW g_d={g_d:.1e}: fit {:.3e} vs {expect:.3e}", fit.rate));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        worst <= 0.10 && failed_runs == 0 && elapsed < 30.0,
        format!("max rel err {worst:.3}, {elapsed:.1} s [{}]", lines.join("; ")),
    )
}

fn bloch_invariant(s: &MeanFieldState) -> f64 {
    s.sigma_z * s.sigma_z + 4.0 * s.sigma_minus.norm_sqr()
}

fn conservation() -> Outcome {
    let p = SystemParams::reference_device()
        .with("pump_power", 0.0)
        .and_then(|p| p.with("tls_loss", 0.0))
        .and_then(|p| p.with("mech_loss", 1e-12))
        .unwrap();
    let wm = p.mechanical.mech_freq;
    let periods = 1000.0;
    let t_final = periods * 2.0 * PI / wm;
    let init = MeanFieldState {
        b: Complex64::new(1.0, 0.0),
        sigma_minus: Complex64::new(0.3, 0.1),
        sigma_z: -(1.0f64 - 4.0 * 0.1).sqrt(),
        ..Default::default()
    };
    let i0 = bloch_invariant(&init);
    let run = |dt: f64| {
        let steps = (t_final / dt).round();
        integrate_full(&p, init, &IntegratorSettings::fixed(t_final / steps, t_final, 1000))
            .expect("integrate")
    };
    let dt = 0.005 / wm;
    let coarse = run(2.0 * dt);
    let fine = run(dt);
    let finer = run(dt / 2.0);
    let drift = fine
        .states
        .iter()
        .map(|s| (bloch_invariant(s) - i0).abs() / i0)
        .fold(0.0, f64::max);
    let e1 = (coarse.final_state().b - fine.final_state().b).norm()
        + (coarse.final_state().sigma_minus - fine.final_state().sigma_minus).norm();
    let e2 = (fine.final_state().b - finer.final_state().b).norm()
        + (fine.final_state().sigma_minus - finer.final_state().sigma_minus).norm();
    let ratio = e1 / e2;
    let order = ratio.log2();
    outcome(
        drift <= 1e-9 && (3.5..=4.5).contains(&order),
        format!("max rel drift {drift:e} over {periods} periods, step-halving order {order:.2}"),
    )
}

fn optimal_detuning() -> Outcome {
    let spec = preset("fig3a").expect("preset");
    let wm = spec.base.mechanical.mech_freq;
    let table = run_sweep(&spec, 0).expect("sweep");
    let g = table.column("G").expect("G");
    let k = (0..g.len()).fold(0, |k, i| if g[i] > g[k] { i } else { k });
    let (d, j) = (table.rows[k][0] / wm, table.rows[k][1] / wm);
    let ok = (d - 0.5).abs() <= 0.05 && (j - 0.5).abs() <= 0.05;
    outcome(ok, format!("argmax G at Delta = {d:.4} omega_m, J = {j:.4} omega_m"))
}

fn phonon_number_turning_point() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for mode in [None, Some(NbMode::Fixed(1.0)), Some(NbMode::Fixed(5.0))] {
        let mut spec = preset("fig6b").expect("preset");
        if let Some(m) = mode {
            spec.mode = m;
        }
        let table = run_sweep(&spec, 0).expect("sweep");
        let kn = gq_column_argmin(&table, "N_b");
        let kg = gq_column_argmin(&table, "G");
        pass &= kn == kg;
        details.push(format!("{}: argmin N_b row {kn}, argmin G row {kg}", spec.mode));
    }
    outcome(pass, details.join("; "))
}

fn phase_classification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let wm = omega_m();
    let (mut below_worst, mut above_worst) = (0.0f64, 1.0f64);
    for _ in 0..1000 {
        let n_b: f64 = rng.gen_range(1.0..100.0);
        let g_d = rng.gen_range(0.1..3.0) * MHZ;
        // |γ′_m| < 2√n_b g_d: otherwise γ_q = 0 already lies past the lower
        // coalescence at γ′_m − 2√n_b g_d and the "below EP" band is broken
        let gm = rng.gen_range(-1.9..1.9) * n_b.sqrt() * g_d;
        let eff = EffectiveParams {
            n_b,
            omega_m: wm,
            omega_q: wm,
            gamma_m_eff: gm,
            gamma_q: 0.0,
            g_d,
        };
        let ep = eff.gamma_q_ep();
        for f in [0.0, 0.1, 0.3, 0.5] {
            let r = eigenvalues(&eff.with_gamma_q(f * ep)).unwrap();
            below_worst = below_worst.max(r.localization());
        }
        for f in [5.0, 10.0, 100.0] {
            let r = eigenvalues(&eff.with_gamma_q(f * ep)).unwrap();
            above_worst = above_worst.min(r.localization());
        }
    }
    outcome(
        below_worst <= 1e-6 && above_worst >= 0.5,
        format!("max L below EP {below_worst:e}, min L above EP {above_worst:.4}"),
    )
}

type Check = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let checks: [Check; 9] = [
        ("defect-free reduction", defect_free_reduction),
        ("turning point of G at sqrt(2 n_b) g_d", turning_point_sweep),
        ("EP degeneracy", ep_degeneracy),
        ("turning point below EP", turning_point_before_ep),
        ("full dynamics vs analytic gain", dynamics_vs_gain),
        ("Bloch-length conservation", conservation),
        ("optimal detuning and coupling", optimal_detuning),
        ("phonon-number turning point", phonon_number_turning_point),
        ("phase classification", phase_classification),
    ];
    let mut failures = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!(
            "{} criterion {}: {name} ({})",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("{} of {} criteria passed", checks.len() - failures, checks.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
