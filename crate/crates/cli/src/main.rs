//! Command-line front end: sweeps, presets, single trajectories and solver
//! diagnostics.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical
//! non-convergence, 3 I/O error.

mod axis;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use phonlase::config::{to_config_string, ConfigError, Overlay};
use phonlase::dynamics::{
    growth_rate, growth_window, integrate_full, integrate_reduced, InversionClosure,
    IntegratorSettings, MeanFieldState, Method, ReducedState,
};
use phonlase::output::{emit_outputs, Format, OutputError};
use phonlase::spectrum::{locate_ep, turning_point, EffectiveParams};
use phonlase::steadystate::{solve_nb_fixed_point, FixedPointOptions};
use phonlase::sweep::{preset, run_sweep, NbMode, Observable, SweepSpec, SweepTable};
use phonlase::units::{Quantity, UnitClass};
use phonlase::{Complex64, SystemParams};

#[derive(Debug, Parser)]
#[command(name = "phonlase", version, about = "Defect-coupled optomechanical phonon-laser simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Parameter file (TOML with unit-tagged values)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one parameter, e.g. --set "pump_power=7 uW" (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output directory
    #[arg(long, default_value = "out", global = true)]
    out: PathBuf,
    /// Comma-separated output formats: csv, plot
    #[arg(long, default_value = "csv,plot", global = true)]
    format: String,
    /// Worker threads for sweeps (0 = all cores)
    #[arg(long, default_value_t = 0, global = true)]
    jobs: usize,
    /// Phonon number: fixed-nb:<value> or self-consistent
    #[arg(long, global = true)]
    mode: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the mechanical gain
    GainSweep(SweepArgs),
    /// Sweep the threshold power
    ThresholdSweep(SweepArgs),
    /// Sweep the effective TLS–phonon spectrum
    SpectrumSweep(SweepArgs),
    /// Integrate the mean-field equations and fit the growth rate of |b|
    Integrate(IntegrateArgs),
    /// Locate the exceptional point in γ_q
    EpLocate(EpArgs),
    /// Solve for the self-consistent phonon number
    FixedPoint(FixedPointArgs),
    /// Reproduce one figure: fig2a, fig2b, fig3a, fig3b, fig4, fig5, fig6a, fig6b
    Preset(PresetArgs),
    /// Parse and validate parameters, then print them fully resolved
    ValidateConfig,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Axis as path=start:end:points[:log][@unit] or path=v1,v2,..[@unit]
    /// (one or two)
    #[arg(long, required = true)]
    axis: Vec<String>,
    /// Comma-separated quantities (defaults depend on the subcommand)
    #[arg(long)]
    quantities: Option<String>,
    /// Base name of the output files
    #[arg(long)]
    name: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    Full,
    Reduced,
}

#[derive(Debug, Args)]
struct IntegrateArgs {
    #[arg(long, value_enum, default_value = "full")]
    model: Model,
    /// Time step (s)
    #[arg(long, default_value_t = 2e-10)]
    dt: f64,
    /// Duration (s)
    #[arg(long, default_value_t = 10e-6)]
    t_final: f64,
    /// Keep every n-th step
    #[arg(long, default_value_t = 10)]
    stride: usize,
    /// Initial mechanical amplitude
    #[arg(long, default_value_t = 1e-3)]
    b0: f64,
    /// Start the optics (or the coherence) at their steady state for b0
    #[arg(long)]
    steady_start: bool,
    /// Step-doubling adaptive RK4 instead of fixed steps
    #[arg(long)]
    adaptive: bool,
    /// Evolve δn with the quasi-static optics (reduced model only)
    #[arg(long)]
    full_closure: bool,
    /// Skip this long (s) before fitting the growth rate
    #[arg(long, default_value_t = 1e-6)]
    fit_skip: f64,
}

#[derive(Debug, Args)]
struct EpArgs {
    /// Phonon number of the sector (defaults to the self-consistent value)
    #[arg(long)]
    n_b: Option<f64>,
    /// Lower end of the γ_q bracket, with unit
    #[arg(long, default_value = "0.05 gamma")]
    lo: String,
    /// Upper end of the γ_q bracket, with unit
    #[arg(long, default_value = "100 gamma")]
    hi: String,
}

#[derive(Debug, Args)]
struct FixedPointArgs {
    #[arg(long, default_value_t = 0.0)]
    n0: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Relaxation η
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    /// Plain damped iteration with constant η
    #[arg(long)]
    no_adaptive: bool,
}

#[derive(Debug, Args)]
struct PresetArgs {
    name: String,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    NonConvergence(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::NonConvergence(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::NonConvergence(m) | Failure::Io(m) => m,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<OutputError> for Failure {
    fn from(e: OutputError) -> Self {
        match e {
            OutputError::EmptyQuantities => Failure::Config(e.to_string()),
            other => Failure::Io(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

/// Base parameters with the config file and then --set applied.
fn resolve_params(common: &Common, base: &SystemParams) -> Result<SystemParams, Failure> {
    let mut overlay = Overlay::default();
    if let Some(path) = &common.config {
        overlay = Overlay::from_file(path)?;
    }
    overlay = overlay.then(Overlay::from_assignments(&common.set)?);
    Ok(overlay.apply(base)?)
}

fn parse_mode(text: &str) -> Result<NbMode, Failure> {
    let text = text.trim();
    if text == "self-consistent" {
        return Ok(NbMode::SelfConsistent);
    }
    if let Some(v) = text.strip_prefix("fixed-nb:") {
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| config_err(format!("--mode fixed-nb:<value>: cannot parse {v:?}")))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(config_err(format!("--mode fixed-nb: value must be >= 0, got {v}")));
        }
        return Ok(NbMode::Fixed(v));
    }
    Err(config_err(format!(
        "--mode must be fixed-nb:<value> or self-consistent, got {text:?}"
    )))
}

fn parse_formats(text: &str) -> Result<Vec<Format>, Failure> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| Format::parse(s).ok_or_else(|| config_err(format!("unknown format {s:?} (csv, plot)"))))
        .collect()
}

fn parse_quantities(text: &str) -> Result<Vec<Observable>, Failure> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| Observable::parse(s).map_err(config_err))
        .collect()
}

fn echo_config(params: &SystemParams) {
    eprintln!("# resolved parameters");
    for line in to_config_string(params).lines() {
        eprintln!("#   {line}");
    }
    for w in params.warnings() {
        eprintln!("warning: {w}");
    }
}

fn finish_sweep(spec: &SweepSpec, common: &Common) -> Result<(), Failure> {
    let formats = parse_formats(&common.format)?;
    if spec.quantities.is_empty() {
        return Err(Failure::Config("the sweep has no quantities to write".into()));
    }
    let table: SweepTable = run_sweep(spec, common.jobs).map_err(config_err)?;
    let files = emit_outputs(&table, &common.out, &formats)?;
    for f in &files {
        println!("{}", f.display());
    }
    let failed = table.errors.iter().filter(|e| e.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} points carry an error annotation", table.rows.len());
    }
    if table.nonconverged > 0 {
        return Err(Failure::NonConvergence(format!(
            "{} points did not reach a self-consistent phonon number",
            table.nonconverged
        )));
    }
    Ok(())
}

fn sweep(common: &Common, args: &SweepArgs, kind: &str, defaults: &[Observable]) -> Result<(), Failure> {
    let params = resolve_params(common, &SystemParams::reference_device())?;
    echo_config(&params);
    let axes = args
        .axis
        .iter()
        .map(|a| axis::parse_axis(a, &params))
        .collect::<Result<Vec<_>, _>>()
        .map_err(config_err)?;
    let quantities = match &args.quantities {
        Some(q) => parse_quantities(q)?,
        None => defaults.to_vec(),
    };
    let mode = match &common.mode {
        Some(m) => parse_mode(m)?,
        None => NbMode::SelfConsistent,
    };
    let name = args.name.clone().unwrap_or_else(|| kind.to_string());
    let spec = SweepSpec::new(&name, params, axes, quantities, mode);
    finish_sweep(&spec, common)
}

fn run_preset(common: &Common, name: &str) -> Result<(), Failure> {
    let mut spec = preset(name).map_err(config_err)?;
    let before = spec.base;
    spec.base = resolve_params(common, &spec.base)?;
    if spec.base != before {
        spec.defaulted
            .push("parameters overridden by --config/--set; see resolved_config".to_string());
    }
    if let Some(m) = &common.mode {
        spec.mode = parse_mode(m)?;
        spec.defaulted.push(format!("mode overridden on the command line: {}", spec.mode));
    }
    echo_config(&spec.base);
    finish_sweep(&spec, common)
}

fn integrate(common: &Common, args: &IntegrateArgs) -> Result<(), Failure> {
    let params = resolve_params(common, &SystemParams::reference_device())?;
    echo_config(&params);
    let settings = IntegratorSettings {
        dt: args.dt,
        t_final: args.t_final,
        method: if args.adaptive { Method::Rk4Adaptive } else { Method::Rk4Fixed },
        stride: args.stride,
        closure: if args.full_closure {
            InversionClosure::FullClosure
        } else {
            InversionClosure::Fixed
        },
        ..Default::default()
    };
    let b0 = Complex64::new(args.b0, 0.0);
    std::fs::create_dir_all(&common.out).map_err(|e| io_err(&common.out, e))?;
    let (path, window, fit) = match args.model {
        Model::Full => {
            let init = if args.steady_start {
                MeanFieldState::with_steady_optics(&params, b0).map_err(config_err)?
            } else {
                MeanFieldState {
                    b: b0,
                    ..Default::default()
                }
            };
            let traj = integrate_full(&params, init, &settings).map_err(dyn_err)?;
            traj.warnings.iter().for_each(|w| eprintln!("warning: {w}"));
            let path = common.out.join("trajectory_full.csv");
            write_traj(&path, |f| traj.write_csv(f))?;
            let w = growth_window(&traj, args.fit_skip, 1e3);
            (path, w, growth_rate(&traj, w))
        }
        Model::Reduced => {
            let init = if args.steady_start {
                ReducedState::with_steady_coherence(&params, b0).map_err(config_err)?
            } else {
                let s = ReducedState::with_steady_coherence(&params, Complex64::new(0.0, 0.0))
                    .map_err(config_err)?;
                ReducedState {
                    p: Complex64::new(0.0, 0.0),
                    b: b0,
                    ..s
                }
            };
            let traj = integrate_reduced(&params, init, &settings).map_err(dyn_err)?;
            traj.warnings.iter().for_each(|w| eprintln!("warning: {w}"));
            let path = common.out.join("trajectory_reduced.csv");
            write_traj(&path, |f| traj.write_csv(f))?;
            let w = growth_window(&traj, args.fit_skip, 1e3);
            (path, w, growth_rate(&traj, w))
        }
    };
    println!("{}", path.display());
    match fit {
        Ok(fit) => println!(
            "growth rate of |b| over [{:e}, {:e}] s: {:e} ± {:e} 1/s ({} samples)",
            window.0, window.1, fit.rate, fit.stderr, fit.points
        ),
        Err(e) => eprintln!("no growth-rate fit: {e}"),
    }
    Ok(())
}

fn dyn_err(e: phonlase::dynamics::DynamicsError) -> Failure {
    use phonlase::dynamics::DynamicsError as D;
    match e {
        D::Diverged { .. } | D::StepUnderflow { .. } => Failure::NonConvergence(e.to_string()),
        other => Failure::Config(other.to_string()),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn write_traj(
    path: &Path,
    write: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>,
) -> Result<(), Failure> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write(&mut w).map_err(|e| io_err(path, e))?;
    std::io::Write::flush(&mut w).map_err(|e| io_err(path, e))
}

fn resolve_rate(text: &str, params: &SystemParams) -> Result<f64, Failure> {
    let q = Quantity::parse(text, UnitClass::Frequency).map_err(config_err)?;
    Ok(q.resolve(params.mechanical.mech_freq, params.optical.cavity_loss))
}

fn ep_locate(common: &Common, args: &EpArgs) -> Result<(), Failure> {
    let params = resolve_params(common, &SystemParams::reference_device())?;
    echo_config(&params);
    let n_b = match args.n_b {
        Some(n) => n,
        None => {
            let r = solve_nb_fixed_point(&params, 0.0, &FixedPointOptions::default()).map_err(config_err)?;
            if !r.converged {
                return Err(Failure::NonConvergence("self-consistent phonon number did not converge".into()));
            }
            r.n_b_star
        }
    };
    let eff = EffectiveParams::from_system(&params, n_b).map_err(config_err)?;
    let lo = resolve_rate(&args.lo, &params)?;
    let hi = resolve_rate(&args.hi, &params)?;
    println!("n_b = {n_b:e}");
    println!("gamma_m_eff = {:e} rad/s", eff.gamma_m_eff);
    println!("gamma_q_EP (closed form) = {:e} rad/s", eff.gamma_q_ep());
    println!(
        "gamma_q_min (turning point) = {:e} rad/s",
        turning_point(&eff).map_err(config_err)?
    );
    match locate_ep(&eff, (lo, hi)) {
        Ok(x) => {
            println!("gamma_q_EP (located) = {x:e} rad/s");
            Ok(())
        }
        Err(e) => Err(Failure::NonConvergence(e.to_string())),
    }
}

fn fixed_point(common: &Common, args: &FixedPointArgs) -> Result<(), Failure> {
    let params = resolve_params(common, &SystemParams::reference_device())?;
    echo_config(&params);
    let opts = FixedPointOptions {
        relaxation: args.eta,
        tol: args.tol,
        max_iter: args.max_iter,
        adaptive: !args.no_adaptive,
    };
    if !(args.eta > 0.0 && args.eta <= 1.0) {
        return Err(config_err(format!("--eta must lie in (0, 1], got {}", args.eta)));
    }
    let r = solve_nb_fixed_point(&params, args.n0, &opts).map_err(config_err)?;
    println!("n_b_star = {:e}", r.n_b_star);
    println!("iterations = {}", r.iterations);
    println!("residual = {:e}", r.residual);
    println!("converged = {}", r.converged);
    if r.converged {
        Ok(())
    } else {
        let tail: Vec<String> = r.history.iter().rev().take(5).map(|x| format!("{x:e}")).collect();
        Err(Failure::NonConvergence(format!(
            "no fixed point after {} iterations; last iterates {}",
            r.iterations,
            tail.join(", ")
        )))
    }
}

fn validate_config(common: &Common) -> Result<(), Failure> {
    let params = resolve_params(common, &SystemParams::reference_device())?;
    print!("{}", to_config_string(&params));
    for w in params.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let c = &cli.common;
    match &cli.command {
        Command::GainSweep(a) => sweep(
            c,
            a,
            "gain",
            &[Observable::G, Observable::G0, Observable::Gd, Observable::Nb],
        ),
        Command::ThresholdSweep(a) => sweep(
            c,
            a,
            "threshold",
            &[Observable::PTh, Observable::PTh0, Observable::PThd],
        ),
        Command::SpectrumSweep(a) => sweep(
            c,
            a,
            "spectrum",
            &[
                Observable::EPlus,
                Observable::EMinus,
                Observable::Gap,
                Observable::L,
                Observable::Phase,
                Observable::GammaQEp,
                Observable::GammaQMin,
            ],
        ),
        Command::Integrate(a) => integrate(c, a),
        Command::EpLocate(a) => ep_locate(c, a),
        Command::FixedPoint(a) => fixed_point(c, a),
        Command::Preset(a) => run_preset(c, &a.name),
        Command::ValidateConfig => validate_config(c),
    }
}
