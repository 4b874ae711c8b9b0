//! Parameter sweeps over one or two axes.
//!
//! Each grid point is evaluated independently, on a bounded worker pool, and
//! the rows come back in row-major order whatever the completion order.
//! Per-point failures land in the error column; a sweep never aborts once it
//! has started.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::params::{path_class, ParamError, SystemParams};
use crate::spectrum::{eigenvalues, track_branches, EffectiveParams, Phase};
use crate::steadystate::{gain, solve_nb_fixed_point, FixedPointOptions};

pub use crate::presets::{preset, PRESET_NAMES};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("a sweep needs 1 or 2 axes, got {0}")]
    AxisCount(usize),
    #[error("axis {path}: {reason}")]
    Axis { path: String, reason: String },
    #[error("unknown parameter path {0:?}")]
    UnknownPath(String),
    #[error("unknown quantity {0:?}")]
    UnknownQuantity(String),
    #[error("fixed phonon number must be finite and >= 0, got {0}")]
    BadFixedNb(f64),
    #[error("unknown preset {0:?}; known presets: {known}", known = PRESET_NAMES.join(", "))]
    UnknownPreset(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisValues {
    Range {
        start: f64,
        end: f64,
        points: usize,
        scale: Scale,
    },
    List(Vec<f64>),
}

/// One swept parameter; values are in rad/s or SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub path: String,
    pub values: AxisValues,
}

impl Axis {
    pub fn range(path: &str, start: f64, end: f64, points: usize, scale: Scale) -> Self {
        Axis {
            path: path.to_string(),
            values: AxisValues::Range {
                start,
                end,
                points,
                scale,
            },
        }
    }

    pub fn list(path: &str, values: Vec<f64>) -> Self {
        Axis {
            path: path.to_string(),
            values: AxisValues::List(values),
        }
    }

    pub fn is_log(&self) -> bool {
        matches!(self.values, AxisValues::Range { scale: Scale::Log, .. })
    }

    /// Grid coordinates; the end points are reproduced exactly.
    pub fn points(&self) -> Vec<f64> {
        match &self.values {
            AxisValues::List(v) => v.clone(),
            AxisValues::Range {
                start,
                end,
                points,
                scale,
            } => {
                let n = *points;
                if n == 1 {
                    return vec![*start];
                }
                (0..n)
                    .map(|k| {
                        if k == 0 {
                            return *start;
                        }
                        if k == n - 1 {
                            return *end;
                        }
                        let f = k as f64 / (n - 1) as f64;
                        match scale {
                            Scale::Linear => start + (end - start) * f,
                            Scale::Log => (start.ln() + (end.ln() - start.ln()) * f).exp(),
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn len(&self) -> usize {
        match &self.values {
            AxisValues::List(v) => v.len(),
            AxisValues::Range { points, .. } => *points,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self, base: &SystemParams) -> Result<(), SweepError> {
        let err = |reason: &str| SweepError::Axis {
            path: self.path.clone(),
            reason: reason.to_string(),
        };
        if path_class(&self.path).is_none() {
            return Err(SweepError::UnknownPath(self.path.clone()));
        }
        match &self.values {
            AxisValues::Range {
                start,
                end,
                points,
                scale,
            } => {
                if *points < 2 {
                    return Err(err("a range needs at least 2 points"));
                }
                if !(start.is_finite() && end.is_finite()) {
                    return Err(err("range ends must be finite"));
                }
                if *scale == Scale::Log && !(*start > 0.0 && *end > 0.0) {
                    return Err(err("a log range needs positive ends"));
                }
            }
            AxisValues::List(v) => {
                if v.is_empty() {
                    return Err(err("empty value list"));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(err("list values must be finite"));
                }
            }
        }
        let pts = self.points();
        for v in [pts[0], pts[pts.len() - 1]] {
            base.with(&self.path, v).map_err(|e| err(&e.to_string()))?;
        }
        Ok(())
    }
}

/// How each point picks its phonon number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NbMode {
    Fixed(f64),
    SelfConsistent,
}

impl fmt::Display for NbMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NbMode::Fixed(v) => write!(f, "fixed-nb:{v}"),
            NbMode::SelfConsistent => f.write_str("self-consistent"),
        }
    }
}

/// A tabulated output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    G,
    G0,
    Gd,
    OmegaPrime,
    DeltaN,
    PTh,
    PTh0,
    PThd,
    /// Stimulated phonon number exp[2(G − γ_m)/γ_m].
    Nb,
    /// Self-consistent phonon number.
    NbStar,
    EPlus,
    EMinus,
    Gap,
    L,
    Phase,
    GammaQEp,
    GammaQMin,
}

impl Observable {
    pub const ALL: [Observable; 17] = [
        Observable::G,
        Observable::G0,
        Observable::Gd,
        Observable::OmegaPrime,
        Observable::DeltaN,
        Observable::PTh,
        Observable::PTh0,
        Observable::PThd,
        Observable::Nb,
        Observable::NbStar,
        Observable::EPlus,
        Observable::EMinus,
        Observable::Gap,
        Observable::L,
        Observable::Phase,
        Observable::GammaQEp,
        Observable::GammaQMin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::G => "G",
            Observable::G0 => "G0",
            Observable::Gd => "Gd",
            Observable::OmegaPrime => "omega_prime",
            Observable::DeltaN => "delta_n",
            Observable::PTh => "P_th",
            Observable::PTh0 => "P_th0",
            Observable::PThd => "P_thd",
            Observable::Nb => "N_b",
            Observable::NbStar => "n_b_star",
            Observable::EPlus => "E_plus",
            Observable::EMinus => "E_minus",
            Observable::Gap => "gap",
            Observable::L => "L",
            Observable::Phase => "phase",
            Observable::GammaQEp => "gamma_q_EP",
            Observable::GammaQMin => "gamma_q_min",
        }
    }

    pub fn parse(name: &str) -> Result<Observable, SweepError> {
        let key = name.trim();
        Observable::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(key))
            .or(match key {
                "Pth" | "P_th_total" => Some(Observable::PTh),
                "n_b*" | "nb_star" => Some(Observable::NbStar),
                "E+" | "E_pm" | "E±" => Some(Observable::EPlus),
                "E-" => Some(Observable::EMinus),
                _ => None,
            })
            .ok_or_else(|| SweepError::UnknownQuantity(name.to_string()))
    }

    /// Table columns this observable fills.
    pub fn columns(self) -> Vec<String> {
        match self {
            Observable::EPlus | Observable::EMinus => {
                vec![format!("re_{}", self.name()), format!("im_{}", self.name())]
            }
            _ => vec![self.name().to_string()],
        }
    }

    fn needs_spectrum(self) -> bool {
        matches!(
            self,
            Observable::EPlus | Observable::EMinus | Observable::Gap | Observable::L | Observable::Phase
        )
    }
}

/// A parameter value quoted by a figure, kept verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatedParam {
    pub path: String,
    pub value: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    pub base: SystemParams,
    pub axes: Vec<Axis>,
    pub quantities: Vec<Observable>,
    pub mode: NbMode,
    pub fixed_point: FixedPointOptions,
    /// Parameters fixed by the figure being reproduced.
    pub stated: Vec<StatedParam>,
    /// Choices not fixed by the figure, one note each.
    pub defaulted: Vec<String>,
}

impl SweepSpec {
    pub fn new(name: &str, base: SystemParams, axes: Vec<Axis>, quantities: Vec<Observable>, mode: NbMode) -> Self {
        SweepSpec {
            name: name.to_string(),
            base,
            axes,
            quantities,
            mode,
            fixed_point: FixedPointOptions::default(),
            stated: Vec::new(),
            defaulted: Vec::new(),
        }
    }

    /// Check the spec before any point is computed. An empty quantity list
    /// is accepted here and refused by the output writer.
    pub fn validate(&self) -> Result<(), SweepError> {
        self.base.validate()?;
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(SweepError::AxisCount(self.axes.len()));
        }
        for axis in &self.axes {
            axis.validate(&self.base)?;
        }
        if let NbMode::Fixed(v) = self.mode {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SweepError::BadFixedNb(v));
            }
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    /// Column names: axes, the phonon number used, then the quantities.
    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self.axes.iter().map(|a| a.path.clone()).collect();
        cols.push("n_b".to_string());
        for q in &self.quantities {
            cols.extend(q.columns());
        }
        cols
    }

    fn grid(&self) -> Vec<Vec<f64>> {
        let pts: Vec<Vec<f64>> = self.axes.iter().map(Axis::points).collect();
        match pts.as_slice() {
            [a] => a.iter().map(|x| vec![*x]).collect(),
            [a, b] => a
                .iter()
                .flat_map(|x| b.iter().map(move |y| vec![*x, *y]))
                .collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub timestamp: String,
    pub spec: SweepSpec,
    /// The base parameters in configuration-file syntax.
    pub resolved_config: String,
    pub defaulted: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Per-row failure, if any.
    pub errors: Vec<Option<String>>,
    /// Rows whose fixed point did not converge.
    pub nonconverged: usize,
    pub provenance: Provenance,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// CSV text: header, one row per grid point, trailing error column.
    pub fn to_csv(&self) -> String {
        use crate::output::fmt_float;
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push_str(",error\n");
        for (row, err) in self.rows.iter().zip(&self.errors) {
            let cells: Vec<String> = row.iter().map(|v| fmt_float(*v)).collect();
            out.push_str(&cells.join(","));
            out.push(',');
            if let Some(e) = err {
                out.push('"');
                out.push_str(&e.replace('"', "\"\""));
                out.push('"');
            }
            out.push('\n');
        }
        out
    }
}

fn phase_code(p: Phase) -> f64 {
    match p {
        Phase::BelowEp => -1.0,
        Phase::AtEp => 0.0,
        Phase::AboveEp => 1.0,
    }
}

struct PointResult {
    row: Vec<f64>,
    error: Option<String>,
    nonconverged: bool,
}

fn evaluate(spec: &SweepSpec, coords: &[f64]) -> PointResult {
    let width = spec.columns().len();
    let mut row = vec![f64::NAN; width];
    row[..coords.len()].copy_from_slice(coords);
    let fail = |row: Vec<f64>, msg: String, nonconverged: bool| PointResult {
        row,
        error: Some(msg),
        nonconverged,
    };

    let mut params = spec.base;
    for (axis, v) in spec.axes.iter().zip(coords) {
        if let Err(e) = params.set(&axis.path, *v) {
            return fail(row, e.to_string(), false);
        }
    }

    let needs_star = spec.mode == NbMode::SelfConsistent || spec.quantities.contains(&Observable::NbStar);
    let star = if needs_star {
        match solve_nb_fixed_point(&params, 0.0, &spec.fixed_point) {
            Ok(r) => Some(r),
            Err(e) => return fail(row, e.to_string(), false),
        }
    } else {
        None
    };
    let n_b = match (spec.mode, &star) {
        (NbMode::Fixed(v), _) => v,
        (NbMode::SelfConsistent, Some(r)) => {
            if !r.converged {
                return fail(
                    row,
                    format!(
                        "fixed point did not converge after {} iterations (residual {:e})",
                        r.iterations, r.residual
                    ),
                    true,
                );
            }
            r.n_b_star
        }
        (NbMode::SelfConsistent, None) => unreachable!("solved above"),
    };
    let nb_col = coords.len();
    row[nb_col] = n_b;

    let g = match gain(&params, n_b) {
        Ok(g) => g,
        Err(e) => return fail(row, e.to_string(), false),
    };
    let spectrum = spec
        .quantities
        .iter()
        .any(|q| q.needs_spectrum())
        .then(|| EffectiveParams::from_system(&params, n_b).and_then(|eff| eigenvalues(&eff)));
    let spectrum_ok = spectrum.as_ref().and_then(|r| r.as_ref().ok());
    let n_star = star.as_ref().map(|s| s.n_b_star);
    row_fill(&mut row, spec, nb_col + 1, &g, spectrum_ok, &params, n_star);

    let star_failed = matches!(&star, Some(r) if !r.converged);
    let error = match spectrum {
        Some(Err(e)) => Some(format!("spectrum undefined: {e}")),
        _ if star_failed => Some("fixed point did not converge".to_string()),
        _ => None,
    };
    PointResult {
        row,
        error,
        nonconverged: star_failed,
    }
}

fn row_fill(
    row: &mut [f64],
    spec: &SweepSpec,
    mut idx: usize,
    g: &crate::steadystate::GainResult,
    s: Option<&crate::spectrum::SpectrumResult>,
    params: &SystemParams,
    n_star: Option<f64>,
) {
    let eff = EffectiveParams::from_system(params, g.n_b).ok();
    for q in &spec.quantities {
        let vals: Vec<f64> = match q {
            Observable::G => vec![g.g],
            Observable::G0 => vec![g.g0],
            Observable::Gd => vec![g.gd],
            Observable::OmegaPrime => vec![g.omega_prime],
            Observable::DeltaN => vec![g.delta_n],
            Observable::PTh => vec![g.p_th],
            Observable::PTh0 => vec![g.p_th0],
            Observable::PThd => vec![g.p_thd],
            Observable::Nb => vec![g.stimulated_n_b],
            Observable::NbStar => vec![n_star.unwrap_or(f64::NAN)],
            Observable::EPlus => s.map_or(vec![f64::NAN; 2], |s| vec![s.e_plus.re, s.e_plus.im]),
            Observable::EMinus => s.map_or(vec![f64::NAN; 2], |s| vec![s.e_minus.re, s.e_minus.im]),
            Observable::Gap => vec![s.map_or(f64::NAN, |s| s.gap)],
            Observable::L => vec![s.map_or(f64::NAN, |s| s.localization())],
            Observable::Phase => vec![s.map_or(f64::NAN, |s| phase_code(s.phase))],
            Observable::GammaQEp => vec![eff.map_or(f64::NAN, |e| e.gamma_q_ep())],
            Observable::GammaQMin => vec![eff.map_or(f64::NAN, |e| e.gamma_q_min())],
        };
        for v in vals {
            row[idx] = v;
            idx += 1;
        }
    }
}

/// Keep E± continuous along the innermost axis.
fn track_rows(spec: &SweepSpec, columns: &[String], rows: &mut [Vec<f64>]) {
    let find = |n: &str| columns.iter().position(|c| c == n);
    let (Some(rp), Some(ip), Some(rm), Some(im)) = (
        find("re_E_plus"),
        find("im_E_plus"),
        find("re_E_minus"),
        find("im_E_minus"),
    ) else {
        return;
    };
    let inner = spec.axes.last().map_or(1, Axis::len).max(1);
    for block in rows.chunks_mut(inner) {
        let pairs: Vec<(Complex64, Complex64)> = block
            .iter()
            .map(|r| (Complex64::new(r[rp], r[ip]), Complex64::new(r[rm], r[im])))
            .collect();
        // NaN rows would poison the distance comparison
        if pairs.iter().any(|(a, b)| !(a.norm().is_finite() && b.norm().is_finite())) {
            continue;
        }
        for (r, (p, m)) in block.iter_mut().zip(track_branches(&pairs)) {
            r[rp] = p.re;
            r[ip] = p.im;
            r[rm] = m.re;
            r[im] = m.im;
        }
    }
}

/// Evaluate every grid point with at most `jobs` workers (0 = all cores).
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepTable, SweepError> {
    spec.validate()?;
    let grid = spec.grid();
    let results: Vec<PointResult> = if jobs == 1 {
        grid.iter().map(|c| evaluate(spec, c)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| SweepError::Pool(e.to_string()))?;
        pool.install(|| grid.par_iter().map(|c| evaluate(spec, c)).collect())
    };

    let columns = spec.columns();
    let nonconverged = results.iter().filter(|r| r.nonconverged).count();
    let (mut rows, errors): (Vec<_>, Vec<_>) = results.into_iter().map(|r| (r.row, r.error)).unzip();
    track_rows(spec, &columns, &mut rows);

    Ok(SweepTable {
        columns,
        rows,
        errors,
        nonconverged,
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            spec: spec.clone(),
            resolved_config: crate::config::to_config_string(&spec.base),
            defaulted: spec.defaulted.clone(),
            warnings: spec.base.warnings(),
        },
    })
}
