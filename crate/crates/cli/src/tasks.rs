//! One function per task. Each returns its artifacts in memory; the caller
//! writes them in order, so the files are independent of the thread count.

use giantatom_ssh::analytic_bound::{bound_profile, fidelity, zero_mode_profile, AmplitudeProfile, ClosedFormContext};
use giantatom_ssh::dynamics::{lyapunov, v_grid, LyapunovCurve};
use giantatom_ssh::localization::{beta_profile, ipr, leg_window, localized_modes, weight_fraction};
use giantatom_ssh::model::{assemble, Emitter, HamiltonianMatrix, LegMode, Sublattice, Variant, C64};
use giantatom_ssh::spectral::{
    classify_states, eigendecompose, energy_residual_aa, energy_residual_ab, winding_number, Classification,
    SpectrumResult, StateClass,
};
use ndarray::{Array1, ArrayView1};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{set_path, RunConfig, Task};
use crate::error::CliError;
use crate::output::{num, Artifact, Csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    NoGapMode,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::NoGapMode => "no-gap-mode",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TaskOutput {
    pub artifacts: Vec<Artifact>,
    pub status: RunStatus,
    pub summary: Map<String, Value>,
}

impl TaskOutput {
    fn ok(artifacts: Vec<Artifact>, summary: Map<String, Value>) -> Self {
        TaskOutput {
            artifacts,
            status: RunStatus::Ok,
            summary,
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<TaskOutput, CliError> {
    match cfg.task {
        Task::Spectrum => spectrum(cfg),
        Task::Boundstates => boundstates(cfg),
        Task::Zeromode => zeromode(cfg),
        Task::IprHeatmap => ipr_heatmap(cfg),
        Task::BetaProfile => beta(cfg),
        Task::Winding => winding(cfg),
        Task::Lyapunov => lyapunov_task(cfg),
        Task::Sweep => sweep(cfg),
    }
}

pub(crate) fn hamiltonian(cfg: &RunConfig) -> Result<HamiltonianMatrix, CliError> {
    Ok(assemble(&cfg.lattice, &cfg.coupling, cfg.boundary, cfg.variant)?)
}

/// Diagonalized Hamiltonian. Classification needs the nonreciprocal band
/// structure and is skipped for the gain/loss chain.
pub(crate) struct Solved {
    pub h: HamiltonianMatrix,
    pub spec: SpectrumResult,
    pub classes: Option<Classification>,
}

impl Solved {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let h = hamiltonian(cfg)?;
        let spec = eigendecompose(&h, false)?;
        let classes = match cfg.variant {
            Variant::Nonreciprocal => Some(classify_states(&spec, &cfg.lattice, cfg.options.classify_margin)?),
            Variant::GainLoss => None,
        };
        Ok(Solved { h, spec, classes })
    }

    pub fn class_name(&self, q: usize) -> &'static str {
        match &self.classes {
            Some(c) => c.labels[q].class.as_str(),
            None => "unclassified",
        }
    }

    fn classes(&self) -> Result<&Classification, CliError> {
        self.classes
            .as_ref()
            .ok_or_else(|| CliError::Precondition("state classification needs the nonreciprocal chain".into()))
    }
}

fn counts(classes: &Option<Classification>) -> Value {
    match classes {
        None => Value::Null,
        Some(c) => {
            let mut m = Map::new();
            for k in [StateClass::Bulk, StateClass::UpperBound, StateClass::LowerBound, StateClass::GapMode] {
                m.insert(k.as_str().into(), c.count(k).into());
            }
            m.insert("ambiguous".into(), c.ambiguous().len().into());
            Value::Object(m)
        }
    }
}

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

pub(crate) fn spectrum_csv(sha: &str, s: &Solved, per_state_ipr: &[Option<f64>]) -> Csv {
    let mut csv = Csv::new(sha, &["index", "re", "im", "class", "ipr"]);
    for (q, e) in s.spec.eigenvalues.iter().enumerate() {
        let ipr = per_state_ipr[q].map(num).unwrap_or_default();
        csv.row(&[q.to_string(), num(e.re), num(e.im), s.class_name(q).to_string(), ipr]);
    }
    csv
}

fn spectrum(cfg: &RunConfig) -> Result<TaskOutput, CliError> {
    let sha = cfg.checksum();
    let s = Solved::new(cfg)?;
    let report = ipr(&s.spec, cfg.lattice.cells, cfg.options.ipr_include_atom)?;
    let csv = spectrum_csv(&sha, &s, &report.per_state);
    let mut summary = Map::new();
    summary.insert("dim".into(), s.spec.len().into());
    summary.insert("min_abs_energy".into(), s.spec.min_abs().into());
    summary.insert("max_eigen_residual".into(), s.spec.max_residual(&s.h.matrix).into());
    summary.insert("ipr_average".into(), report.average.into());
    summary.insert("ipr_excluded".into(), json!(report.excluded));
    summary.insert("classes".into(), counts(&s.classes));
    Ok(TaskOutput::ok(vec![csv.into_artifact("spectrum.csv")], summary))
}

/// `(N, Re ψ_N, Im ψ_N, |ψ_N|²)` with `N` one-based.
pub(crate) fn profile_csv(sha: &str, v: ArrayView1<C64>) -> Csv {
    let mut csv = Csv::new(sha, &["N", "re", "im", "abs2"]);
    for (i, z) in v.iter().enumerate() {
        csv.row(&[(i + 1).to_string(), num(z.re), num(z.im), num(z.norm_sqr())]);
    }
    csv
}

fn unit(v: ArrayView1<C64>) -> Array1<C64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv(|z| z / n)
}

/// Closed form and numerics side by side. The closed form is unit-normalized
/// and its sign chosen to match the numerical vector.
#[derive(Debug, Clone)]
pub(crate) struct Panel {
    pub q: usize,
    pub energy: C64,
    pub numeric: Array1<C64>,
    pub analytic: Option<Array1<C64>>,
    pub fidelity: Option<f64>,
    pub note: Option<String>,
}

impl Panel {
    fn new(q: usize, energy: C64, numeric: ArrayView1<C64>, closed: Result<AmplitudeProfile, CliError>) -> Self {
        let numeric = unit(numeric);
        match closed {
            Ok(p) => {
                let mut a = p.normalized().to_state_vector();
                if a.len() != numeric.len() {
                    return Panel {
                        q,
                        energy,
                        numeric,
                        analytic: None,
                        fidelity: None,
                        note: Some("closed form has a different site layout".into()),
                    };
                }
                let overlap: C64 = numeric.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
                if overlap.re < 0.0 {
                    a.mapv_inplace(|z| -z);
                }
                let f = fidelity(numeric.view(), a.view());
                Panel {
                    q,
                    energy,
                    numeric,
                    analytic: Some(a),
                    fidelity: Some(f),
                    note: None,
                }
            }
            Err(e) => Panel {
                q,
                energy,
                numeric,
                analytic: None,
                fidelity: None,
                note: Some(e.to_string()),
            },
        }
    }

    pub fn artifacts(&self, sha: &str, stem: &str) -> Vec<Artifact> {
        let mut out = vec![profile_csv(sha, self.numeric.view()).into_artifact(format!("{stem}_numeric.csv"))];
        if let Some(a) = &self.analytic {
            out.push(profile_csv(sha, a.view()).into_artifact(format!("{stem}_analytic.csv")));
        }
        out
    }

    pub fn summary(&self) -> Value {
        json!({
            "index": self.q,
            "energy": complex(self.energy),
            "fidelity": self.fidelity,
            "note": self.note,
        })
    }
}

fn closed_form_applies(cfg: &RunConfig) -> Result<f64, CliError> {
    let c = &cfg.coupling;
    if cfg.variant != Variant::Nonreciprocal || c.emitter != Emitter::GiantAtom || c.g_n != c.g_m {
        return Err(CliError::Precondition(
            "closed forms need a giant atom on the nonreciprocal chain with g_n = g_m".into(),
        ));
    }
    Ok(c.g_n)
}

fn closed_bound(cfg: &RunConfig, e: C64) -> Result<AmplitudeProfile, CliError> {
    let g = closed_form_applies(cfg)?;
    if e.im.abs() > 1e-9 * e.norm().max(1.0) {
        return Err(CliError::Precondition("complex energy; closed form is for real bound states".into()));
    }
    let ctx = ClosedFormContext::new(e.re, &cfg.lattice, g)?;
    Ok(bound_profile(&ctx, &cfg.lattice, &cfg.coupling)?)
}

fn closed_zero(cfg: &RunConfig) -> Result<AmplitudeProfile, CliError> {
    closed_form_applies(cfg)?;
    Ok(zero_mode_profile(&cfg.lattice, &cfg.coupling)?)
}

fn energy_residual(cfg: &RunConfig, e: C64) -> Option<f64> {
    if cfg.coupling.emitter != Emitter::GiantAtom {
        return None;
    }
    let r = match cfg.coupling.mode {
        LegMode::AB => energy_residual_ab(e, &cfg.lattice, &cfg.coupling),
        LegMode::AA => energy_residual_aa(e, &cfg.lattice, &cfg.coupling),
    };
    r.ok().map(|z| z.norm())
}

fn boundstates(cfg: &RunConfig) -> Result<TaskOutput, CliError> {
    let sha = cfg.checksum();
    let s = Solved::new(cfg)?;
    let classes = s.classes()?;
    let mut idx = classes.indices(StateClass::UpperBound);
    idx.extend(classes.indices(StateClass::LowerBound));
    idx.sort_unstable();
    let mut table = Csv::new(&sha, &["index", "re", "im", "class", "energy_residual", "fidelity"]);
    let mut artifacts = Vec::new();
    let mut states = Vec::new();
    for q in idx {
        let e = s.spec.eigenvalues[q];
        let panel = Panel::new(q, e, s.spec.right_vector(q), closed_bound(cfg, e));
        let residual = energy_residual(cfg, e);
        table.row(&[
            q.to_string(),
            num(e.re),
            num(e.im),
            s.class_name(q).to_string(),
            residual.map(num).unwrap_or_default(),
            panel.fidelity.map(num).unwrap_or_default(),
        ]);
        artifacts.extend(panel.artifacts(&sha, &format!("bound_q{q:03}")));
        let mut v = panel.summary();
        v["class"] = s.class_name(q).into();
        v["energy_residual"] = json!(residual);
        states.push(v);
    }
    artifacts.insert(0, table.into_artifact("boundstates.csv"));
    let mut summary = Map::new();
    summary.insert("classes".into(), counts(&s.classes));
    summary.insert("hull".into(), json!([classes.hull.min_abs, classes.hull.max_abs]));
    summary.insert("states".into(), Value::Array(states));
    Ok(TaskOutput::ok(artifacts, summary))
}

/// The real bound state above the bands with the largest energy.
pub(crate) fn upper_bound_panel(cfg: &RunConfig) -> Result<Panel, CliError> {
    let s = Solved::new(cfg)?;
    let classes = s.classes()?;
    let q = classes
        .indices(StateClass::UpperBound)
        .into_iter()
        .filter(|&q| s.spec.eigenvalues[q].im.abs() <= 1e-9)
        .max_by(|&a, &b| s.spec.eigenvalues[a].re.total_cmp(&s.spec.eigenvalues[b].re))
        .ok_or_else(|| CliError::Precondition("no real upper bound state".into()))?;
    let e = s.spec.eigenvalues[q];
    Ok(Panel::new(q, e, s.spec.right_vector(q), closed_bound(cfg, e)))
}

/// Zero-mode search result.
pub(crate) enum ZeroModes {
    None { min_abs: f64 },
    Single(Panel),
    /// Leg-localized basis of the gap subspace of two small atoms.
    Localized { modes: Vec<LocalizedPanel> },
}

#[derive(Debug, Clone)]
pub(crate) struct LocalizedPanel {
    pub leg: (Sublattice, usize),
    pub vector: Array1<C64>,
    pub energy: C64,
    pub weight: f64,
    pub weight_other_leg: f64,
    pub residual: f64,
}

/// Weight within `radius` cells of each leg, each window including the
/// atom level that sits on that leg.
fn leg_weights(h: &HamiltonianMatrix, v: ArrayView1<C64>, radius: usize) -> Vec<f64> {
    leg_windows(h, radius).iter().map(|w| weight_fraction(v, w)).collect()
}

fn leg_windows(h: &HamiltonianMatrix, radius: usize) -> Vec<Vec<usize>> {
    let levels = h.coupling.atom_levels();
    h.legs()
        .iter()
        .enumerate()
        .map(|(i, &(_, cell))| {
            let atoms: Vec<usize> = match levels {
                0 => vec![],
                1 => vec![0],
                _ => vec![i],
            };
            leg_window(&h.indexing, cell, radius, &atoms)
        })
        .collect()
}

pub(crate) fn find_zero_modes(cfg: &RunConfig) -> Result<(Solved, ZeroModes), CliError> {
    let s = Solved::new(cfg)?;
    let tol = cfg.options.zero_tolerance;
    let q0 = match s.spec.closest_to_zero() {
        Some(q) if s.spec.eigenvalues[q].norm() <= tol => q,
        _ => {
            let min_abs = s.spec.min_abs();
            return Ok((s, ZeroModes::None { min_abs }));
        }
    };
    if cfg.coupling.emitter == Emitter::TwoSmallAtoms {
        let states: Vec<usize> = (0..s.spec.len()).filter(|&q| s.spec.eigenvalues[q].norm() <= tol).collect();
        let windows = leg_windows(&s.h, cfg.options.leg_radius);
        let modes = localized_modes(&s.h, &s.spec, &states, &windows)?;
        let legs = s.h.legs();
        let modes = modes
            .into_iter()
            .enumerate()
            .map(|(i, m)| LocalizedPanel {
                leg: legs[i],
                weight: m.weight,
                weight_other_leg: weight_fraction(m.vector.view(), &windows[1 - i]),
                vector: m.vector,
                energy: m.energy,
                residual: m.residual,
            })
            .collect();
        return Ok((s, ZeroModes::Localized { modes }));
    }
    let e = s.spec.eigenvalues[q0];
    let panel = Panel::new(q0, e, s.spec.right_vector(q0), closed_zero(cfg));
    Ok((s, ZeroModes::Single(panel)))
}

fn leg_label(leg: (Sublattice, usize)) -> String {
    let sub = match leg.0 {
        Sublattice::A => "A",
        Sublattice::B => "B",
    };
    format!("{sub}{}", leg.1)
}

pub(crate) fn localized_summary(modes: &[LocalizedPanel]) -> Value {
    Value::Array(
        modes
            .iter()
            .map(|m| {
                json!({
                    "leg": leg_label(m.leg),
                    "energy": complex(m.energy),
                    "weight": m.weight,
                    "weight_other_leg": m.weight_other_leg,
                    "residual": m.residual,
                })
            })
            .collect(),
    )
}

fn zeromode(cfg: &RunConfig) -> Result<TaskOutput, CliError> {
    let sha = cfg.checksum();
    let (s, found) = find_zero_modes(cfg)?;
    let mut summary = Map::new();
    summary.insert("zero_tolerance".into(), cfg.options.zero_tolerance.into());
    match found {
        ZeroModes::None { min_abs } => {
            summary.insert("min_abs_energy".into(), min_abs.into());
            let empty = Csv::new(&sha, &["N", "re", "im", "abs2"]).into_artifact("zeromode_numeric.csv");
            Ok(TaskOutput {
                artifacts: vec![empty],
                status: RunStatus::NoGapMode,
                summary,
            })
        }
        ZeroModes::Single(panel) => {
            let w = leg_weights(&s.h, panel.numeric.view(), cfg.options.leg_radius);
            summary.insert("state".into(), panel.summary());
            summary.insert("leg_weights".into(), json!(w));
            Ok(TaskOutput::ok(panel.artifacts(&sha, "zeromode"), summary))
        }
        ZeroModes::Localized { modes } => {
            let arts = modes
                .iter()
                .map(|m| profile_csv(&sha, m.vector.view()).into_artifact(format!("zeromode_leg_{}.csv", leg_label(m.leg))))
                .collect();
            summary.insert("modes".into(), localized_summary(&modes));
            Ok(TaskOutput::ok(arts, summary))
        }
    }
}

/// `IPR̄` at each `(g_m, g_n)`, `g_m` outer.
pub(crate) fn heatmap_values(cfg: &RunConfig) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let grid = &cfg.options.g_grid;
    let points: Vec<(f64, f64)> = grid.iter().flat_map(|&gm| grid.iter().map(move |&gn| (gm, gn))).collect();
    points
        .par_iter()
        .map(|&(g_m, g_n)| {
            let coupling = cfg.coupling.with_strengths(g_n, g_m);
            let h = assemble(&cfg.lattice, &coupling, cfg.boundary, cfg.variant)?;
            let spec = eigendecompose(&h, false)?;
            let r = ipr(&spec, cfg.lattice.cells, cfg.options.ipr_include_atom)?;
            Ok((g_m, g_n, r.average))
        })
        .collect()
}

fn ipr_heatmap(cfg: &RunConfig) -> Result<TaskOutput, CliError> {
    let sha = cfg.checksum();
    let values = heatmap_values(cfg)?;
    let mut csv = Csv::new(&sha, &["g_m", "g_n", "ipr"]);
    for &(gm, gn, v) in &values {
        csv.row(&[num(gm), num(gn), num(v)]);
    }
    let mut summary = Map::new();
    let diag_max = values.iter().filter(|p| p.0 == p.1).map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
    let off_max = values.iter().filter(|p| p.0 != p.1).map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
    summary.insert("points".into(), values.len().into());
    summary.insert("diagonal_max".into(), json!(finite_or_null(diag_max)));
    summary.insert("off_diagonal_max".into(), json!(finite_or_null(off_max)));
    Ok(TaskOutput::ok(vec![csv.into_artifact("ipr_heatmap.csv")], summary))
}

fn finite_or_null(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub(crate) fn beta_csv(sha: &str, cfg: &RunConfig, class: StateClass) -> Result<(Csv, Value), CliError> {
    let s = Solved::new(cfg)?;
    let profile = beta_profile(&s.spec, &cfg.lattice, s.classes()?, class)?;
    let mut csv = Csv::new(sha, &["q", "re", "im", "beta1_abs", "beta2_abs"]);
    for r in &profile.rows {
        csv.row(&[r.q.to_string(), num(r.energy.re), num(r.energy.im), num(r.beta1_abs), num(r.beta2_abs)]);
    }
    let above = profile.rows.iter().filter(|r| r.beta1_abs > 1.0 + 1e-3).count();
    let below = profile.rows.iter().filter(|r| r.beta1_abs < 1.0 - 1e-3).count();
    let summary = json!({
        "states": profile.rows.len(),
        "reference": profile.reference,
        "beta1_above_one": above,
        "beta1_below_one": below,
    });
    Ok((csv, summary))
}

pub(crate) fn reference_csv(sha: &str, cfg: &RunConfig) -> Csv {
    let r = giantatom_ssh::localization::reference_lines(&cfg.lattice);
    let mut csv = Csv::new(sha, &["line", "value"]);
    for (name, v) in ["unit", "skin", "ratio"].iter().zip(r) {
        csv.row(&[name.to_string(), num(v)]);
    }
    csv
}

fn beta(cfg: &RunConfig) -> Result<TaskOutput, CliError> {
    let sha = cfg.checksum();
    let (csv, s) = beta_csv(&sha, cfg, cfg.options.beta_class)?;
    let mut summary = Map::new();
    summary.insert("beta".into(), s);
    Ok(TaskOutput::ok(
        vec![
            csv.into_artifact("beta_profile.csv"),
            reference_csv(&sha, cfg).into_artifact("beta_reference.csv"),
        ],
        summary,
    ))
}

fn winding(cfg: &RunConfig) -> Result<TaskOutput, CliError> {
    let sha = cfg.checksum();
    let w = winding_number(&cfg.lattice, cfg.options.winding_nk)?;
    let mut csv = Csv::new(&sha, &["t1", "t2", "gamma", "nk", "raw", "rounded"]);
    let p = &cfg.lattice;
    csv.row(&[
        num(p.t1),
        num(p.t2),
        num(p.gamma),
        cfg.options.winding_nk.to_string(),
        num(w.raw),
        num(w.rounded),
    ]);
    let mut summary = Map::new();
    summary.insert("raw".into(), w.raw.into());
    summary.insert("rounded".into(), w.rounded.into());
    Ok(TaskOutput::ok(vec![csv.into_artifact("winding.csv")], summary))
}

pub(crate) fn model_tag(cfg: &RunConfig) -> String {
    cfg.options.lyapunov.model_tag.clone().unwrap_or_else(|| {
        match cfg.variant {
            Variant::Nonreciprocal => "nonreciprocal",
            Variant::GainLoss => "gain-loss",
        }
        .into()
    })
}

pub(crate) fn lyapunov_curves(cfg: &RunConfig) -> Result<Vec<LyapunovCurve>, CliError> {
    let o = &cfg.options.lyapunov;
    let h = hamiltonian(cfg)?;
    let grid = v_grid(o.v_min, o.v_max, o.v_points);
    o.channels
        .par_iter()
        .map(|&ch| Ok(lyapunov(&h, &grid, o.evolution.t_final, ch, &o.evolution)?))
        .collect()
}

pub(crate) fn sublattice_name(s: Sublattice) -> &'static str {
    match s {
        Sublattice::A => "A",
        Sublattice::B => "B",
    }
}

pub(crate) fn push_curves(csv: &mut Csv, curves: &[LyapunovCurve], tag: &str) {
    for c in curves {
        for (v, l) in c.v_grid.iter().zip(&c.lambda) {
            csv.row(&[num(*v), num(*l), sublattice_name(c.channel).to_string(), tag.to_string()]);
        }
    }
}

pub(crate) fn curve_summary(curves: &[LyapunovCurve]) -> Value {
    Value::Array(
        curves
            .iter()
            .map(|c| {
                json!({
                    "channel": sublattice_name(c.channel),
                    "t_obs": c.t_obs,
                    "argmax_v": c.argmax(),
                    "max_lambda": c.lambda.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    "finite": c.is_finite(),
                    "floored_points": c.floored.iter().filter(|f| **f).count(),
                })
            })
            .collect(),
    )
}

pub(crate) const LYAPUNOV_HEADER: [&str; 4] = ["v", "lambda", "channel", "model_tag"];

fn lyapunov_task(cfg: &RunConfig) -> Result<TaskOutput, CliError> {
    let sha = cfg.checksum();
    let curves = lyapunov_curves(cfg)?;
    let mut csv = Csv::new(&sha, &LYAPUNOV_HEADER);
    push_curves(&mut csv, &curves, &model_tag(cfg));
    let mut summary = Map::new();
    summary.insert("curves".into(), curve_summary(&curves));
    Ok(TaskOutput::ok(vec![csv.into_artifact("lyapunov.csv")], summary))
}

/// The config with the sweep parameter set to `value`.
pub(crate) fn sweep_point(cfg: &RunConfig, value: f64) -> Result<RunConfig, CliError> {
    let mut v = cfg.to_value();
    set_path(&mut v, &cfg.options.sweep.parameter, Value::from(value))?;
    RunConfig::from_value(v)
}

pub(crate) fn sweep_spectra(cfg: &RunConfig) -> Result<Vec<(f64, Solved)>, CliError> {
    let points = cfg
        .options
        .sweep
        .values
        .iter()
        .map(|&x| Ok((x, sweep_point(cfg, x)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    points.par_iter().map(|(x, c)| Ok((*x, Solved::new(c)?))).collect()
}

fn sweep(cfg: &RunConfig) -> Result<TaskOutput, CliError> {
    let sha = cfg.checksum();
    let spectra = sweep_spectra(cfg)?;
    let name = cfg.options.sweep.parameter.as_str();
    let mut csv = Csv::new(&sha, &["value", "index", "re", "im", "abs", "class"]);
    let mut mins = Vec::new();
    for (x, s) in &spectra {
        for (q, e) in s.spec.eigenvalues.iter().enumerate() {
            csv.row(&[num(*x), q.to_string(), num(e.re), num(e.im), num(e.norm()), s.class_name(q).to_string()]);
        }
        mins.push(json!([x, s.spec.min_abs()]));
    }
    let mut summary = Map::new();
    summary.insert("parameter".into(), name.into());
    summary.insert("min_abs_energy".into(), Value::Array(mins));
    Ok(TaskOutput::ok(vec![csv.into_artifact("sweep.csv")], summary))
}
