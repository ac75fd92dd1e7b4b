//! Preset runs that regenerate the data behind each published panel.

use std::fmt;
use std::str::FromStr;

use giantatom_ssh::model::{CouplingConfig, Variant};
use giantatom_ssh::spectral::StateClass;
use serde_json::{json, Map, Value};

use crate::config::{RunConfig, Task};
use crate::error::CliError;
use crate::output::{num, Artifact, Csv};
use crate::tasks::{
    beta_csv, curve_summary, find_zero_modes, heatmap_values, localized_summary, lyapunov_curves, model_tag,
    profile_csv, push_curves, reference_csv, sweep_spectra, upper_bound_panel, RunStatus, TaskOutput, ZeroModes,
    LYAPUNOV_HEADER,
};

use giantatom_ssh::model::LegMode::{AA, AB};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl Figure {
    pub const ALL: [Figure; 7] = [
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig6,
        Figure::Fig7,
        Figure::Fig8,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Figure {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Figure::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| CliError::Config(format!("unknown figure `{s}`; expected one of fig2..fig8")))
    }
}

/// Output of a figure: artifacts plus every config that produced them.
pub struct FigureOutput {
    pub output: TaskOutput,
    pub configs: Vec<RunConfig>,
}

fn base(task: Task, cells: usize, t1: f64, coupling: CouplingConfig) -> RunConfig {
    let mut c = RunConfig::new(task);
    c.lattice.cells = cells;
    c.lattice.t1 = t1;
    c.coupling = coupling;
    c
}

/// Ring of 50 cells, legs at cells 20 and 40.
fn profile_config(task: Task, coupling: CouplingConfig, t1: f64) -> RunConfig {
    base(task, 50, t1, coupling)
}

/// Ring of 20 cells, both legs in cell 10.
fn localization_config(task: Task, coupling: CouplingConfig) -> RunConfig {
    base(task, 20, 0.2, coupling)
}

/// Zero-mode and bound-state configs for each `t1`, in panel order.
fn profile_pairs(mode: giantatom_ssh::model::LegMode, t1s: [f64; 2]) -> Vec<RunConfig> {
    t1s.into_iter()
        .flat_map(|t1| {
            let giant = CouplingConfig::giant(mode, 20, 40, 1.0);
            [
                profile_config(Task::Zeromode, giant, t1),
                profile_config(Task::Boundstates, giant, t1),
            ]
        })
        .collect()
}

pub fn presets(fig: Figure) -> Vec<RunConfig> {
    match fig {
        Figure::Fig2 => [AB, AA]
            .into_iter()
            .map(|mode| {
                let mut c = base(Task::Sweep, 50, 0.2, CouplingConfig::giant(mode, 25, 26, 1.0));
                c.options.sweep.parameter = "lattice.t1".into();
                c.options.sweep.values = (0..=160).map(|j| -2.0 + 0.025 * j as f64).collect();
                c
            })
            .collect(),
        Figure::Fig3 => profile_pairs(AB, [0.2, -0.2]),
        Figure::Fig4 => profile_pairs(AA, [0.2, 1.6]),
        Figure::Fig5 => [AB, AA]
            .into_iter()
            .map(|mode| profile_config(Task::Zeromode, CouplingConfig::two_small(mode, 20, 40, 1.0), 0.2))
            .collect(),
        Figure::Fig6 => {
            let mut out = vec![localization_config(Task::IprHeatmap, CouplingConfig::giant(AB, 10, 10, 1.0))];
            for (g_m, g_n) in [(0.0, 0.0), (1.0, 1.0), (13.0, 13.0), (13.0, 1.0)] {
                let giant = CouplingConfig::giant(AB, 10, 10, 1.0).with_strengths(g_n, g_m);
                out.push(localization_config(Task::BetaProfile, giant));
            }
            out
        }
        Figure::Fig7 => {
            let mut out = Vec::new();
            for coupling in [CouplingConfig::giant(AB, 10, 10, 1.0), CouplingConfig::two_small(AB, 10, 10, 1.0)] {
                let mut c = localization_config(Task::Sweep, coupling);
                c.options.sweep.parameter = "coupling.g".into();
                c.options.sweep.values = (1..=52).map(|j| 0.25 * j as f64).collect();
                out.push(c);
            }
            out.push(localization_config(Task::BetaProfile, CouplingConfig::two_small(AB, 10, 10, 7.0)));
            out
        }
        Figure::Fig8 => {
            let mut m1 = base(Task::Lyapunov, 401, 0.6, CouplingConfig::giant(AB, 1, 1, 1.0));
            m1.lattice.gamma = 1.0;
            m1.options.lyapunov.model_tag = Some("model-1".into());
            let mut m2 = base(Task::Lyapunov, 401, 0.6, CouplingConfig::giant(AB, 1, 1, 1.0));
            m2.variant = Variant::GainLoss;
            m2.lattice.gamma = 0.0;
            m2.lattice.delta = 1.0;
            m2.options.lyapunov.model_tag = Some("model-2".into());
            vec![m1, m2]
        }
    }
}

pub fn build(fig: Figure) -> Result<FigureOutput, CliError> {
    let configs = presets(fig);
    let output = match fig {
        Figure::Fig2 => fig2(&configs)?,
        Figure::Fig3 | Figure::Fig4 => profiles(fig, &configs)?,
        Figure::Fig5 => fig5(&configs)?,
        Figure::Fig6 => fig6(&configs)?,
        Figure::Fig7 => fig7(&configs)?,
        Figure::Fig8 => fig8(&configs)?,
    };
    Ok(FigureOutput { output, configs })
}

fn done(artifacts: Vec<Artifact>, summary: Map<String, Value>) -> TaskOutput {
    TaskOutput {
        artifacts,
        status: RunStatus::Ok,
        summary,
    }
}

fn mode_name(c: &RunConfig) -> &'static str {
    match c.coupling.mode {
        AB => "ab",
        AA => "aa",
    }
}

/// Real part, imaginary part and modulus of the spectrum against `t1`.
fn fig2(configs: &[RunConfig]) -> Result<TaskOutput, CliError> {
    let mut artifacts = Vec::new();
    let mut summary = Map::new();
    for c in configs {
        let sha = c.checksum();
        let spectra = sweep_spectra(c)?;
        let parts: [(&str, fn(giantatom_ssh::C64) -> f64); 3] = [("re", |z| z.re), ("im", |z| z.im), ("abs", |z| z.norm())];
        for (part, f) in parts {
            let mut csv = Csv::new(&sha, &["t1", "index", part, "class"]);
            for (t1, s) in &spectra {
                for (q, e) in s.spec.eigenvalues.iter().enumerate() {
                    csv.row(&[num(*t1), q.to_string(), num(f(*e)), s.class_name(q).to_string()]);
                }
            }
            artifacts.push(csv.into_artifact(format!("fig2_{}_{part}.csv", mode_name(c))));
        }
        let mins: Vec<Value> = spectra.iter().map(|(t1, s)| json!([t1, s.spec.min_abs()])).collect();
        summary.insert(format!("{}_min_abs_energy", mode_name(c)), Value::Array(mins));
    }
    Ok(done(artifacts, summary))
}

/// Zero mode and upper bound state with closed forms, two parameter sets.
fn profiles(fig: Figure, configs: &[RunConfig]) -> Result<TaskOutput, CliError> {
    let mut artifacts = Vec::new();
    let mut summary = Map::new();
    let letters = [["a", "b"], ["c", "d"]];
    for (pair, [zero_l, upper_l]) in configs.chunks(2).zip(letters) {
        let (zc, bc) = (&pair[0], &pair[1]);
        let zero = match find_zero_modes(zc)? {
            (_, ZeroModes::Single(p)) => p,
            _ => {
                return Err(CliError::Precondition(format!(
                    "{fig}: no zero mode at t1 = {}",
                    zc.lattice.t1
                )))
            }
        };
        let upper = upper_bound_panel(bc)?;
        artifacts.extend(zero.artifacts(&zc.checksum(), &format!("{fig}{zero_l}_zero")));
        artifacts.extend(upper.artifacts(&bc.checksum(), &format!("{fig}{upper_l}_upper")));
        summary.insert(
            format!("{fig}{zero_l}"),
            json!({"t1": zc.lattice.t1, "state": "zero-mode", "panel": zero.summary()}),
        );
        summary.insert(
            format!("{fig}{upper_l}"),
            json!({"t1": bc.lattice.t1, "state": "upper-bound", "panel": upper.summary()}),
        );
    }
    Ok(done(artifacts, summary))
}

fn fig5(configs: &[RunConfig]) -> Result<TaskOutput, CliError> {
    let mut artifacts = Vec::new();
    let mut summary = Map::new();
    let letters = [["a", "b"], ["c", "d"]];
    for (c, panel_letters) in configs.iter().zip(letters) {
        let sha = c.checksum();
        let modes = match find_zero_modes(c)? {
            (_, ZeroModes::Localized { modes }) => modes,
            _ => return Err(CliError::Precondition("fig5: gap modes of two small atoms not found".into())),
        };
        for (m, l) in modes.iter().zip(panel_letters) {
            artifacts.push(profile_csv(&sha, m.vector.view()).into_artifact(format!("fig5{l}.csv")));
        }
        summary.insert(mode_name(c).into(), localized_summary(&modes));
    }
    Ok(done(artifacts, summary))
}

fn fig6(configs: &[RunConfig]) -> Result<TaskOutput, CliError> {
    let heat = &configs[0];
    let sha = heat.checksum();
    let mut csv = Csv::new(&sha, &["g_m", "g_n", "ipr"]);
    for (gm, gn, v) in heatmap_values(heat)? {
        csv.row(&[num(gm), num(gn), num(v)]);
    }
    let mut artifacts = vec![csv.into_artifact("fig6a.csv")];
    let mut summary = Map::new();
    for (c, l) in configs[1..].iter().zip(["b", "c", "d", "e"]) {
        let (csv, s) = beta_csv(&c.checksum(), c, StateClass::Bulk)?;
        artifacts.push(csv.into_artifact(format!("fig6{l}.csv")));
        summary.insert(
            format!("fig6{l}"),
            json!({"g_m": c.coupling.g_m, "g_n": c.coupling.g_n, "beta": s}),
        );
    }
    artifacts.push(reference_csv(&sha, heat).into_artifact("fig6_reference.csv"));
    Ok(done(artifacts, summary))
}

fn fig7(configs: &[RunConfig]) -> Result<TaskOutput, CliError> {
    let mut artifacts = Vec::new();
    let mut summary = Map::new();
    for c in &configs[..2] {
        let sha = c.checksum();
        let emitter = serde_json::to_value(c.coupling.emitter).expect("emitter serializes");
        let emitter = emitter.as_str().unwrap_or_default().to_string();
        let mut csv = Csv::new(&sha, &["g", "emitter", "ipr"]);
        let mut peak = (f64::NAN, f64::NEG_INFINITY);
        let spectra = sweep_spectra(c)?;
        for (g, s) in &spectra {
            let r = giantatom_ssh::localization::ipr(&s.spec, c.lattice.cells, c.options.ipr_include_atom)?;
            csv.row(&[num(*g), emitter.clone(), num(r.average)]);
            if r.average > peak.1 {
                peak = (*g, r.average);
            }
        }
        artifacts.push(csv.into_artifact(format!("fig7a_{emitter}.csv")));
        summary.insert(emitter, json!({"peak_g": peak.0, "peak_ipr": peak.1}));
    }
    let b = &configs[2];
    let (csv, s) = beta_csv(&b.checksum(), b, StateClass::Bulk)?;
    artifacts.push(csv.into_artifact("fig7b.csv"));
    summary.insert("fig7b".into(), s);
    Ok(done(artifacts, summary))
}

fn fig8(configs: &[RunConfig]) -> Result<TaskOutput, CliError> {
    let mut summary = Map::new();
    let mut artifacts = Vec::new();
    for c in configs {
        let curves = lyapunov_curves(c)?;
        let tag = model_tag(c);
        let mut csv = Csv::new(&c.checksum(), &LYAPUNOV_HEADER);
        push_curves(&mut csv, &curves, &tag);
        artifacts.push(csv.into_artifact(format!("fig8_{tag}.csv")));
        summary.insert(tag, curve_summary(&curves));
    }
    Ok(done(artifacts, summary))
}
