//! On-disk run configuration.
//!
//! A run is described by one JSON document. Unknown keys are rejected at
//! every level so that a typo never silently falls back to a default.

use std::fmt;
use std::path::Path;

use giantatom_ssh::dynamics::EvolutionConfig;
use giantatom_ssh::model::{Boundary, CouplingConfig, Emitter, LatticeParams, LegMode, Sublattice, Variant};
use giantatom_ssh::spectral::StateClass;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Spectrum,
    Boundstates,
    Zeromode,
    IprHeatmap,
    BetaProfile,
    Winding,
    Lyapunov,
    Sweep,
}

impl Task {
    pub const ALL: [Task; 8] = [
        Task::Spectrum,
        Task::Boundstates,
        Task::Zeromode,
        Task::IprHeatmap,
        Task::BetaProfile,
        Task::Winding,
        Task::Lyapunov,
        Task::Sweep,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Boundstates => "boundstates",
            Task::Zeromode => "zeromode",
            Task::IprHeatmap => "ipr-heatmap",
            Task::BetaProfile => "beta-profile",
            Task::Winding => "winding",
            Task::Lyapunov => "lyapunov",
            Task::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovOptions {
    pub v_min: f64,
    pub v_max: f64,
    pub v_points: usize,
    pub channels: Vec<Sublattice>,
    /// Label written to the `model_tag` column; defaults to the variant name.
    pub model_tag: Option<String>,
    /// `t_final` is the observation time.
    pub evolution: EvolutionConfig,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        LyapunovOptions {
            v_min: -2.0,
            v_max: 2.0,
            v_points: 81,
            channels: vec![Sublattice::A, Sublattice::B],
            model_tag: None,
            evolution: EvolutionConfig::default(),
        }
    }
}

/// One-parameter spectrum sweep. `parameter` is a dotted path into the
/// config, e.g. `lattice.t1` or `coupling.g_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOptions {
    pub parameter: String,
    pub values: Vec<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            parameter: "lattice.t1".into(),
            values: (0..=20).map(|j| -1.0 + 0.1 * j as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskOptions {
    /// Band-edge margin for state classification; `None` uses the library default.
    pub classify_margin: Option<f64>,
    /// Include atom amplitudes in the IPR sums.
    pub ipr_include_atom: bool,
    /// Largest `|E|` accepted as a zero mode.
    pub zero_tolerance: f64,
    /// Cells on each side of a leg counted as "near" it (two-small-atom zero modes).
    pub leg_radius: usize,
    /// Coupling strengths for both axes of the IPR heatmap.
    pub g_grid: Vec<f64>,
    pub beta_class: StateClass,
    pub winding_nk: usize,
    pub lyapunov: LyapunovOptions,
    pub sweep: SweepOptions,
}

impl Default for TaskOptions {
    fn default() -> Self {
        TaskOptions {
            classify_margin: None,
            ipr_include_atom: false,
            zero_tolerance: 1e-2,
            leg_radius: 5,
            g_grid: (0..=13).map(f64::from).collect(),
            beta_class: StateClass::Bulk,
            winding_nk: 2048,
            lyapunov: LyapunovOptions::default(),
            sweep: SweepOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub task: Task,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    pub lattice: LatticeParams,
    pub coupling: CouplingConfig,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
    #[serde(default)]
    pub options: TaskOptions,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    /// Seed for randomized checks; deterministic tasks ignore it.
    #[serde(default)]
    pub seed: u64,
}

fn default_variant() -> Variant {
    Variant::Nonreciprocal
}

fn default_boundary() -> Boundary {
    Boundary::Periodic
}

fn default_out_dir() -> String {
    "out".into()
}

impl RunConfig {
    /// Ring of 50 cells with a giant atom on `A_25` and `B_26`.
    pub fn new(task: Task) -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            task,
            variant: Variant::Nonreciprocal,
            lattice: LatticeParams {
                cells: 50,
                t1: 0.2,
                t2: 1.0,
                gamma: 0.5,
                delta: 0.0,
            },
            coupling: CouplingConfig::giant(LegMode::AB, 25, 26, 1.0),
            boundary: Boundary::Periodic,
            options: TaskOptions::default(),
            out_dir: default_out_dir(),
            seed: 0,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed JSON: {e}")))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("field `{path}`: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON serialization. Field order is fixed by
    /// the struct layout, so equal configs hash equally.
    pub fn checksum(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Applies `key=value` overrides. The value is parsed as JSON and taken
    /// as a bare string if that fails, so `--set variant=gain-loss` works.
    pub fn with_overrides(&self, sets: &[String]) -> Result<Self, CliError> {
        if sets.is_empty() {
            return Ok(self.clone());
        }
        let mut v = self.to_value();
        for s in sets {
            let (key, raw) = s
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override `{s}` is not of the form key=value")))?;
            let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set_path(&mut v, key.trim(), parsed)?;
        }
        Self::from_value(v)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "field `schema_version`: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        self.lattice.validate().map_err(|e| prefixed("lattice", e))?;
        self.coupling.validate(self.lattice.cells).map_err(|e| prefixed("coupling", e))?;
        let o = &self.options;
        let bad = |field: &str, why: &str| Err(CliError::Config(format!("field `options.{field}`: {why}")));
        if let Some(m) = o.classify_margin {
            if !(m >= 0.0 && m.is_finite()) {
                return bad("classify_margin", "must be finite and non-negative");
            }
        }
        if !(o.zero_tolerance > 0.0 && o.zero_tolerance.is_finite()) {
            return bad("zero_tolerance", "must be finite and positive");
        }
        if o.g_grid.is_empty() || o.g_grid.iter().any(|g| !g.is_finite()) {
            return bad("g_grid", "must be a non-empty list of finite numbers");
        }
        if o.winding_nk < 8 {
            return bad("winding_nk", "need at least 8 momenta");
        }
        let ly = &o.lyapunov;
        if !(ly.v_min.is_finite() && ly.v_max.is_finite() && ly.v_min <= ly.v_max) {
            return bad("lyapunov.v_min", "need finite v_min <= v_max");
        }
        if ly.v_points == 0 {
            return bad("lyapunov.v_points", "must be positive");
        }
        if ly.channels.is_empty() {
            return bad("lyapunov.channels", "must name at least one sublattice");
        }
        if !(ly.evolution.t_final > 0.0) {
            return bad("lyapunov.evolution.t_final", "observation time must be positive");
        }
        ly.evolution.validate().map_err(|e| prefixed("options.lyapunov.evolution", e))?;
        if o.sweep.values.iter().any(|x| !x.is_finite()) {
            return bad("sweep.values", "must be finite");
        }
        if o.sweep.values.is_empty() {
            return bad("sweep.values", "must not be empty");
        }
        if !SWEEPABLE.contains(&o.sweep.parameter.as_str()) {
            return bad(
                "sweep.parameter",
                &format!("`{}` is not sweepable; use one of {}", o.sweep.parameter, SWEEPABLE.join(", ")),
            );
        }
        self.task_preconditions()
    }

    /// Checks that depend on the selected task.
    fn task_preconditions(&self) -> Result<(), CliError> {
        let needs_atom = matches!(self.task, Task::IprHeatmap);
        if needs_atom && self.coupling.emitter == Emitter::NoAtom {
            return Err(CliError::Config(format!(
                "field `coupling.emitter`: task {} needs an atom",
                self.task
            )));
        }
        if matches!(self.task, Task::Winding | Task::Boundstates | Task::BetaProfile) && self.variant != Variant::Nonreciprocal {
            return Err(CliError::Config(format!(
                "field `variant`: task {} is defined for the nonreciprocal chain only",
                self.task
            )));
        }
        Ok(())
    }
}

/// Numeric fields a sweep may vary.
pub const SWEEPABLE: [&str; 7] = [
    "lattice.t1",
    "lattice.t2",
    "lattice.gamma",
    "lattice.delta",
    "coupling.g_n",
    "coupling.g_m",
    "coupling.g",
];

fn prefixed(prefix: &str, e: giantatom_ssh::Error) -> CliError {
    match e {
        giantatom_ssh::Error::InvalidParameter { field, reason } => {
            CliError::Config(format!("field `{prefix}.{field}`: {reason}"))
        }
        other => CliError::Config(format!("{prefix}: {other}")),
    }
}

/// Writes `value` at a dotted path, creating intermediate objects.
/// `coupling.g` is shorthand for setting both leg strengths.
pub fn set_path(root: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    if key == "coupling.g" {
        set_path(root, "coupling.g_n", value.clone())?;
        return set_path(root, "coupling.g_m", value);
    }
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("override key `{key}` has an empty component")));
    }
    let mut cur = root;
    for p in &parts[..parts.len() - 1] {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("override key `{key}`: `{p}` is not inside an object")))?;
        cur = obj.entry(p.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = cur
        .as_object_mut()
        .ok_or_else(|| CliError::Config(format!("override key `{key}` does not address an object field")))?;
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
