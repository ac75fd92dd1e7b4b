//! Experiment driver for `giantatom-ssh`.
//!
//! A [`RunConfig`] names a task and its parameters. [`run`] executes it,
//! writes CSV artifacts into the output directory and finishes with a
//! `manifest.json` listing the resolved config and every file's SHA-256.
//! [`run_figure`] does the same for the preset configs behind each figure.

pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod tasks;

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use config::{RunConfig, Task, SCHEMA_VERSION};
pub use error::CliError;
pub use figures::Figure;
pub use output::ResultManifest;

use output::{write_artifacts, write_manifest, ConfigRecord};
use tasks::TaskOutput;

pub const TOOL_NAME: &str = "giantatom-ssh";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Runs `cfg` and writes into `cfg.out_dir`.
pub fn run(cfg: &RunConfig) -> Result<ResultManifest, CliError> {
    run_in(cfg, Path::new(&cfg.out_dir))
}

pub fn run_in(cfg: &RunConfig, out: &Path) -> Result<ResultManifest, CliError> {
    cfg.validate()?;
    let clock = Clock::start();
    let result = tasks::execute(cfg);
    finish(out, cfg.task.as_str().to_string(), vec![cfg.clone()], result, clock)
}

pub fn run_figure(fig: Figure, out: &Path) -> Result<ResultManifest, CliError> {
    let clock = Clock::start();
    let configs = figures::presets(fig);
    let result = figures::build(fig).map(|f| f.output);
    finish(out, format!("figure:{fig}"), configs, result, clock)
}

struct Clock {
    started_unix_s: f64,
    t0: Instant,
}

impl Clock {
    fn start() -> Self {
        let started_unix_s = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        Clock {
            started_unix_s,
            t0: Instant::now(),
        }
    }
}

/// Data files first, manifest last. A failed task still leaves a manifest
/// with status `failed` when the directory is writable.
fn finish(
    out: &Path,
    run: String,
    configs: Vec<RunConfig>,
    result: Result<TaskOutput, CliError>,
    clock: Clock,
) -> Result<ResultManifest, CliError> {
    let records = configs
        .into_iter()
        .map(|config| ConfigRecord {
            sha256: config.checksum(),
            config,
        })
        .collect();
    let mut manifest = ResultManifest {
        schema_version: SCHEMA_VERSION,
        tool: TOOL_NAME.into(),
        tool_version: TOOL_VERSION.into(),
        run,
        status: "failed".into(),
        error: None,
        configs: records,
        files: Vec::new(),
        summary: serde_json::Value::Null,
        started_unix_s: clock.started_unix_s,
        wall_time_s: 0.0,
    };
    match result {
        Ok(output) => {
            manifest.files = write_artifacts(out, &output.artifacts)?;
            manifest.status = output.status.as_str().into();
            manifest.summary = serde_json::Value::Object(output.summary);
            manifest.wall_time_s = clock.t0.elapsed().as_secs_f64();
            write_manifest(out, &manifest)?;
            Ok(manifest)
        }
        Err(e) => {
            manifest.error = Some(e.to_string());
            manifest.wall_time_s = clock.t0.elapsed().as_secs_f64();
            let _ = write_manifest(out, &manifest);
            Err(e)
        }
    }
}

/// Exit status for a completed run: 0, or 4 when no gap mode was found.
pub fn exit_code(manifest: &ResultManifest) -> i32 {
    match manifest.status.as_str() {
        "ok" => 0,
        "no-gap-mode" => 4,
        _ => 3,
    }
}
