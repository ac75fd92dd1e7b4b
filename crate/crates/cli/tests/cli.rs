use std::fs;
use std::path::Path;
use std::process::Command;

use giantatom_ssh::model::{Boundary, CouplingConfig, Emitter, LatticeParams, LegMode, Sublattice, Variant};
use giantatom_ssh::spectral::StateClass;
use giantatom_ssh_cli::config::TaskOptions;
use giantatom_ssh_cli::output::MANIFEST_NAME;
use giantatom_ssh_cli::{run_figure, run_in, Figure, ResultManifest, RunConfig, Task};
use proptest::prelude::*;
use sha2::{Digest, Sha256};

const BIN: &str = env!("CARGO_BIN_EXE_giantatom-ssh");

fn data_rows(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config-sha256="));
    lines.next().unwrap();
    lines.map(str::to_string).collect()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn spectrum_at_default_parameters_has_101_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::new(Task::Spectrum);
    assert_eq!((cfg.lattice.cells, cfg.coupling.n, cfg.coupling.m, cfg.coupling.g_n), (50, 25, 26, 1.0));
    let m = run_in(&cfg, dir.path()).unwrap();
    assert_eq!(m.status, "ok");
    let rows = data_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 101);
    let head = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(head.lines().nth(1).unwrap(), "index,re,im,class,ipr");
    assert!(head.starts_with(&format!("# config-sha256={}\n", cfg.checksum())));
}

#[test]
fn manifest_lists_files_with_checksums() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::new(Task::Boundstates);
    run_in(&cfg, dir.path()).unwrap();
    let m = ResultManifest::load(dir.path()).unwrap();
    assert_eq!(m.configs.len(), 1);
    assert_eq!(m.configs[0].config, cfg);
    assert_eq!(m.configs[0].sha256, cfg.checksum());
    assert!(!m.files.is_empty());
    for f in &m.files {
        let bytes = fs::read(dir.path().join(&f.path)).unwrap();
        assert_eq!(hex::encode(Sha256::digest(&bytes)), f.sha256, "{}", f.path);
        assert_eq!(bytes.len() as u64, f.bytes);
    }
    assert!(!dir.path().join(format!(".{MANIFEST_NAME}.tmp")).exists());
}

#[test]
fn reruns_are_byte_identical() {
    let mut cfg = RunConfig::new(Task::Sweep);
    cfg.options.sweep.values = vec![-0.6, 0.2, 0.9];
    for task in [Task::Spectrum, Task::Sweep, Task::Zeromode, Task::Boundstates] {
        cfg.task = task;
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_in(&cfg, a.path()).unwrap();
        run_in(&cfg, b.path()).unwrap();
        let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "task {task}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let mut cfg = RunConfig::new(Task::IprHeatmap);
    cfg.lattice.cells = 12;
    cfg.coupling = CouplingConfig::giant(LegMode::AB, 6, 6, 1.0);
    cfg.options.g_grid = vec![0.0, 0.5, 1.0, 3.0];
    let run_with = |threads: usize| {
        let dir = tempfile::tempdir().unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_in(&cfg, dir.path())).unwrap();
        csv_files(dir.path())
    };
    assert_eq!(run_with(1), run_with(3));
}

#[test]
fn heatmap_has_196_rows_and_suppressed_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(Task::IprHeatmap);
    cfg.lattice.cells = 20;
    cfg.coupling = CouplingConfig::giant(LegMode::AB, 10, 10, 1.0);
    run_in(&cfg, dir.path()).unwrap();
    let rows: Vec<(f64, f64, f64)> = data_rows(&dir.path().join("ipr_heatmap.csv"))
        .iter()
        .map(|r| {
            let v: Vec<f64> = r.split(',').map(|x| x.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .collect();
    assert_eq!(rows.len(), 196);
    let off_max = rows.iter().filter(|r| r.0 != r.1).map(|r| r.2).fold(0.0, f64::max);
    for g in 1..=13 {
        let g = g as f64;
        let diag = rows.iter().find(|r| r.0 == g && r.1 == g).unwrap().2;
        let row_max = rows.iter().filter(|r| r.0 == g && r.1 != g).map(|r| r.2).fold(0.0, f64::max);
        assert!(diag < row_max, "g = {g}: diagonal {diag} vs row max {row_max}");
        assert!(diag < off_max);
    }
}

fn bin(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).current_dir(cwd).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn zeromode_outside_window_exits_4_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = bin(&["zeromode", "--set", "lattice.t1=0.8", "--out", "z"], dir.path());
    assert_eq!(code, 4, "{err}");
    assert!(err.contains("no gap mode"), "{err}");
    let out = dir.path().join("z");
    let m = ResultManifest::load(&out).unwrap();
    assert_eq!(m.status, "no-gap-mode");
    assert_eq!(m.configs[0].config.lattice.t1, 0.8);
    assert!(data_rows(&out.join("zeromode_numeric.csv")).is_empty());
    assert_eq!(m.files[0].rows, Some(0));
}

#[test]
fn zeromode_inside_window_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = bin(&["zeromode", "--out", "z"], dir.path());
    assert_eq!(code, 0, "{err}");
    assert_eq!(data_rows(&dir.path().join("z/zeromode_numeric.csv")).len(), 101);
    assert_eq!(data_rows(&dir.path().join("z/zeromode_analytic.csv")).len(), 101);
}

#[test]
fn config_errors_exit_2_and_name_field() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = bin(&["spectrum", "--set", "coupling.g_x=1"], dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("coupling") && err.contains("g_x"), "{err}");
    let (code, _, err) = bin(&["spectrum", "--set", "lattice.L=1"], dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("lattice.L"), "{err}");
    let (code, _, _) = bin(&["figure", "fig9"], dir.path());
    assert_eq!(code, 2);
    fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
    let (code, _, err) = bin(&["spectrum", "--config", "broken.json"], dir.path());
    assert_eq!(code, 2, "{err}");
}

#[test]
fn precondition_failure_exits_4() {
    // Paths longer than half the ring.
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = bin(
        &["lyapunov", "--set", "lattice.L=41", "--set", "coupling.n=1", "--set", "coupling.m=1", "--out", "l"],
        dir.path(),
    );
    assert_eq!(code, 4, "{err}");
    let m = ResultManifest::load(&dir.path().join("l")).unwrap();
    assert_eq!(m.status, "failed");
    assert!(m.error.unwrap().contains("path reaches"));
}

#[test]
fn config_file_and_env_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(Task::Winding);
    cfg.lattice.t1 = 0.3;
    fs::write(dir.path().join("run.json"), cfg.to_json_pretty()).unwrap();
    let out = Command::new(BIN)
        .args(["winding", "--config", "run.json", "--out", "w"])
        .env("GIANTATOM_SSH_THREADS", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&dir.path().join("w/winding.csv"));
    let rounded: f64 = rows[0].split(',').last().unwrap().parse().unwrap();
    assert_eq!(rounded, 1.0);
    let (code, stdout, _) = bin(&["spectrum", "--dry-run", "--set", "seed=7"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(RunConfig::from_json_str(&stdout).unwrap().seed, 7);
}

#[test]
fn figure_two_writes_six_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_figure(Figure::Fig2, dir.path()).unwrap();
    assert_eq!(m.files.len(), 6);
    assert_eq!(m.configs.len(), 2);
    for mode in ["ab", "aa"] {
        for part in ["re", "im", "abs"] {
            let rows = data_rows(&dir.path().join(format!("fig2_{mode}_{part}.csv")));
            assert_eq!(rows.len(), 161 * 101);
        }
    }
}

#[test]
fn figure_five_profiles_localize_at_single_legs() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_figure(Figure::Fig5, dir.path()).unwrap();
    assert_eq!(m.files.len(), 4);
    for mode in ["ab", "aa"] {
        let modes = m.summary[mode].as_array().unwrap();
        assert_eq!(modes.len(), 2);
        for md in modes {
            assert!(md["weight"].as_f64().unwrap() >= 0.95, "{md}");
        }
    }
    assert_eq!(data_rows(&dir.path().join("fig5a.csv")).len(), 102);
}

#[test]
fn figure_eight_has_two_models() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_figure(Figure::Fig8, dir.path()).unwrap();
    for tag in ["model-1", "model-2"] {
        let rows = data_rows(&dir.path().join(format!("fig8_{tag}.csv")));
        assert_eq!(rows.len(), 2 * 81);
        assert!(rows.iter().all(|r| r.ends_with(tag)));
        assert!(m.summary[tag].as_array().unwrap().iter().all(|c| c["finite"] == true));
    }
}

fn finite(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    lo..hi
}

prop_compose! {
    fn arb_config()(
        task in prop::sample::select(Task::ALL.to_vec()),
        cells in 4usize..120,
        t1 in finite(-3.0, 3.0),
        t2 in prop_oneof![finite(0.1, 3.0), finite(-3.0, -0.1)],
        gamma in finite(-2.0, 2.0),
        delta in finite(0.0, 2.0),
        emitter in prop::sample::select(vec![Emitter::GiantAtom, Emitter::TwoSmallAtoms]),
        aa in any::<bool>(),
        legs in (0.0f64..1.0, 0.0f64..1.0),
        g_n in finite(0.0, 13.0),
        g_m in finite(0.0, 13.0),
        open in any::<bool>(),
        tol in finite(1e-8, 1.0),
        grid in prop::collection::vec(finite(0.0, 13.0), 1..6),
        nk in 8usize..4096,
        v in (finite(-3.0, 0.0), finite(0.0, 3.0), 1usize..200),
        t_final in finite(1.0, 100.0),
        seed in any::<u64>(),
        margin in prop::option::of(finite(0.0, 1e-3)),
    ) -> RunConfig {
        let (a, b) = ((legs.0 * cells as f64) as usize + 1, (legs.1 * cells as f64) as usize + 1);
        let (n, m) = (a.min(b), a.max(b));
        let mut options = TaskOptions {
            classify_margin: margin,
            zero_tolerance: tol,
            g_grid: grid,
            winding_nk: nk,
            beta_class: StateClass::Bulk,
            ..TaskOptions::default()
        };
        options.lyapunov.v_min = v.0;
        options.lyapunov.v_max = v.1;
        options.lyapunov.v_points = v.2;
        options.lyapunov.channels = vec![Sublattice::B];
        options.lyapunov.evolution.t_final = t_final;
        let coupling = CouplingConfig {
            emitter,
            mode: if aa { LegMode::AA } else { LegMode::AB },
            n,
            m,
            g_n,
            g_m,
        };
        RunConfig {
            schema_version: 1,
            task,
            variant: Variant::Nonreciprocal,
            lattice: LatticeParams { cells, t1, t2, gamma, delta },
            coupling,
            boundary: if open { Boundary::Open } else { Boundary::Periodic },
            options,
            out_dir: format!("out/{seed}"),
            seed,
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn config_round_trips(cfg in arb_config()) {
        prop_assert!(cfg.validate().is_ok());
        let text = cfg.to_json_pretty();
        let back = RunConfig::from_json_str(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.checksum(), cfg.checksum());
        let compact = serde_json::to_string(&cfg).unwrap();
        prop_assert_eq!(RunConfig::from_json_str(&compact).unwrap(), cfg);
    }
}
