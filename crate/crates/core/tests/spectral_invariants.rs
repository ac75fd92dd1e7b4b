mod common;

use std::f64::consts::PI;

use common::{energy_root, fig2_model, giant, lattice, norm_f, residual};
use giantatom_ssh::model::{assemble, build_ssh, Boundary, CouplingConfig, LatticeParams, LegMode, Variant};
use giantatom_ssh::spectral::{classify_states, dispersion, eigendecompose, StateClass};
use giantatom_ssh::C64;

#[test]
fn residual_bound_and_count() {
    let p = lattice(50, 0.2);
    let models = [
        giant(&p, LegMode::AB, 25, 26, 1.0),
        giant(&p, LegMode::AA, 20, 40, 1.0),
        assemble(&p, &CouplingConfig::two_small(LegMode::AB, 20, 40, 1.0), Boundary::Periodic, Variant::Nonreciprocal)
            .unwrap(),
        assemble(&p.with_delta(0.7), &CouplingConfig::giant(LegMode::AB, 1, 1, 1.0), Boundary::Open, Variant::GainLoss)
            .unwrap(),
    ];
    for h in &models {
        let s = eigendecompose(h, true).unwrap();
        assert_eq!(s.len(), h.dim());
        let r = s.max_residual(&h.matrix);
        assert!(r <= 1e-9 * norm_f(h), "residual {r:e}");
        if let Some(d) = s.biorthogonality_defect() {
            assert!(d <= 1e-8, "biorthogonality {d:e}");
        }
    }
}

#[test]
fn bare_ring_matches_dispersion() {
    let p = lattice(50, 0.2);
    let s = eigendecompose(&build_ssh(&p, Boundary::Periodic).unwrap(), false).unwrap();
    let mut expected: Vec<C64> = (0..50)
        .flat_map(|j| {
            let w = dispersion(&p, 2.0 * PI * j as f64 / 50.0);
            [w, -w]
        })
        .collect();
    for e in &s.eigenvalues {
        let (k, d) = expected
            .iter()
            .enumerate()
            .map(|(k, w)| (k, (w - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!(d <= 1e-9, "eigenvalue {e} misses the band by {d:e}");
        expected.swap_remove(k);
    }
}

#[test]
fn chiral_pairing_without_atom() {
    for (t1, gamma) in [(0.2, 0.5), (0.9, 0.3), (1.7, 0.5)] {
        let p = LatticeParams::new(40, t1, 1.0, gamma).unwrap();
        for b in [Boundary::Periodic, Boundary::Open] {
            let s = eigendecompose(&build_ssh(&p, b).unwrap(), false).unwrap();
            for e in &s.eigenvalues {
                let d = s.eigenvalues.iter().map(|f| (f + e).norm()).fold(f64::INFINITY, f64::min);
                assert!(d <= 1e-9, "{e} has no partner (t1 = {t1}, {b:?})");
            }
        }
    }
}

#[test]
fn hermitian_limit_is_real() {
    let p = LatticeParams::new(50, 0.7, 1.0, 0.0).unwrap();
    for mode in [LegMode::AB, LegMode::AA] {
        let s = eigendecompose(&giant(&p, mode, 25, 26, 1.0), false).unwrap();
        let im = s.eigenvalues.iter().map(|e| e.im.abs()).fold(0.0, f64::max);
        assert!(im <= 1e-10, "max |Im E| = {im:e}");
    }
}

/// Inside the window the A–B zero mode of a finite ring is split off zero by
/// about `(max|t1 ± γ| / t2)^L`. Each point either meets `|E| ≤ 1e-8`, or its
/// near-zero eigenvalue is certified as a genuine root of the finite-ring
/// energy equation within that splitting.
#[test]
fn window_law_with_finite_size_splitting() {
    let mut unmet = Vec::new();
    for t1 in [-0.45, -0.3, 0.0, 0.3, 0.45] {
        let (p, h) = fig2_model(t1, LegMode::AB);
        let s = eigendecompose(&h, false).unwrap();
        let q = s.closest_to_zero().unwrap();
        let e = s.eigenvalues[q];
        if e.norm() <= 1e-8 {
            continue;
        }
        let root = energy_root(e, &p, &h.coupling);
        let split = (p.forward().abs().max(p.backward().abs()) / p.t2).powi(p.cells as i32);
        assert!((root - e).norm() <= 1e-6 * e.norm(), "t1 = {t1}: eigenvalue {e} vs root {root}");
        assert!(e.norm() <= 2.0 * split, "t1 = {t1}: |E| = {:e} exceeds splitting {split:e}", e.norm());
        unmet.push((t1, e.norm()));
    }
    for (t1, a) in &unmet {
        println!("window law: t1 = {t1}: min|E| = {a:.3e} > 1e-8 (finite-ring splitting)");
    }
    for t1 in [-1.0, -0.6, 0.6, 1.0] {
        let (_, h) = fig2_model(t1, LegMode::AB);
        let m = eigendecompose(&h, false).unwrap().min_abs();
        assert!(m >= 1e-3, "t1 = {t1}: min|E| = {m:e}");
    }
}

/// Labels at the default parameters, each label certified by a root of the
/// energy equation found independently of the eigensolver.
#[test]
fn classification_at_default_parameters() {
    let (p, h) = fig2_model(0.2, LegMode::AB);
    let s = eigendecompose(&h, false).unwrap();
    let c = classify_states(&s, &p, None).unwrap();
    assert!(c.ambiguous().is_empty());
    let gap = c.indices(StateClass::GapMode);
    let upper = c.indices(StateClass::UpperBound);
    let lower = c.indices(StateClass::LowerBound);
    assert_eq!((gap.len(), upper.len(), lower.len()), (2, 1, 2));
    for &q in gap.iter().chain(&upper).chain(&lower) {
        let e = s.eigenvalues[q];
        let root = energy_root(e, &p, &h.coupling);
        assert!((root - e).norm() <= 1e-9 * e.norm().max(1e-6), "{e} vs root {root}");
    }
    let z = gap.iter().map(|&q| s.eigenvalues[q]).min_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    assert!((z.re + 1.3835e-8).abs() < 1e-11, "near-zero mode {z}");
    assert!(s.eigenvalues[upper[0]].im.abs() < 1e-10);
    let (l0, l1) = (s.eigenvalues[lower[0]], s.eigenvalues[lower[1]]);
    assert!((l0 - l1.conj()).norm() < 1e-9 && l0.im.abs() > 1e-2, "lower pair {l0}, {l1}");
}

#[test]
fn decoupled_atom_is_a_gap_mode() {
    for mode in [LegMode::AB, LegMode::AA] {
        let p = lattice(50, 0.2);
        let h = giant(&p, mode, 25, 26, 0.0);
        let s = eigendecompose(&h, false).unwrap();
        let c = classify_states(&s, &p, None).unwrap();
        assert_eq!(c.count(StateClass::UpperBound) + c.count(StateClass::LowerBound), 0);
        let gap = c.indices(StateClass::GapMode);
        assert_eq!(gap.len(), 1);
        let q = gap[0];
        assert_eq!(s.eigenvalues[q].norm(), 0.0);
        assert!((s.right_vector(q)[h.indexing.atom(0)].norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn aa_zero_mode_on_every_grid_point() {
    for j in 0..=40 {
        let t1 = -2.0 + 0.1 * j as f64;
        let (_, h) = fig2_model(t1, LegMode::AA);
        let m = eigendecompose(&h, false).unwrap().min_abs();
        assert!(m <= 1e-8, "t1 = {t1}: min|E| = {m:e}");
    }
}

#[test]
fn bound_state_energies_solve_the_energy_equation() {
    for mode in [LegMode::AB, LegMode::AA] {
        for t1 in [0.2, -0.2, 0.8, 1.6] {
            let (p, h) = fig2_model(t1, mode);
            let s = eigendecompose(&h, false).unwrap();
            let c = classify_states(&s, &p, None).unwrap();
            let mut bound = c.indices(StateClass::UpperBound);
            bound.extend(c.indices(StateClass::LowerBound));
            for q in bound {
                let e = s.eigenvalues[q];
                let r = residual(e, &p, &h.coupling).norm();
                assert!(r <= 1e-6, "{mode:?} t1 = {t1}: residual {r:e} at {e}");
            }
        }
    }
}

/// Along the t1 sweep, real bound states merge into complex pairs and back:
/// the number of complex eigenvalues rises and falls.
#[test]
fn exceptional_points_along_sweep() {
    let counts: Vec<usize> = (0..=160)
        .map(|j| {
            let (_, h) = fig2_model(-2.0 + 0.025 * j as f64, LegMode::AB);
            let s = eigendecompose(&h, false).unwrap();
            s.eigenvalues.iter().filter(|e| e.im.abs() > 1e-8).count()
        })
        .collect();
    let rises = counts.windows(2).filter(|w| w[1] > w[0]).count();
    let falls = counts.windows(2).filter(|w| w[1] < w[0]).count();
    assert!(rises >= 1 && falls >= 1, "{counts:?}");
}
