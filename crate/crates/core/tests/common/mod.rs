#![allow(dead_code)]

use giantatom_ssh::model::{assemble, Boundary, CouplingConfig, HamiltonianMatrix, LatticeParams, LegMode, Variant};
use giantatom_ssh::spectral::{energy_residual_aa, energy_residual_ab, frobenius_norm};
use giantatom_ssh::C64;

pub fn lattice(cells: usize, t1: f64) -> LatticeParams {
    LatticeParams::new(cells, t1, 1.0, 0.5).unwrap()
}

pub fn giant(params: &LatticeParams, mode: LegMode, n: usize, m: usize, g: f64) -> HamiltonianMatrix {
    assemble(params, &CouplingConfig::giant(mode, n, m, g), Boundary::Periodic, Variant::Nonreciprocal).unwrap()
}

/// Ring of 50 cells with legs in cells 25 and 26.
pub fn fig2_model(t1: f64, mode: LegMode) -> (LatticeParams, HamiltonianMatrix) {
    let p = lattice(50, t1);
    let h = giant(&p, mode, 25, 26, 1.0);
    (p, h)
}

pub fn residual(e: C64, p: &LatticeParams, c: &CouplingConfig) -> C64 {
    match c.mode {
        LegMode::AB => energy_residual_ab(e, p, c).unwrap(),
        LegMode::AA => energy_residual_aa(e, p, c).unwrap(),
    }
}

/// Secant iteration on `E − RHS(E)` of the finite-ring energy equation,
/// independent of the eigensolver.
pub fn energy_root(start: C64, p: &LatticeParams, c: &CouplingConfig) -> C64 {
    let mut x0 = start;
    let mut x1 = start + C64::new(1e-7 * start.norm().max(1e-3), 0.0);
    let mut f0 = residual(x0, p, c);
    for _ in 0..200 {
        let f1 = residual(x1, p, c);
        if f1.norm() < 1e-15 || (x1 - x0).norm() < 1e-17 {
            return x1;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        x0 = x1;
        f0 = f1;
        x1 = x2;
    }
    x1
}

pub fn norm_f(h: &HamiltonianMatrix) -> f64 {
    frobenius_norm(&h.matrix)
}
