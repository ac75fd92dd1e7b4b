//! Implicit energy equations of the atom-coupled ring.
//!
//! Eliminating the chain amplitudes from the single-excitation eigenproblem
//! gives `E = Σ_k F(E, k)` over the ring momenta `k = 2πj/L`. The sums here
//! are exact for a finite ring, so the residual `E − Σ_k F` vanishes at every
//! eigenvalue that carries atom weight.

use std::f64::consts::PI;

use super::bands::omega_squared;
use crate::error::{Error, Result};
use crate::model::{CouplingConfig, Emitter, LatticeParams, C64};

/// `|E² − ω_k²|` below this is treated as a pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

fn require_giant(config: &CouplingConfig) -> Result<()> {
    match config.emitter {
        Emitter::GiantAtom => Ok(()),
        other => Err(Error::Precondition(format!(
            "the energy equation is defined for a giant atom, got {other:?}"
        ))),
    }
}

fn ring_sum(
    energy: C64,
    params: &LatticeParams,
    mut numerator: impl FnMut(f64) -> C64,
) -> Result<C64> {
    params.validate()?;
    let cells = params.cells;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..cells {
        let k = 2.0 * PI * j as f64 / cells as f64;
        let denom = energy * energy - omega_squared(params, k);
        if denom.norm() < POLE_TOLERANCE {
            return Err(Error::PoleProximity {
                energy: format!("{energy}"),
                k,
                distance: denom.norm(),
            });
        }
        acc += numerator(k) / denom;
    }
    Ok(acc / cells as f64)
}

/// Right-hand side of the A–B energy equation,
/// `(1/L) Σ_k [E(g_n² + g_m²) + 2 g_n g_m (t1 cos kd − iγ sin kd + t2 cos k(d+1))] / (E² − ω_k²)`
/// with `d = m − n`. For `g_n = g_m = g` this is the familiar
/// `(2g²/L) Σ_k (E + t1 cos kd − iγ sin kd + t2 cos k(d+1)) / (E² − ω_k²)`.
pub fn energy_rhs_ab(energy: C64, params: &LatticeParams, config: &CouplingConfig) -> Result<C64> {
    require_giant(config)?;
    let d = config.separation() as f64;
    let (gn, gm) = (config.g_n, config.g_m);
    let (t1, t2, gamma) = (params.t1, params.t2, params.gamma);
    ring_sum(energy, params, |k| {
        let cross = C64::new(t1 * (k * d).cos() + t2 * (k * (d + 1.0)).cos(), -gamma * (k * d).sin());
        energy * (gn * gn + gm * gm) + 2.0 * gn * gm * cross
    })
}

/// `E − RHS` for A–B coupling.
pub fn energy_residual_ab(energy: C64, params: &LatticeParams, config: &CouplingConfig) -> Result<C64> {
    Ok(energy - energy_rhs_ab(energy, params, config)?)
}

/// Right-hand side of the A–A energy equation,
/// `(1/L) Σ_k E (g_n² + g_m² + 2 g_n g_m cos kd) / (E² − ω_k²)`.
pub fn energy_rhs_aa(energy: C64, params: &LatticeParams, config: &CouplingConfig) -> Result<C64> {
    require_giant(config)?;
    let d = config.separation() as f64;
    let (gn, gm) = (config.g_n, config.g_m);
    ring_sum(energy, params, |k| energy * (gn * gn + gm * gm + 2.0 * gn * gm * (k * d).cos()))
}

pub fn energy_residual_aa(energy: C64, params: &LatticeParams, config: &CouplingConfig) -> Result<C64> {
    Ok(energy - energy_rhs_aa(energy, params, config)?)
}

/// Infinite-ring value of the A–B right-hand side at `E = 0`, obtained by
/// residues. Each intracell hopping `t1 ∓ γ` whose modulus exceeds `|t2|`
/// contributes `−g²/(t1∓γ) · (−t2/(t1∓γ))^d`; inside the window
/// `|t1 ± γ| < |t2|` nothing survives and the value is exactly zero.
pub fn zero_mode_selfenergy_closed(params: &LatticeParams, g: f64, d: usize) -> Result<f64> {
    params.validate()?;
    let t2 = params.t2.abs();
    let scale = params.t1.abs() + params.gamma.abs() + t2;
    let mut total = 0.0;
    for (name, hop) in [("t1 - gamma", params.backward()), ("t1 + gamma", params.forward())] {
        if (hop.abs() - t2).abs() <= 1e-12 * scale {
            return Err(Error::Precondition(format!(
                "|{name}| = |t2|: pole on the unit circle, closed form is singular"
            )));
        }
        if hop.abs() > t2 {
            total += -g * g / hop * (-params.t2 / hop).powi(d as i32);
        }
    }
    Ok(total)
}
