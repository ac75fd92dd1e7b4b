use std::f64::consts::PI;

use ndarray::array;
use serde::{Deserialize, Serialize};

use super::bands::band_hull;
use super::eigendecompose_matrix;
use crate::error::{Error, Result};
use crate::model::{LatticeParams, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Winding {
    pub raw: f64,
    /// `raw` rounded to the nearest half-integer.
    pub rounded: f64,
}

fn bloch(params: &LatticeParams, k: f64) -> ndarray::Array2<C64> {
    let ek = C64::from_polar(1.0, k);
    let zero = C64::new(0.0, 0.0);
    array![
        [zero, params.forward() + params.t2 * ek.conj()],
        [params.backward() + params.t2 * ek, zero]
    ]
}

/// Gauge-invariant sublattice ratio `(R_B/R_A) / conj(L_B/L_A)` of the
/// upper Bloch band. Any rescaling `R → cR`, `L → L/c̄` cancels, and the
/// value is the same for both bands.
fn chiral_ratio(params: &LatticeParams, k: f64) -> Result<C64> {
    let s = eigendecompose_matrix(&bloch(params, k), true, 2)?;
    let left = s.left.as_ref().expect("left vectors requested");
    let q = 1;
    let r = s.right.column(q);
    let l = left.column(q);
    Ok((r[1] / r[0]) / (l[1] / l[0]).conj())
}

/// Winding number of the ring without emitter, from the biorthogonal Bloch
/// eigenvectors on `nk` momenta.
///
/// The phase of the gauge-invariant ratio [`chiral_ratio`] is accumulated
/// step by step as `Σ_j arg(ρ_{j+1} / ρ_j)` around the Brillouin zone and the
/// winding is `v = Σ arg / 4π`. This equals `−(1/π)∮⟨φ^L|i∂_k|φ^R⟩` in the smooth
/// chiral gauge; the orientation is fixed so that the topological window
/// `|t1 ± γ| < |t2|` reports `+1`. Between the two phase boundaries the
/// value is half-integer.
pub fn winding_number(params: &LatticeParams, nk: usize) -> Result<Winding> {
    params.validate()?;
    if nk < 8 {
        return Err(Error::invalid("nk", "need at least 8 momenta"));
    }
    let gap = band_hull(params, nk).min_abs;
    let closing = (params.forward().abs() - params.t2.abs())
        .abs()
        .min((params.backward().abs() - params.t2.abs()).abs());
    let scale = params.t1.abs() + params.gamma.abs() + params.t2.abs();
    if gap <= 1e-6 * scale || closing <= 1e-9 * scale {
        return Err(Error::Precondition(format!(
            "Bloch gap closes (min |ω_k| = {gap:.3e}); winding number undefined"
        )));
    }
    let first = chiral_ratio(params, 0.0)?;
    let mut prev = first;
    let mut phase = 0.0;
    for j in 1..=nk {
        let next = if j == nk {
            first
        } else {
            chiral_ratio(params, 2.0 * PI * j as f64 / nk as f64)?
        };
        phase += (next / prev).arg();
        prev = next;
    }
    let raw = phase / (4.0 * PI);
    Ok(Winding {
        raw,
        rounded: (2.0 * raw).round() / 2.0,
    })
}
