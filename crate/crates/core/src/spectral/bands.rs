use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SpectrumResult;
use crate::error::{Error, Result};
use crate::model::{LatticeParams, C64};

/// One point of the Bloch dispersion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSample {
    pub k: f64,
    pub omega_k: C64,
}

/// Upper band `ω_k = √((t1+γ+t2 e^{−ik})(t1−γ+t2 e^{ik}))`, principal
/// branch (`Re ω ≥ 0`). The lower band is `−ω_k`.
pub fn dispersion(params: &LatticeParams, k: f64) -> C64 {
    omega_squared(params, k).sqrt()
}

pub(crate) fn omega_squared(params: &LatticeParams, k: f64) -> C64 {
    let ek = C64::from_polar(1.0, k);
    (params.forward() + params.t2 * ek.conj()) * (params.backward() + params.t2 * ek)
}

pub fn dispersion_sample(params: &LatticeParams, k: f64) -> DispersionSample {
    DispersionSample {
        k,
        omega_k: dispersion(params, k),
    }
}

/// Extremes of `|ω_k|` over a uniform k grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandHull {
    pub min_abs: f64,
    pub max_abs: f64,
    pub samples: usize,
}

/// Samples `|ω_k|` at `k = 2πj/n_k − π`; `n_k` a multiple of `L` includes
/// every ring momentum.
pub fn band_hull(params: &LatticeParams, nk: usize) -> BandHull {
    let nk = nk.max(1);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for j in 0..nk {
        let k = 2.0 * PI * j as f64 / nk as f64 - PI;
        let w = dispersion(params, k).norm();
        lo = lo.min(w);
        hi = hi.max(w);
    }
    BandHull {
        min_abs: lo,
        max_abs: hi,
        samples: nk,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateClass {
    Bulk,
    UpperBound,
    LowerBound,
    GapMode,
}

impl StateClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StateClass::Bulk => "bulk",
            StateClass::UpperBound => "upper-bound",
            StateClass::LowerBound => "lower-bound",
            StateClass::GapMode => "gap-mode",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateLabel {
    pub class: StateClass,
    /// `|E|` lies within the margin of a hull edge; the class is the best
    /// guess and should not be trusted blindly.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub labels: Vec<StateLabel>,
    pub hull: BandHull,
    pub margin: f64,
}

impl Classification {
    pub fn count(&self, class: StateClass) -> usize {
        self.labels.iter().filter(|l| l.class == class && !l.ambiguous).count()
    }

    pub fn indices(&self, class: StateClass) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.class == class && !l.ambiguous)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn ambiguous(&self) -> Vec<usize> {
        self.labels.iter().enumerate().filter(|(_, l)| l.ambiguous).map(|(q, _)| q).collect()
    }
}

/// Labels each eigenvalue against the ring band hull `{|ω_k|}` sampled at
/// `16 L` momenta. The default margin is `1e-6 · max_k |ω_k|`.
pub fn classify_states(spec: &SpectrumResult, params: &LatticeParams, margin: Option<f64>) -> Result<Classification> {
    let hull = band_hull(params, 16 * params.cells);
    let margin = margin.unwrap_or(1e-6 * hull.max_abs);
    if !(margin >= 0.0) {
        return Err(Error::invalid("margin", "must be non-negative"));
    }
    let labels = spec
        .eigenvalues
        .iter()
        .map(|e| {
            let r = e.norm();
            let upper_side = if e.re != 0.0 { e.re > 0.0 } else { e.im >= 0.0 };
            let outside = if upper_side { StateClass::UpperBound } else { StateClass::LowerBound };
            if r > hull.max_abs + margin {
                StateLabel { class: outside, ambiguous: false }
            } else if r < hull.min_abs - margin {
                StateLabel { class: StateClass::GapMode, ambiguous: false }
            } else if (r - hull.max_abs).abs() <= margin || (r - hull.min_abs).abs() <= margin {
                let class = if r > hull.max_abs {
                    outside
                } else if r < hull.min_abs {
                    StateClass::GapMode
                } else {
                    StateClass::Bulk
                };
                StateLabel { class, ambiguous: true }
            } else {
                StateLabel { class: StateClass::Bulk, ambiguous: false }
            }
        })
        .collect();
    Ok(Classification { labels, hull, margin })
}
