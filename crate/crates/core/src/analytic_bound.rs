//! Closed-form amplitude profiles of bound states and zero modes.
//!
//! Eliminating the atom from the Bloch equations leaves the lattice Green
//! function `f(k) = 1/(x − (t1+γ)e^{ik} − (t1−γ)e^{−ik})`, whose Laurent
//! expansion `c[1 + Σ_p (e^{−ikp} a^p + e^{ikp} b^p)]` converges when both
//! `|a|, |b| < 1`. The real-space amplitudes are then finite geometric sums
//! measured from the leg sites. The wrap-around of a finite ring is ignored,
//! so the profiles are exact on an infinite chain and carry an `O(|a|^L)`
//! error on a ring.

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CouplingConfig, Emitter, LatticeParams, LegMode, SiteIndexing, Sublattice, C64};

/// Symbols of the closed-form solution at a fixed real energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormContext {
    pub energy: f64,
    pub g: f64,
    pub x: f64,
    /// Step function `θ(x)` as 0 or 1.
    pub y: u8,
    pub a: f64,
    pub b: f64,
    /// Leading factor `c` of the expansion, `(−1)^{y+1}/√(x² − 4(t1+γ)(t1−γ))`.
    pub prefactor: f64,
    pub t: f64,
    pub y1: f64,
    pub y2: f64,
    /// `g/(t1−γ)`; infinite when `t1 = γ`.
    pub y3: f64,
    /// `g/(t1+γ)`; infinite when `t1 = −γ`.
    pub y4: f64,
    pub t1: f64,
    pub t2: f64,
    pub gamma: f64,
}

impl ClosedFormContext {
    /// Builds the context for energy `E` outside the band.
    ///
    /// Of the two roots of `(t1+γ)z² − xz + (t1−γ) = 0` the one with
    /// `|a| < 1` and `|b| = |(t1+γ)a/(t1−γ)| < 1` is kept. For real `E` this
    /// is the `+√` branch when `x < 0` and the `−√` branch when `x > 0`.
    pub fn new(energy: f64, params: &LatticeParams, g: f64) -> Result<Self> {
        params.validate()?;
        if !energy.is_finite() {
            return Err(Error::invalid("energy", "must be finite"));
        }
        if !g.is_finite() {
            return Err(Error::invalid("g", "must be finite"));
        }
        let (alpha, beta, t2) = (params.forward(), params.backward(), params.t2);
        if alpha == 0.0 || beta == 0.0 {
            return Err(Error::Precondition(
                "t1 = ±γ: one intracell hopping vanishes and the expansion degenerates".into(),
            ));
        }
        let x = (energy * energy - alpha * beta - t2 * t2) / t2;
        let radicand = x * x - 4.0 * alpha * beta;
        if !(radicand > 0.0) {
            return Err(Error::Precondition(format!(
                "E = {energy} lies in the band (x² − 4(t1+γ)(t1−γ) = {radicand:.6e} ≤ 0)"
            )));
        }
        let root = radicand.sqrt();
        let candidates = [(x + root) / (2.0 * alpha), (x - root) / (2.0 * alpha)];
        let decaying = |z: f64| z.abs() < 1.0 && (alpha * z / beta).abs() < 1.0;
        let (a, other) = if decaying(candidates[0]) {
            (candidates[0], candidates[1])
        } else if decaying(candidates[1]) {
            (candidates[1], candidates[0])
        } else {
            return Err(Error::Precondition(format!(
                "E = {energy}: neither root of the lattice Green function decays on both sides"
            )));
        };
        let b = alpha * a / beta;
        let prefactor = -1.0 / (alpha * (a - other));
        Ok(ClosedFormContext {
            energy,
            g,
            x,
            y: u8::from(x > 0.0),
            a,
            b,
            prefactor,
            t: g * energy / t2,
            y1: g * beta / t2,
            y2: g * alpha / t2,
            y3: g / beta,
            y4: g / alpha,
            t1: params.t1,
            t2,
            gamma: params.gamma,
        })
    }

    pub fn radicand(&self) -> f64 {
        self.x * self.x - 4.0 * (self.t1 + self.gamma) * (self.t1 - self.gamma)
    }
}

fn pow(base: f64, exp: i64) -> f64 {
    base.powi(exp.unsigned_abs() as i32)
}

fn require_equal_giant(config: &CouplingConfig, mode: LegMode) -> Result<f64> {
    if config.emitter != Emitter::GiantAtom {
        return Err(Error::Precondition(format!(
            "closed forms describe a giant atom, got {:?}",
            config.emitter
        )));
    }
    if config.mode != mode {
        return Err(Error::Precondition(format!("closed form for {mode:?} called with {:?}", config.mode)));
    }
    if config.g_n != config.g_m {
        return Err(Error::Precondition("closed forms assume g_n = g_m".into()));
    }
    Ok(config.g_n)
}

fn check_cell(l: usize) -> Result<i64> {
    if l == 0 {
        return Err(Error::invalid("l", "cells are numbered from 1"));
    }
    Ok(l as i64)
}

/// `(A_l/U_e, B_l/U_e)` of an A–B bound state with the legs on `A_n` and `B_m`.
pub fn bound_amplitudes_ab(ctx: &ClosedFormContext, config: &CouplingConfig, l: usize) -> Result<(f64, f64)> {
    require_equal_giant(config, LegMode::AB)?;
    let l = check_cell(l)?;
    let (n, m) = (config.n as i64, config.m as i64);
    let tau1 = if l >= n { ctx.a } else { ctx.b };
    let tau2 = if l > m { ctx.a } else { ctx.b };
    let a_l = ctx.t * pow(tau1, l - n) + ctx.g * pow(tau2, l - m - 1) + ctx.y2 * pow(tau2, l - m);
    let b_l = ctx.t * pow(tau2, l - m) + ctx.g * pow(tau1, l - n + 1) + ctx.y1 * pow(tau1, l - n);
    Ok((ctx.prefactor * a_l, ctx.prefactor * b_l))
}

/// `(A_l/U_e, B_l/U_e)` of an A–A bound state with the legs on `A_n` and `A_m`.
pub fn bound_amplitudes_aa(ctx: &ClosedFormContext, config: &CouplingConfig, l: usize) -> Result<(f64, f64)> {
    require_equal_giant(config, LegMode::AA)?;
    let l = check_cell(l)?;
    let (n, m) = (config.n as i64, config.m as i64);
    let tau1 = if l >= n { ctx.a } else { ctx.b };
    let tau3 = if l >= m { ctx.a } else { ctx.b };
    let a_l = ctx.t * (pow(tau1, l - n) + pow(tau3, l - m));
    let b_l = ctx.y1 * (pow(tau1, l - n) + pow(tau3, l - m)) + ctx.g * (pow(tau1, l - n + 1) + pow(tau3, l - m + 1));
    Ok((ctx.prefactor * a_l, ctx.prefactor * b_l))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ZeroPhase {
    Window,
    Trivial,
}

fn zero_phase(params: &LatticeParams) -> Result<ZeroPhase> {
    params.validate()?;
    let (alpha, beta, t2) = (params.forward().abs(), params.backward().abs(), params.t2.abs());
    if alpha == 0.0 || beta == 0.0 {
        return Err(Error::Precondition("t1 = ±γ: Y3 or Y4 is infinite".into()));
    }
    if alpha < t2 && beta < t2 {
        Ok(ZeroPhase::Window)
    } else if alpha > t2 && beta > t2 {
        Ok(ZeroPhase::Trivial)
    } else {
        Err(Error::NoAnalyticForm(format!(
            "t1 = {} with |t1+γ| = {alpha}, |t1−γ| = {beta}, |t2| = {t2}: no closed-form zero mode",
            params.t1
        )))
    }
}

/// A–B zero mode inside the window `|t1 ± γ| < |t2|`:
/// `A_l/U_e = Y3 (−(t1−γ)/t2)^{l−m}` for `l > m` and
/// `B_l/U_e = Y4 (−(t1+γ)/t2)^{n−l}` for `l < n`, zero elsewhere.
pub fn zero_mode_ab(params: &LatticeParams, config: &CouplingConfig, l: usize) -> Result<(f64, f64)> {
    let g = require_equal_giant(config, LegMode::AB)?;
    if zero_phase(params)? != ZeroPhase::Window {
        return Err(Error::Precondition(format!(
            "t1 = {} is outside the zero-mode window of A–B coupling",
            params.t1
        )));
    }
    let l = check_cell(l)?;
    let (n, m) = (config.n as i64, config.m as i64);
    let (t2, alpha, beta) = (params.t2, params.forward(), params.backward());
    let a_l = if l > m { g / beta * pow(-beta / t2, l - m) } else { 0.0 };
    let b_l = if l < n { g / alpha * pow(-alpha / t2, n - l) } else { 0.0 };
    Ok((a_l, b_l))
}

/// `B_l/U_e` of the A–A zero mode (the A amplitudes vanish identically).
///
/// In the window the mode sits on B sites left of the far leg with prefactor
/// `+Y4` and base `−(t1+γ)/t2`; in the trivial phase it sits right of the
/// near leg with prefactor `−Y4` and base `−t2/(t1+γ)`. The strips
/// `t2−γ < |t1| < t2+γ` have no closed form.
pub fn zero_mode_aa(params: &LatticeParams, config: &CouplingConfig, l: usize) -> Result<f64> {
    let g = require_equal_giant(config, LegMode::AA)?;
    let phase = zero_phase(params)?;
    let l = check_cell(l)?;
    let (n, m) = (config.n.min(config.m) as i64, config.n.max(config.m) as i64);
    let (t2, alpha) = (params.t2, params.forward());
    let y4 = g / alpha;
    Ok(match phase {
        ZeroPhase::Window => {
            let base = -alpha / t2;
            let v = if l < n {
                pow(base, n - l) + pow(base, m - l)
            } else if l < m {
                pow(base, m - l)
            } else {
                0.0
            };
            y4 * v
        }
        ZeroPhase::Trivial => {
            let base = -t2 / alpha;
            let v = if l < n {
                0.0
            } else if l < m {
                pow(base, l - n)
            } else {
                pow(base, l - n) + pow(base, l - m)
            };
            -y4 * v
        }
    })
}

/// `f(k)` evaluated directly and through the expansion truncated at `p ≤ P`.
pub fn f_fourier_check(k: f64, ctx: &ClosedFormContext, truncation: usize) -> Result<(C64, C64)> {
    if !(ctx.a.abs() < 1.0 && ctx.b.abs() < 1.0) {
        return Err(Error::Precondition(format!(
            "expansion diverges: |a| = {}, |b| = {}",
            ctx.a.abs(),
            ctx.b.abs()
        )));
    }
    let ek = C64::from_polar(1.0, k);
    let direct = 1.0 / (ctx.x - (ctx.t1 + ctx.gamma) * ek - (ctx.t1 - ctx.gamma) * ek.conj());
    let mut series = C64::new(1.0, 0.0);
    let (mut ap, mut bp) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    for _ in 0..truncation {
        ap *= ctx.a * ek.conj();
        bp *= ctx.b * ek;
        series += ap + bp;
    }
    Ok((direct, ctx.prefactor * series))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Amplitudes relative to `U_e = 1`.
    Ratios,
    /// Unit norm over chain sites and the atom.
    UnitNorm,
}

/// Per-cell `(A_l, B_l)` and the atom amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeProfile {
    pub cells: Vec<(f64, f64)>,
    pub atom: f64,
    pub normalization: Normalization,
}

impl AmplitudeProfile {
    pub fn from_fn(cells: usize, mut f: impl FnMut(usize) -> Result<(f64, f64)>) -> Result<Self> {
        let cells = (1..=cells).map(&mut f).collect::<Result<Vec<_>>>()?;
        if cells.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::Linalg("closed-form profile is not finite".into()));
        }
        Ok(AmplitudeProfile {
            cells,
            atom: 1.0,
            normalization: Normalization::Ratios,
        })
    }

    pub fn norm(&self) -> f64 {
        (self.atom * self.atom + self.cells.iter().map(|(a, b)| a * a + b * b).sum::<f64>()).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let s = 1.0 / self.norm();
        AmplitudeProfile {
            cells: self.cells.iter().map(|(a, b)| (a * s, b * s)).collect(),
            atom: self.atom * s,
            normalization: Normalization::UnitNorm,
        }
    }

    /// Lays the profile out in the flat site order of a single-atom lattice.
    pub fn to_state_vector(&self) -> Array1<C64> {
        let ix = SiteIndexing::new(self.cells.len(), 1);
        let mut v = Array1::zeros(ix.dim());
        for (i, &(a, b)) in self.cells.iter().enumerate() {
            v[ix.site(Sublattice::A, i + 1)] = C64::new(a, 0.0);
            v[ix.site(Sublattice::B, i + 1)] = C64::new(b, 0.0);
        }
        v[ix.atom(0)] = C64::new(self.atom, 0.0);
        v
    }

    /// `(N, amplitude)` with `N` the 1-based flat site label, atom last.
    pub fn sites(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(2 * self.cells.len() + 1);
        for &(a, b) in &self.cells {
            out.push((out.len() + 1, a));
            out.push((out.len() + 1, b));
        }
        out.push((out.len() + 1, self.atom));
        out
    }
}

pub fn bound_profile(ctx: &ClosedFormContext, params: &LatticeParams, config: &CouplingConfig) -> Result<AmplitudeProfile> {
    match config.mode {
        LegMode::AB => AmplitudeProfile::from_fn(params.cells, |l| bound_amplitudes_ab(ctx, config, l)),
        LegMode::AA => AmplitudeProfile::from_fn(params.cells, |l| bound_amplitudes_aa(ctx, config, l)),
    }
}

pub fn zero_mode_profile(params: &LatticeParams, config: &CouplingConfig) -> Result<AmplitudeProfile> {
    match config.mode {
        LegMode::AB => AmplitudeProfile::from_fn(params.cells, |l| zero_mode_ab(params, config, l)),
        LegMode::AA => AmplitudeProfile::from_fn(params.cells, |l| Ok((0.0, zero_mode_aa(params, config, l)?))),
    }
}

/// `|⟨u|v⟩| / (‖u‖ ‖v‖)`.
pub fn fidelity(u: ArrayView1<C64>, v: ArrayView1<C64>) -> f64 {
    let dot: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    let nu = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    dot.norm() / (nu * nv)
}
