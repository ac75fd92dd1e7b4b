//! Single-excitation real-time evolution `ψ(t) = e^{−iHt} ψ(0)` and the
//! Lyapunov exponent along space-time paths.
//!
//! Non-Hermitian amplification makes `‖ψ‖` grow like `e^{λ_max t}`, so the
//! propagators keep the state unit-normalized and carry `log‖ψ‖` separately.

use std::f64::consts::FRAC_1_SQRT_2;

use ndarray::{Array1, Array2};
use ndarray_linalg::{FactorizeInto, Solve};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{HamiltonianMatrix, SiteIndexing, SparseMatrix, Sublattice, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const MINUS_I: C64 = C64::new(0.0, -1.0);

/// Amplitudes below this are floored before taking the logarithm.
pub const AMPLITUDE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stepper {
    /// Truncated Taylor series of `e^{−iHΔ}` applied to the vector with
    /// `‖H‖_∞ Δ ≤ 1`. Sparse and accurate component by component.
    ScaledTaylor,
    /// Dense degree-13 Padé exponential with scaling and squaring.
    DensePade,
    /// Dormand–Prince 5(4) with step control.
    AdaptiveRk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    pub t_final: f64,
    pub stepper: Stepper,
    /// Upper bound on the step; `None` picks `1/‖H‖_∞`.
    pub dt: Option<f64>,
    /// Local error target of the adaptive stepper.
    pub tolerance: f64,
    /// Cells kept clear between the furthest path point and a leg or the
    /// antipode of the source.
    pub margin_cells: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            t_final: 50.0,
            stepper: Stepper::ScaledTaylor,
            dt: None,
            tolerance: 1e-12,
            margin_cells: 10,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::invalid("t_final", "must be finite and non-negative"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::invalid("dt", "must be positive"));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance", "must be positive"));
        }
        Ok(())
    }
}

/// `ψ(t) = e^{log_scale} · psi` with `‖psi‖ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogState {
    pub t: f64,
    pub psi: Array1<C64>,
    pub log_scale: f64,
}

impl LogState {
    pub fn new(psi0: &Array1<C64>) -> Result<Self> {
        let mut s = LogState {
            t: 0.0,
            psi: psi0.clone(),
            log_scale: 0.0,
        };
        if !s.renormalize() {
            return Err(Error::invalid("psi0", "must be finite and nonzero"));
        }
        Ok(s)
    }

    fn renormalize(&mut self) -> bool {
        let n = norm(&self.psi);
        if !(n > 0.0 && n.is_finite()) {
            return false;
        }
        self.psi.mapv_inplace(|z| z / n);
        self.log_scale += n.ln();
        true
    }

    /// `log |ψ_i(t)|`, floored at `ln 1e-300` of the normalized amplitude.
    pub fn log_amplitude(&self, i: usize) -> (f64, bool) {
        let a = self.psi[i].norm();
        if a < AMPLITUDE_FLOOR {
            (AMPLITUDE_FLOOR.ln() + self.log_scale, true)
        } else {
            (a.ln() + self.log_scale, false)
        }
    }

    pub fn to_linear(&self) -> Result<Array1<C64>> {
        if self.log_scale > 700.0 {
            return Err(Error::Overflow { time: self.t });
        }
        let s = self.log_scale.exp();
        Ok(self.psi.mapv(|z| z * s))
    }
}

fn norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_matrix(h: &Array2<C64>) -> Result<()> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::invalid("hamiltonian", "must be square and nonempty"));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("hamiltonian", "has non-finite entries"));
    }
    Ok(())
}

enum Engine {
    Taylor { h: SparseMatrix, order: usize },
    Pade { h: Array2<C64> },
    Rk { h: SparseMatrix },
}

/// Evolves `state` to `t_end`, renormalizing after every step.
struct Propagator {
    engine: Engine,
    max_dt: f64,
    tolerance: f64,
}

impl Propagator {
    fn new(h: &Array2<C64>, cfg: &EvolutionConfig) -> Result<Self> {
        check_matrix(h)?;
        cfg.validate()?;
        let sparse = SparseMatrix::from_dense(h);
        let hn = sparse.norm_inf();
        let natural = if hn > 0.0 { 1.0 / hn } else { f64::INFINITY };
        let (engine, max_dt) = match cfg.stepper {
            Stepper::ScaledTaylor => {
                let max_dt = cfg.dt.map_or(natural, |dt| dt.min(natural));
                // With θ = ‖H‖Δ ≤ 1 the remainder is below θ^{K+1}/(K+1)! < 1e-30.
                let theta = if max_dt.is_finite() { hn * max_dt } else { 0.0 };
                let mut order = 1;
                let mut term = theta;
                while term > 1e-30 && order < 60 {
                    order += 1;
                    term *= theta / order as f64;
                }
                (Engine::Taylor { h: sparse, order }, max_dt)
            }
            // Unit steps keep the dense propagator far from overflow.
            Stepper::DensePade => (Engine::Pade { h: h.clone() }, cfg.dt.unwrap_or(1.0)),
            Stepper::AdaptiveRk => (Engine::Rk { h: sparse }, cfg.dt.unwrap_or(f64::INFINITY)),
        };
        Ok(Propagator {
            engine,
            max_dt,
            tolerance: cfg.tolerance,
        })
    }

    fn advance(&self, state: &mut LogState, t_end: f64) -> Result<()> {
        let span = t_end - state.t;
        if span < 0.0 {
            return Err(Error::invalid("times", "must be non-decreasing"));
        }
        if span == 0.0 {
            return Ok(());
        }
        match &self.engine {
            Engine::Taylor { h, order } => {
                let steps = (span / self.max_dt).ceil().max(1.0) as usize;
                let dt = span / steps as f64;
                let mut work = Taylor::new(h.dim);
                for j in 0..steps {
                    work.step(h, *order, dt, &mut state.psi);
                    state.t = if j + 1 == steps { t_end } else { state.t + dt };
                    if !state.renormalize() {
                        return Err(Error::Overflow { time: state.t });
                    }
                }
            }
            Engine::Pade { h } => {
                let steps = (span / self.max_dt).ceil().max(1.0) as usize;
                let dt = span / steps as f64;
                let u = expm(&h.mapv(|z| z * MINUS_I * dt))?;
                for j in 0..steps {
                    state.psi = u.dot(&state.psi);
                    state.t = if j + 1 == steps { t_end } else { state.t + dt };
                    if !state.renormalize() {
                        return Err(Error::Overflow { time: state.t });
                    }
                }
            }
            Engine::Rk { h } => dormand_prince(h, state, t_end, self.max_dt, self.tolerance)?,
        }
        Ok(())
    }
}

struct Taylor {
    term: Vec<C64>,
    next: Vec<C64>,
}

impl Taylor {
    fn new(dim: usize) -> Self {
        Taylor {
            term: vec![ZERO; dim],
            next: vec![ZERO; dim],
        }
    }

    fn step(&mut self, h: &SparseMatrix, order: usize, dt: f64, psi: &mut Array1<C64>) {
        let psi = psi.as_slice_mut().expect("contiguous state");
        self.term.copy_from_slice(psi);
        for j in 1..=order {
            h.apply(&self.term, &mut self.next);
            let c = MINUS_I * (dt / j as f64);
            for (t, n) in self.term.iter_mut().zip(&self.next) {
                *t = c * n;
            }
            for (p, t) in psi.iter_mut().zip(&self.term) {
                *p += t;
            }
        }
    }
}

fn rhs(h: &SparseMatrix, y: &[C64], out: &mut [C64]) {
    h.apply(y, out);
    for o in out.iter_mut() {
        *o *= MINUS_I;
    }
}

fn dormand_prince(h: &SparseMatrix, state: &mut LogState, t_end: f64, max_dt: f64, tol: f64) -> Result<()> {
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let dim = h.dim;
    let mut k = vec![vec![ZERO; dim]; 7];
    let mut ytmp = vec![ZERO; dim];
    let hn = h.norm_inf().max(1e-300);
    let mut dt = (0.1 / hn).min(max_dt).min(t_end - state.t);
    rhs(h, state.psi.as_slice().expect("contiguous"), &mut k[0]);
    let mut rejected = 0usize;
    while state.t < t_end {
        dt = dt.min(t_end - state.t);
        let y = state.psi.as_slice().expect("contiguous").to_vec();
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        acc += kj[i] * (dt * A[s][j]);
                    }
                }
                ytmp[i] = acc;
            }
            rhs(h, &ytmp, &mut k[s]);
        }
        // The last stage is evaluated at the 5th-order solution, which is
        // still in `ytmp` and doubles as the first stage of the next step.
        let mut err: f64 = 0.0;
        for i in 0..dim {
            let mut e = ZERO;
            for (j, kj) in k.iter().enumerate() {
                e += kj[i] * E[j];
            }
            err = err.max((e * dt).norm());
        }
        // The state is unit-normalized, so the error is absolute in units of ‖ψ‖.
        let ratio = err / tol;
        if ratio <= 1.0 {
            for (p, &z) in state.psi.iter_mut().zip(&ytmp) {
                *p = z;
            }
            state.t = if t_end - state.t - dt <= 1e-14 * t_end.max(1.0) { t_end } else { state.t + dt };
            let before = state.log_scale;
            if !state.renormalize() {
                return Err(Error::Overflow { time: state.t });
            }
            let s = (state.log_scale - before).exp();
            let last: Vec<C64> = k[6].iter().map(|z| z / s).collect();
            k[0] = last;
            rejected = 0;
        } else {
            rejected += 1;
            if rejected > 50 || dt < 1e-14 {
                return Err(Error::Convergence {
                    dim,
                    frobenius: 0.0,
                    max_abs: err,
                    detail: format!("adaptive step collapsed at t = {}", state.t),
                });
            }
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        dt = (dt * factor).min(max_dt);
    }
    Ok(())
}

/// Dense `e^A` by degree-13 Padé approximation with scaling and squaring.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    check_matrix(a)?;
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm1 = (0..n).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm1 > THETA13 { (norm1 / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.mapv(|z| z * 0.5f64.powi(s));
    let ident = Array2::<C64>::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let r = |c: f64| C64::new(c, 0.0);
    let inner_u = &a6 * r(B[13]) + &a4 * r(B[11]) + &a2 * r(B[9]);
    let u = a.dot(&(a6.dot(&inner_u) + &a6 * r(B[7]) + &a4 * r(B[5]) + &a2 * r(B[3]) + &ident * r(B[1])));
    let inner_v = &a6 * r(B[12]) + &a4 * r(B[10]) + &a2 * r(B[8]);
    let v = a6.dot(&inner_v) + &a6 * r(B[6]) + &a4 * r(B[4]) + &a2 * r(B[2]) + &ident * r(B[0]);
    let p = &v + &u;
    let q = &v - &u;
    let lu = q
        .factorize_into()
        .map_err(|e| Error::Linalg(format!("Padé denominator is singular: {e}")))?;
    let mut out = Array2::<C64>::zeros((n, n));
    for j in 0..n {
        let col = lu
            .solve(&p.column(j).to_owned())
            .map_err(|e| Error::Linalg(format!("Padé denominator solve failed: {e}")))?;
        out.column_mut(j).assign(&col);
    }
    for _ in 0..s {
        out = out.dot(&out);
    }
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Overflow { time: f64::NAN });
    }
    Ok(out)
}

/// Unit excitation split equally over `A` and `B` of the center cell
/// `(L+1)/2`.
pub fn initial_bulk_state(indexing: &SiteIndexing) -> Result<Array1<C64>> {
    let cells = indexing.cells;
    if cells % 2 == 0 {
        return Err(Error::invalid("L", format!("center cell needs odd L, got {cells}")));
    }
    let c = center_cell(cells);
    let mut psi = Array1::zeros(indexing.dim());
    psi[indexing.a(c)] = C64::new(FRAC_1_SQRT_2, 0.0);
    psi[indexing.b(c)] = C64::new(FRAC_1_SQRT_2, 0.0);
    Ok(psi)
}

pub fn center_cell(cells: usize) -> usize {
    (cells + 1) / 2
}

/// `e^{−iHt} ψ0` without renormalization.
pub fn evolve(h: &Array2<C64>, psi0: &Array1<C64>, t: f64, cfg: &EvolutionConfig) -> Result<Array1<C64>> {
    evolve_log(h, psi0, &[t], cfg)?.remove(0).to_linear()
}

/// Snapshots of the log-domain state at the given non-decreasing times.
pub fn evolve_log(h: &Array2<C64>, psi0: &Array1<C64>, times: &[f64], cfg: &EvolutionConfig) -> Result<Vec<LogState>> {
    if psi0.len() != h.nrows() {
        return Err(Error::invalid("psi0", "length does not match the Hamiltonian"));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::invalid("times", "must be finite and non-negative"));
    }
    let prop = Propagator::new(h, cfg)?;
    let mut state = LogState::new(psi0)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        prop.advance(&mut state, t)?;
        out.push(state.clone());
    }
    Ok(out)
}

/// Path offset `round(v t)`; exact half-integers round toward zero.
pub fn path_offset(v: f64, t: f64) -> i64 {
    let x = v * t;
    let a = x.abs();
    let frac = a - a.floor();
    let r = if (frac - 0.5).abs() <= 1e-9 { a.floor() } else { a.round() };
    (x.signum() * r) as i64
}

/// `n_v` uniform points over `[lo, hi]`.
pub fn v_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect(),
    }
}

pub fn default_v_grid() -> Vec<f64> {
    v_grid(-2.0, 2.0, 81)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCurve {
    pub v_grid: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Points where the amplitude hit [`AMPLITUDE_FLOOR`].
    pub floored: Vec<bool>,
    pub t_obs: f64,
    pub channel: Sublattice,
}

impl LyapunovCurve {
    /// Grid velocity of the largest `λ`; ties go to the smaller `|v|`.
    pub fn argmax(&self) -> f64 {
        let mut best = 0;
        for j in 1..self.lambda.len() {
            let (a, b) = (self.lambda[j], self.lambda[best]);
            if a > b || (a == b && self.v_grid[j].abs() < self.v_grid[best].abs()) {
                best = j;
            }
        }
        self.v_grid[best]
    }

    pub fn is_finite(&self) -> bool {
        self.lambda.iter().all(|x| x.is_finite())
    }
}

fn ring_distance(a: usize, b: usize, cells: usize) -> usize {
    let d = a.abs_diff(b) % cells;
    d.min(cells - d)
}

/// Rejects grids whose furthest path point (plus the margin) reaches a leg
/// cell or wraps half-way around the ring.
fn check_paths(h: &HamiltonianMatrix, v_grid: &[f64], t_obs: f64, margin: usize) -> Result<()> {
    let cells = h.indexing.cells;
    let c = center_cell(cells);
    let reach = v_grid.iter().map(|&v| path_offset(v, t_obs).unsigned_abs() as usize).max().unwrap_or(0);
    let half = (cells - 1) / 2;
    if reach + margin > half {
        return Err(Error::Precondition(format!(
            "path reaches {reach} cells (+{margin} margin) on a ring with (L−1)/2 = {half}"
        )));
    }
    for (_, leg) in h.legs() {
        let d = ring_distance(c, leg, cells);
        if reach + margin >= d {
            return Err(Error::Precondition(format!(
                "path reaches {reach} cells (+{margin} margin) but a leg sits {d} cells from the source"
            )));
        }
    }
    Ok(())
}

/// `λ(v) = log|ψ_{c+round(v t)}(t)| / t` on every requested observation time,
/// read off a single trajectory started from [`initial_bulk_state`].
pub fn lyapunov_multi(
    h: &HamiltonianMatrix,
    v_grid: &[f64],
    t_obs: &[f64],
    channel: Sublattice,
    cfg: &EvolutionConfig,
) -> Result<Vec<LyapunovCurve>> {
    if v_grid.is_empty() {
        return Err(Error::invalid("v_grid", "must not be empty"));
    }
    if v_grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("v_grid", "must be finite"));
    }
    for w in t_obs.windows(2) {
        if w[1] < w[0] {
            return Err(Error::invalid("t_obs", "must be non-decreasing"));
        }
    }
    if t_obs.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::invalid("t_obs", "must be positive"));
    }
    for &t in t_obs {
        check_paths(h, v_grid, t, cfg.margin_cells)?;
    }
    let psi0 = initial_bulk_state(&h.indexing)?;
    let states = evolve_log(&h.matrix, &psi0, t_obs, cfg)?;
    let cells = h.indexing.cells as i64;
    let c = center_cell(h.indexing.cells) as i64;
    Ok(states
        .iter()
        .map(|st| {
            let (mut lambda, mut floored) = (Vec::new(), Vec::new());
            for &v in v_grid {
                let cell = (c - 1 + path_offset(v, st.t)).rem_euclid(cells) as usize + 1;
                let site = h.indexing.site(channel, cell);
                let (la, f) = st.log_amplitude(site);
                lambda.push(la / st.t);
                floored.push(f);
            }
            LyapunovCurve {
                v_grid: v_grid.to_vec(),
                lambda,
                floored,
                t_obs: st.t,
                channel,
            }
        })
        .collect())
}

pub fn lyapunov(
    h: &HamiltonianMatrix,
    v_grid: &[f64],
    t_obs: f64,
    channel: Sublattice,
    cfg: &EvolutionConfig,
) -> Result<LyapunovCurve> {
    Ok(lyapunov_multi(h, v_grid, &[t_obs], channel, cfg)?.remove(0))
}
