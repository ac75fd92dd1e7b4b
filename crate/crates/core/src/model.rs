//! Real-space single-excitation Hamiltonians.
//!
//! Site ordering is fixed once here and referenced everywhere else through
//! [`SiteIndexing`]: cells are numbered `1..=L`, sublattice `A_l` sits at
//! zero-based flat index `2(l-1)`, `B_l` at `2l-1`, and atom levels are
//! appended after the `2L` chain sites. In the one-based labelling used for
//! exported profiles this is `A_l -> 2l-1`, `B_l -> 2l`, giant atom `-> 2L+1`.
//!
//! Matrix entries follow `H[i][j] = coefficient of c†_i c_j`, so the
//! intracell hopping gives `H[A_l][B_l] = t1 + γ` and `H[B_l][A_l] = t1 − γ`.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Chain parameters shared by every model variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeParams {
    /// Number of unit cells.
    #[serde(rename = "L")]
    pub cells: usize,
    pub t1: f64,
    pub t2: f64,
    pub gamma: f64,
    /// Gain/loss amplitude, only read by [`Variant::GainLoss`].
    #[serde(default)]
    pub delta: f64,
}

impl LatticeParams {
    pub fn new(cells: usize, t1: f64, t2: f64, gamma: f64) -> Result<Self> {
        let p = LatticeParams {
            cells,
            t1,
            t2,
            gamma,
            delta: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_t1(mut self, t1: f64) -> Self {
        self.t1 = t1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells < 2 {
            return Err(Error::invalid("L", format!("need at least 2 cells, got {}", self.cells)));
        }
        for (field, v) in [
            ("t1", self.t1),
            ("t2", self.t2),
            ("gamma", self.gamma),
            ("delta", self.delta),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(field, "must be finite"));
            }
        }
        if self.t2 == 0.0 {
            return Err(Error::invalid("t2", "intercell hopping must be nonzero"));
        }
        Ok(())
    }

    /// Forward intracell hopping `t1 + γ` (B_l → A_l amplitude in `H[A][B]`).
    pub fn forward(&self) -> f64 {
        self.t1 + self.gamma
    }

    /// Backward intracell hopping `t1 − γ`.
    pub fn backward(&self) -> f64 {
        self.t1 - self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Emitter {
    GiantAtom,
    TwoSmallAtoms,
    NoAtom,
}

/// Which sublattices the two legs attach to: `A_n` and `B_m` (AB) or
/// `A_n` and `A_m` (AA).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LegMode {
    AB,
    AA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Nonreciprocal intracell hopping `t1 ± γ`.
    Nonreciprocal,
    /// Reciprocal hopping with `+iδ` on A sites and `−iδ` on B sites.
    GainLoss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

/// Emitter geometry and couplings. Cell indices are one-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub emitter: Emitter,
    pub mode: LegMode,
    /// Cell of the left leg (always on sublattice A).
    pub n: usize,
    /// Cell of the right leg (B for AB, A for AA).
    pub m: usize,
    pub g_n: f64,
    pub g_m: f64,
}

impl CouplingConfig {
    pub fn giant(mode: LegMode, n: usize, m: usize, g: f64) -> Self {
        CouplingConfig {
            emitter: Emitter::GiantAtom,
            mode,
            n,
            m,
            g_n: g,
            g_m: g,
        }
    }

    pub fn two_small(mode: LegMode, n: usize, m: usize, g: f64) -> Self {
        CouplingConfig {
            emitter: Emitter::TwoSmallAtoms,
            ..Self::giant(mode, n, m, g)
        }
    }

    pub fn none() -> Self {
        CouplingConfig {
            emitter: Emitter::NoAtom,
            mode: LegMode::AB,
            n: 1,
            m: 1,
            g_n: 0.0,
            g_m: 0.0,
        }
    }

    pub fn with_strengths(mut self, g_n: f64, g_m: f64) -> Self {
        self.g_n = g_n;
        self.g_m = g_m;
        self
    }

    pub fn atom_levels(&self) -> usize {
        match self.emitter {
            Emitter::GiantAtom => 1,
            Emitter::TwoSmallAtoms => 2,
            Emitter::NoAtom => 0,
        }
    }

    /// Signed cell separation `d = m − n`.
    pub fn separation(&self) -> i64 {
        self.m as i64 - self.n as i64
    }

    /// Sublattice of the right leg.
    pub fn right_leg(&self) -> Sublattice {
        match self.mode {
            LegMode::AB => Sublattice::B,
            LegMode::AA => Sublattice::A,
        }
    }

    /// The two leg sites as `(sublattice, cell)` pairs, left leg first.
    pub fn legs(&self) -> [(Sublattice, usize); 2] {
        [(Sublattice::A, self.n), (self.right_leg(), self.m)]
    }

    /// `n == m` is allowed: both legs inside the same cell.
    pub fn validate(&self, cells: usize) -> Result<()> {
        if self.emitter == Emitter::NoAtom {
            return Ok(());
        }
        if self.n < 1 || self.n > cells {
            return Err(Error::invalid("n", format!("leg cell {} outside 1..={cells}", self.n)));
        }
        if self.m < 1 || self.m > cells {
            return Err(Error::invalid("m", format!("leg cell {} outside 1..={cells}", self.m)));
        }
        if self.n > self.m {
            return Err(Error::invalid("n", format!("left leg n = {} exceeds m = {}", self.n, self.m)));
        }
        if !self.g_n.is_finite() {
            return Err(Error::invalid("g_n", "must be finite"));
        }
        if !self.g_m.is_finite() {
            return Err(Error::invalid("g_m", "must be finite"));
        }
        Ok(())
    }
}

/// A decoded flat index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    Chain(Sublattice, usize),
    /// Atom level, zero-based (giant atom and small atom #1 are level 0).
    Atom(usize),
}

/// Cell/sublattice ↔ flat index map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteIndexing {
    pub cells: usize,
    pub atoms: usize,
}

impl SiteIndexing {
    pub fn new(cells: usize, atoms: usize) -> Self {
        SiteIndexing { cells, atoms }
    }

    pub fn dim(&self) -> usize {
        2 * self.cells + self.atoms
    }

    pub fn chain_dim(&self) -> usize {
        2 * self.cells
    }

    /// Zero-based flat index of `A_cell` (`cell` one-based).
    pub fn a(&self, cell: usize) -> usize {
        debug_assert!(cell >= 1 && cell <= self.cells);
        2 * (cell - 1)
    }

    pub fn b(&self, cell: usize) -> usize {
        debug_assert!(cell >= 1 && cell <= self.cells);
        2 * cell - 1
    }

    pub fn site(&self, sub: Sublattice, cell: usize) -> usize {
        match sub {
            Sublattice::A => self.a(cell),
            Sublattice::B => self.b(cell),
        }
    }

    pub fn atom(&self, level: usize) -> usize {
        debug_assert!(level < self.atoms);
        2 * self.cells + level
    }

    /// One-based label `N` used in exported profiles.
    pub fn label(&self, flat: usize) -> usize {
        flat + 1
    }

    pub fn locate(&self, flat: usize) -> Option<Site> {
        if flat < 2 * self.cells {
            let cell = flat / 2 + 1;
            let sub = if flat % 2 == 0 { Sublattice::A } else { Sublattice::B };
            Some(Site::Chain(sub, cell))
        } else if flat < self.dim() {
            Some(Site::Atom(flat - 2 * self.cells))
        } else {
            None
        }
    }

    /// Wrap a possibly out-of-range cell number onto `1..=L`.
    pub fn wrap_cell(&self, cell: i64) -> usize {
        (cell - 1).rem_euclid(self.cells as i64) as usize + 1
    }
}

/// Dense single-excitation Hamiltonian together with its construction
/// metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub matrix: Array2<C64>,
    pub boundary: Boundary,
    pub variant: Variant,
    pub indexing: SiteIndexing,
    pub coupling: CouplingConfig,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Leg sites `(sublattice, cell)` of the attached emitter, empty when
    /// no atom is present.
    pub fn legs(&self) -> Vec<(Sublattice, usize)> {
        match self.coupling.emitter {
            Emitter::NoAtom => Vec::new(),
            _ => self.coupling.legs().to_vec(),
        }
    }

    /// `max_ij |H_ij − conj(H_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let h = &self.matrix;
        let n = h.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((h[[i, j]] - h[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// Row-major sparse view used by the time steppers.
    pub fn to_sparse(&self) -> SparseMatrix {
        SparseMatrix::from_dense(&self.matrix)
    }

    /// JSON dump: `{"dim", "boundary", "variant", "rows": [[[re, im], ...], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<[f64; 2]>> = self
            .matrix
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        serde_json::json!({
            "dim": self.dim(),
            "boundary": self.boundary,
            "variant": self.variant,
            "rows": rows,
        })
    }
}

/// Compressed-row matrix; only what the steppers need.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pub dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseMatrix {
    pub fn from_dense(m: &Array2<C64>) -> Self {
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for j in 0..m.ncols() {
                let z = m[[i, j]];
                if z != ZERO {
                    cols.push(j);
                    vals.push(z);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseMatrix {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `out = self · x`.
    pub fn apply(&self, x: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[p] * x[self.cols[p]];
            }
            *o = acc;
        }
    }

    /// Maximum absolute row sum (the induced ∞-norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                self.vals[self.row_ptr[i]..self.row_ptr[i + 1]]
                    .iter()
                    .map(|z| z.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

fn chain_block(params: &LatticeParams, boundary: Boundary, variant: Variant, extra: usize) -> Array2<C64> {
    let idx = SiteIndexing::new(params.cells, extra);
    let mut h = Array2::<C64>::zeros((idx.dim(), idx.dim()));
    let (fwd, bwd) = match variant {
        Variant::Nonreciprocal => (params.forward(), params.backward()),
        Variant::GainLoss => (params.t1, params.t1),
    };
    let l_max = params.cells;
    for l in 1..=l_max {
        let (a, b) = (idx.a(l), idx.b(l));
        h[[a, b]] += C64::new(fwd, 0.0);
        h[[b, a]] += C64::new(bwd, 0.0);
        let next = if l < l_max {
            Some(l + 1)
        } else if boundary == Boundary::Periodic {
            Some(1)
        } else {
            None
        };
        if let Some(l2) = next {
            let a2 = idx.a(l2);
            h[[a2, b]] += C64::new(params.t2, 0.0);
            h[[b, a2]] += C64::new(params.t2, 0.0);
        }
        if variant == Variant::GainLoss {
            h[[a, a]] += C64::new(0.0, params.delta);
            h[[b, b]] -= C64::new(0.0, params.delta);
        }
    }
    h
}

/// Bare nonreciprocal SSH chain, dimension `2L`.
pub fn build_ssh(params: &LatticeParams, boundary: Boundary) -> Result<HamiltonianMatrix> {
    params.validate()?;
    Ok(HamiltonianMatrix {
        matrix: chain_block(params, boundary, Variant::Nonreciprocal, 0),
        boundary,
        variant: Variant::Nonreciprocal,
        indexing: SiteIndexing::new(params.cells, 0),
        coupling: CouplingConfig::none(),
    })
}

/// Reciprocal SSH chain with staggered gain and loss `±iδ`.
pub fn build_gain_loss_ssh(params: &LatticeParams, boundary: Boundary) -> Result<HamiltonianMatrix> {
    params.validate()?;
    Ok(HamiltonianMatrix {
        matrix: chain_block(params, boundary, Variant::GainLoss, 0),
        boundary,
        variant: Variant::GainLoss,
        indexing: SiteIndexing::new(params.cells, 0),
        coupling: CouplingConfig::none(),
    })
}

/// Chain plus emitter. The giant atom is one extra level coupled to both
/// legs; two small atoms are two extra levels, level 0 on the left leg and
/// level 1 on the right leg. Atom couplings are real and symmetric.
pub fn assemble(
    params: &LatticeParams,
    config: &CouplingConfig,
    boundary: Boundary,
    variant: Variant,
) -> Result<HamiltonianMatrix> {
    params.validate()?;
    config.validate(params.cells)?;
    let atoms = config.atom_levels();
    let indexing = SiteIndexing::new(params.cells, atoms);
    let mut h = chain_block(params, boundary, variant, atoms);
    let site_of = |(sub, cell): (Sublattice, usize)| indexing.site(sub, cell);
    let mut couple = |atom: usize, site: usize, g: f64| {
        h[[atom, site]] += C64::new(g, 0.0);
        h[[site, atom]] += C64::new(g, 0.0);
    };
    match config.emitter {
        Emitter::NoAtom => {}
        Emitter::GiantAtom => {
            let [left, right] = config.legs().map(site_of);
            let e = indexing.atom(0);
            couple(e, left, config.g_n);
            couple(e, right, config.g_m);
        }
        Emitter::TwoSmallAtoms => {
            let [left, right] = config.legs().map(site_of);
            couple(indexing.atom(0), left, config.g_n);
            couple(indexing.atom(1), right, config.g_m);
        }
    }
    Ok(HamiltonianMatrix {
        matrix: h,
        boundary,
        variant,
        indexing,
        coupling: *config,
    })
}
