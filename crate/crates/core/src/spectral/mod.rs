//! Exact diagonalization, band structure and state classification.

mod bands;
mod energy;
mod winding;

pub use bands::{band_hull, classify_states, dispersion, dispersion_sample, BandHull, Classification, DispersionSample, StateClass, StateLabel};
pub use energy::{
    energy_residual_aa, energy_residual_ab, energy_rhs_aa, energy_rhs_ab, zero_mode_selfenergy_closed,
    POLE_TOLERANCE,
};
pub use winding::{winding_number, Winding};

use ndarray::{Array1, Array2, ArrayView1};
use ndarray_linalg::{Eig, Inverse, SVD};

use crate::error::{Error, Result};
use crate::model::{HamiltonianMatrix, C64};

/// Largest matrix the dense solver accepts by default.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Tolerance on `max |⟨L_p|R_q⟩ − δ_pq|` for accepted left eigenvectors.
pub const BIORTHOGONAL_TOLERANCE: f64 = 1e-8;

/// Full eigensystem of a (generally non-Hermitian) matrix.
///
/// Eigenvalues are sorted by real part, then imaginary part. Right
/// eigenvectors are the columns of `right`, each scaled to unit 2-norm with
/// its largest-modulus component made real and positive. When present,
/// `left` holds left eigenvectors as columns normalized so that
/// `left[:, p]† · right[:, q] = δ_pq`.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<C64>,
    pub right: Array2<C64>,
    pub left: Option<Array2<C64>>,
    /// Set when the right eigenvector matrix was numerically singular and a
    /// pseudo-inverse had to be used for the left vectors.
    pub biorthogonal_fallback: bool,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn right_vector(&self, q: usize) -> ArrayView1<'_, C64> {
        self.right.column(q)
    }

    /// Index of the eigenvalue with the smallest modulus.
    pub fn closest_to_zero(&self) -> Option<usize> {
        (0..self.len()).min_by(|&a, &b| self.eigenvalues[a].norm().total_cmp(&self.eigenvalues[b].norm()))
    }

    pub fn min_abs(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.norm()).fold(f64::INFINITY, f64::min)
    }

    /// `max_q ‖H v_q − E_q v_q‖` for the unit-norm right eigenvectors.
    pub fn max_residual(&self, h: &Array2<C64>) -> f64 {
        let hv = h.dot(&self.right);
        let mut worst: f64 = 0.0;
        for (q, e) in self.eigenvalues.iter().enumerate() {
            let r = (&hv.column(q) - &self.right.column(q).mapv(|z| z * e))
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        worst
    }

    /// `max |⟨L_p|R_q⟩ − δ_pq|`, `None` without left vectors.
    pub fn biorthogonality_defect(&self) -> Option<f64> {
        self.left.as_ref().map(|l| identity_defect(&l.t().mapv(|z| z.conj()).dot(&self.right)))
    }
}

fn identity_defect(m: &Array2<C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for ((i, j), z) in m.indexed_iter() {
        let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        worst = worst.max((z - target).norm());
    }
    worst
}

/// Spectral 2-norm upper bound used to scale residual tolerances.
pub fn frobenius_norm(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn eigendecompose(h: &HamiltonianMatrix, want_left: bool) -> Result<SpectrumResult> {
    eigendecompose_matrix(&h.matrix, want_left, DEFAULT_MAX_DIM)
}

pub fn eigendecompose_matrix(m: &Array2<C64>, want_left: bool, max_dim: usize) -> Result<SpectrumResult> {
    let dim = m.nrows();
    if dim != m.ncols() {
        return Err(Error::invalid("H", format!("matrix is {}x{}, not square", dim, m.ncols())));
    }
    if dim == 0 {
        return Err(Error::invalid("H", "empty matrix"));
    }
    if dim > max_dim {
        return Err(Error::invalid("H", format!("dimension {dim} exceeds the dense limit {max_dim}")));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("H", "matrix has non-finite entries"));
    }
    let (vals, vecs) = m.eig().map_err(|e| Error::Convergence {
        dim,
        frobenius: frobenius_norm(m),
        max_abs: m.iter().map(|z| z.norm()).fold(0.0, f64::max),
        detail: e.to_string(),
    })?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        vals[a]
            .re
            .total_cmp(&vals[b].re)
            .then(vals[a].im.total_cmp(&vals[b].im))
    });
    let eigenvalues: Vec<C64> = order.iter().map(|&q| vals[q]).collect();
    let mut right = Array2::<C64>::zeros((dim, dim));
    for (dst, &src) in order.iter().enumerate() {
        let col = normalize_column(vecs.column(src).to_owned());
        right.column_mut(dst).assign(&col);
    }

    let (left, biorthogonal_fallback) = if want_left {
        let (l, fallback) = left_from_right(&right)?;
        (Some(l), fallback)
    } else {
        (None, false)
    };
    let out = SpectrumResult {
        eigenvalues,
        right,
        left,
        biorthogonal_fallback,
    };
    if let Some(dev) = out.biorthogonality_defect() {
        if !(dev <= BIORTHOGONAL_TOLERANCE) {
            return Err(Error::Biorthogonalization {
                deviation: dev,
                detail: if out.biorthogonal_fallback {
                    "right eigenvectors are numerically dependent (near-defective spectrum); pseudo-inverse used".into()
                } else {
                    "right eigenvector matrix is ill-conditioned".into()
                },
            });
        }
    }
    Ok(out)
}

fn normalize_column(mut v: Array1<C64>) -> Array1<C64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut pivot = 0;
    let mut best = -1.0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best {
            best = z.norm();
            pivot = i;
        }
    }
    let phase = if best > 0.0 { v[pivot].conj() / v[pivot].norm() } else { C64::new(1.0, 0.0) };
    let scale = phase / norm;
    v.mapv_inplace(|z| z * scale);
    v
}

/// Entries of `R⁻¹` beyond this mark `R` as numerically singular.
const SINGULAR_INVERSE: f64 = 1e14;

/// Left eigenvectors as the conjugate-transposed rows of `R⁻¹`.
fn left_from_right(right: &Array2<C64>) -> Result<(Array2<C64>, bool)> {
    if let Ok(inv) = right.inv() {
        if inv.iter().all(|z| z.re.is_finite() && z.im.is_finite() && z.norm() < SINGULAR_INVERSE) {
            return Ok((inv.t().mapv(|z| z.conj()), false));
        }
    }
    Ok((pseudo_inverse(right)?.t().mapv(|z| z.conj()), true))
}

fn pseudo_inverse(m: &Array2<C64>) -> Result<Array2<C64>> {
    let (u, s, vt) = m.svd(true, true).map_err(|e| Error::Linalg(e.to_string()))?;
    let (u, vt) = (u.expect("requested U"), vt.expect("requested Vᵀ"));
    let cutoff = s.iter().cloned().fold(0.0, f64::max) * (m.nrows() as f64) * f64::EPSILON;
    let n = m.nrows();
    let mut out = Array2::<C64>::zeros((n, n));
    for (k, &sk) in s.iter().enumerate() {
        if sk <= cutoff {
            continue;
        }
        for i in 0..n {
            let vik = vt[[k, i]].conj() / sk;
            for j in 0..n {
                out[[i, j]] += vik * u[[j, k]].conj();
            }
        }
    }
    Ok(out)
}
