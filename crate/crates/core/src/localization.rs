//! Localization diagnostics: averaged inverse participation ratio, the β
//! roots of the bulk transfer equation, and weight near the leg sites.

use ndarray::{s, Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{HamiltonianMatrix, LatticeParams, SiteIndexing, C64};
use crate::spectral::{eigendecompose_matrix, Classification, SpectrumResult, StateClass};

/// States whose chain weight falls below this are left out of the average.
pub const MIN_CHAIN_WEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IprReport {
    /// `None` for excluded states.
    pub per_state: Vec<Option<f64>>,
    pub average: f64,
    pub used: usize,
    pub excluded: Vec<usize>,
    pub include_atom: bool,
}

/// `IPR_q = Σ_N |ψ_N|⁴ / (Σ_N |ψ_N|²)²` over the `2L` chain sites (and the
/// atom levels when `include_atom`), averaged over every usable state.
pub fn ipr(spec: &SpectrumResult, cells: usize, include_atom: bool) -> Result<IprReport> {
    let dim = spec.right.nrows();
    if 2 * cells > dim {
        return Err(Error::invalid("cells", format!("2L = {} exceeds dimension {dim}", 2 * cells)));
    }
    let end = if include_atom { dim } else { 2 * cells };
    let mut per_state = Vec::with_capacity(spec.len());
    let mut excluded = Vec::new();
    let (mut sum, mut used) = (0.0, 0usize);
    for q in 0..spec.len() {
        let col = spec.right.column(q);
        let total: f64 = col.iter().map(|z| z.norm_sqr()).sum();
        let part = col.slice(s![..end]);
        let w2: f64 = part.iter().map(|z| z.norm_sqr()).sum();
        if !(w2 > MIN_CHAIN_WEIGHT * total) {
            per_state.push(None);
            excluded.push(q);
            continue;
        }
        let w4: f64 = part.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum();
        let value = w4 / (w2 * w2);
        sum += value;
        used += 1;
        per_state.push(Some(value));
    }
    if used == 0 {
        return Err(Error::Precondition("no state carries chain weight".into()));
    }
    Ok(IprReport {
        per_state,
        average: sum / used as f64,
        used,
        excluded,
        include_atom,
    })
}

/// Roots of `t2(t1+γ)β² − Δβ + t2(t1−γ) = 0`, `Δ = E² + γ² − t1² − t2²`,
/// ordered `|β1| ≥ |β2|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPair {
    pub delta: C64,
    pub beta1: C64,
    pub beta2: C64,
    /// Discriminant vanishes to rounding; the two roots coincide.
    pub degenerate: bool,
}

pub fn beta_of_energy(energy: C64, params: &LatticeParams) -> Result<BetaPair> {
    params.validate()?;
    let (t1, t2, gamma) = (params.t1, params.t2, params.gamma);
    let qa = t2 * params.forward();
    if qa == 0.0 {
        return Err(Error::Precondition("t1 = −γ: the β quadratic degenerates".into()));
    }
    let qc = t2 * params.backward();
    let delta = energy * energy + gamma * gamma - t1 * t1 - t2 * t2;
    let disc = delta * delta - 4.0 * t2 * t2 * (t1 * t1 - gamma * gamma);
    let mut root = disc.sqrt();
    if (delta.conj() * root).re < 0.0 {
        root = -root;
    }
    let scale = delta.norm_sqr() + (4.0 * qa * qc).abs();
    let degenerate = disc.norm() <= 1e-14 * scale;
    let (beta1, beta2) = if qc == 0.0 {
        (delta / qa, C64::new(0.0, 0.0))
    } else {
        let big = (delta + root) / (2.0 * qa);
        (big, qc / (qa * big))
    };
    let (beta1, beta2) = if beta1.norm() >= beta2.norm() { (beta1, beta2) } else { (beta2, beta1) };
    Ok(BetaPair { delta, beta1, beta2, degenerate })
}

/// `|t2(t1+γ)β² − Δβ + t2(t1−γ)|` for a candidate root.
pub fn beta_residual(beta: C64, delta: C64, params: &LatticeParams) -> f64 {
    let t2 = params.t2;
    (t2 * params.forward() * beta * beta - delta * beta + t2 * params.backward()).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaRow {
    pub q: usize,
    pub energy: C64,
    pub beta1_abs: f64,
    pub beta2_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaProfile {
    pub rows: Vec<BetaRow>,
    /// `{1, √|(t1−γ)/(t1+γ)|, |(t1−γ)/(t1+γ)|}`.
    pub reference: [f64; 3],
}

pub fn reference_lines(params: &LatticeParams) -> [f64; 3] {
    let r = (params.backward() / params.forward()).abs();
    [1.0, r.sqrt(), r]
}

/// `|β1|, |β2|` for every state of the requested class (ambiguous labels
/// skipped), in eigenvalue order.
pub fn beta_profile(
    spec: &SpectrumResult,
    params: &LatticeParams,
    classes: &Classification,
    filter: StateClass,
) -> Result<BetaProfile> {
    let mut rows = Vec::new();
    for q in classes.indices(filter) {
        let e = spec.eigenvalues[q];
        let pair = beta_of_energy(e, params)?;
        rows.push(BetaRow {
            q,
            energy: e,
            beta1_abs: pair.beta1.norm(),
            beta2_abs: pair.beta2.norm(),
        });
    }
    Ok(BetaProfile {
        rows,
        reference: reference_lines(params),
    })
}

/// Per-cell growth factor `e^s` of a least-squares fit
/// `log √(|A_l|² + |B_l|²) ≈ c + s·l` over `cells` (1-based, inclusive).
/// A cross-check on the β assignment, not a replacement for it.
pub fn decay_fit(vector: ArrayView1<C64>, indexing: &SiteIndexing, cells: std::ops::RangeInclusive<usize>) -> Result<f64> {
    let pts: Vec<(f64, f64)> = cells
        .map(|l| {
            let w = vector[indexing.a(l)].norm_sqr() + vector[indexing.b(l)].norm_sqr();
            (l as f64, 0.5 * w.ln())
        })
        .filter(|(_, y)| y.is_finite())
        .collect();
    if pts.len() < 2 {
        return Err(Error::Precondition("decay fit needs two cells with nonzero weight".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok((sxy / sxx).exp())
}

fn ring_distance(a: usize, b: usize, cells: usize) -> usize {
    let d = a.abs_diff(b) % cells;
    d.min(cells - d)
}

/// Sites within `radius` cells of `leg` on the ring, plus the listed atom levels.
pub fn leg_window(indexing: &SiteIndexing, leg: usize, radius: usize, atoms: &[usize]) -> Vec<usize> {
    let mut sites = Vec::new();
    for l in 1..=indexing.cells {
        if ring_distance(l, leg, indexing.cells) <= radius {
            sites.push(indexing.a(l));
            sites.push(indexing.b(l));
        }
    }
    sites.extend(atoms.iter().map(|&k| indexing.atom(k)));
    sites
}

/// Fraction of `‖v‖²` on `sites`.
pub fn weight_fraction(vector: ArrayView1<C64>, sites: &[usize]) -> f64 {
    let total: f64 = vector.iter().map(|z| z.norm_sqr()).sum();
    sites.iter().map(|&i| vector[i].norm_sqr()).sum::<f64>() / total
}

/// One vector of a (quasi-)degenerate eigenspace, chosen to maximize its
/// weight on a leg window.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedMode {
    pub vector: Array1<C64>,
    pub weight: f64,
    /// Rayleigh quotient `v†Hv / v†v`.
    pub energy: C64,
    /// `‖Hv − Ev‖ / ‖v‖`.
    pub residual: f64,
}

/// Orthonormal basis of the span of the given right eigenvectors (modified
/// Gram–Schmidt with one reorthogonalization pass).
fn orthonormal_span(spec: &SpectrumResult, states: &[usize]) -> Result<Array2<C64>> {
    let dim = spec.right.nrows();
    let mut basis: Vec<Array1<C64>> = Vec::new();
    for &q in states {
        let mut v = spec.right.column(q).to_owned();
        for _ in 0..2 {
            for u in &basis {
                let c: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                v.zip_mut_with(u, |x, &y| *x -= c * y);
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-8 {
            return Err(Error::Precondition(format!("state {q} is linearly dependent on the others")));
        }
        v.mapv_inplace(|z| z / n);
        basis.push(v);
    }
    let mut out = Array2::zeros((dim, basis.len()));
    for (j, v) in basis.iter().enumerate() {
        out.column_mut(j).assign(v);
    }
    Ok(out)
}

/// For every window, the vector inside `span{R_q : q ∈ states}` with the
/// largest weight on that window. Any such vector is an eigenvector when the
/// states are exactly degenerate; for a quasi-degenerate group the returned
/// residual bounds the error.
pub fn localized_modes(
    h: &HamiltonianMatrix,
    spec: &SpectrumResult,
    states: &[usize],
    windows: &[Vec<usize>],
) -> Result<Vec<LocalizedMode>> {
    if states.is_empty() {
        return Err(Error::Precondition("no states to localize".into()));
    }
    let q = orthonormal_span(spec, states)?;
    let r = q.ncols();
    windows
        .iter()
        .map(|sites| {
            let mut m = Array2::<C64>::zeros((r, r));
            for i in 0..r {
                for j in 0..r {
                    m[[i, j]] = sites.iter().map(|&s| q[[s, i]].conj() * q[[s, j]]).sum();
                }
            }
            let eig = eigendecompose_matrix(&m, false, r)?;
            let best = (0..r)
                .max_by(|&a, &b| eig.eigenvalues[a].re.total_cmp(&eig.eigenvalues[b].re))
                .expect("nonempty");
            let vector = q.dot(&eig.right.column(best));
            let hv = h.matrix.dot(&vector);
            let nn: f64 = vector.iter().map(|z| z.norm_sqr()).sum();
            let energy: C64 = vector.iter().zip(hv.iter()).map(|(a, b)| a.conj() * b).sum::<C64>() / nn;
            let residual = hv
                .iter()
                .zip(vector.iter())
                .map(|(a, b)| (a - energy * b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / nn.sqrt();
            let weight = weight_fraction(vector.view(), sites);
            Ok(LocalizedMode { vector, weight, energy, residual })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{assemble, Boundary, CouplingConfig, LegMode, Variant};
    use crate::spectral::{classify_states, eigendecompose};
    use proptest::prelude::*;

    fn fig6() -> LatticeParams {
        LatticeParams::new(20, 0.2, 1.0, 0.5).unwrap()
    }

    fn spectrum(cfg: &CouplingConfig) -> SpectrumResult {
        let h = assemble(&fig6(), cfg, Boundary::Periodic, Variant::Nonreciprocal).unwrap();
        eigendecompose(&h, false).unwrap()
    }

    fn giant(gm: f64, gn: f64) -> f64 {
        let cfg = CouplingConfig::giant(LegMode::AB, 10, 10, 1.0).with_strengths(gn, gm);
        ipr(&spectrum(&cfg), 20, false).unwrap().average
    }

    fn fake(columns: Vec<Vec<f64>>) -> SpectrumResult {
        let dim = columns[0].len();
        let mut right = Array2::zeros((dim, columns.len()));
        for (j, c) in columns.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                right[[i, j]] = C64::new(x, 0.0);
            }
        }
        SpectrumResult {
            eigenvalues: vec![C64::new(0.0, 0.0); columns.len()],
            right,
            left: None,
            biorthogonal_fallback: false,
        }
    }

    #[test]
    fn ipr_bounds() {
        let l = 6;
        let uniform = vec![1.0; 2 * l + 1];
        let mut single = vec![0.0; 2 * l + 1];
        single[3] = 2.0;
        let mut atom_only = vec![0.0; 2 * l + 1];
        atom_only[2 * l] = 1.0;
        let rep = ipr(&fake(vec![uniform, single, atom_only]), l, false).unwrap();
        assert!((rep.per_state[0].unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!((rep.per_state[1].unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(rep.excluded, vec![2]);
        assert_eq!(rep.used, 2);
    }

    #[test]
    fn heatmap_diagonal_is_suppressed() {
        assert!(giant(13.0, 1.0) > giant(13.0, 13.0));
    }

    #[test]
    fn small_atoms_localize_more() {
        let small = ipr(&spectrum(&CouplingConfig::two_small(LegMode::AB, 10, 10, 7.0)), 20, false).unwrap();
        assert!(small.average > giant(7.0, 7.0), "{} vs {}", small.average, giant(7.0, 7.0));
    }

    #[test]
    fn giant_ipr_peaks_at_unit_coupling() {
        let gs = [0.25, 0.5, 1.0, 2.0, 4.0, 7.0, 13.0];
        let vals: Vec<f64> = gs.iter().map(|&g| giant(g, g)).collect();
        let best = (0..gs.len()).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        assert_eq!(gs[best], 1.0, "{vals:?}");
    }

    #[test]
    fn free_ring_roots() {
        let p = fig6();
        let s = spectrum(&CouplingConfig::none());
        for e in &s.eigenvalues {
            let b = beta_of_energy(*e, &p).unwrap();
            assert!((b.beta1.norm() - 1.0).abs() <= 1e-6, "E = {e}");
            assert!((b.beta2.norm() - 3.0 / 7.0).abs() <= 1e-6);
        }
        let r = reference_lines(&p);
        assert!((r[1] - 0.65465).abs() < 1e-5);
    }

    #[test]
    fn bipolar_at_equal_weak_coupling() {
        let p = fig6();
        let cfg = CouplingConfig::giant(LegMode::AB, 10, 10, 1.0);
        let s = spectrum(&cfg);
        let c = classify_states(&s, &p, None).unwrap();
        let prof = beta_profile(&s, &p, &c, StateClass::Bulk).unwrap();
        assert!(prof.rows.iter().any(|r| r.beta1_abs > 1.0 + 1e-3));
        assert!(prof.rows.iter().any(|r| r.beta1_abs < 1.0 - 1e-3));
        for r in &prof.rows {
            assert!((r.beta1_abs * r.beta2_abs - 3.0 / 7.0).abs() <= 1e-10);
        }
        let none = spectrum(&CouplingConfig::none());
        let c0 = classify_states(&none, &p, None).unwrap();
        let prof0 = beta_profile(&none, &p, &c0, StateClass::Bulk).unwrap();
        assert!(prof0.rows.iter().all(|r| (r.beta1_abs - 1.0).abs() < 1e-6 && (r.beta2_abs - 3.0 / 7.0).abs() < 1e-6));
    }

    #[test]
    fn small_atoms_sit_near_skin_line() {
        let p = fig6();
        let cfg = CouplingConfig::two_small(LegMode::AB, 10, 10, 7.0);
        let s = spectrum(&cfg);
        let c = classify_states(&s, &p, None).unwrap();
        let prof = beta_profile(&s, &p, &c, StateClass::Bulk).unwrap();
        let median = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        };
        let line = (3.0f64 / 7.0).sqrt();
        let m1 = median(prof.rows.iter().map(|r| r.beta1_abs).collect());
        let m2 = median(prof.rows.iter().map(|r| r.beta2_abs).collect());
        assert!((m1 - line).abs() <= 0.1 * line, "{m1}");
        assert!((m2 - line).abs() <= 0.1 * line, "{m2}");
    }

    #[test]
    fn degenerate_roots_flagged() {
        let p = LatticeParams::new(10, 0.2, 1.0, 0.5).unwrap();
        // Δ² = 4 t2² (t1² − γ²) with Δ = E² + γ² − t1² − t2²
        let target = 2.0 * (0.04f64 - 0.25).abs().sqrt();
        let e2 = C64::new(0.0, target) + 1.0 + 0.04 - 0.25;
        let b = beta_of_energy(e2.sqrt(), &p).unwrap();
        assert!(b.degenerate);
        assert!((b.beta1 - b.beta2).norm() < 1e-6);
        assert!(beta_of_energy(C64::new(0.3, 0.0), &LatticeParams::new(10, -0.5, 1.0, 0.5).unwrap()).is_err());
    }

    #[test]
    fn decay_fit_recovers_geometric_rate() {
        let ix = SiteIndexing::new(12, 0);
        let mut v = Array1::zeros(24);
        for l in 1..=12 {
            v[ix.a(l)] = C64::new(0.6f64.powi(l as i32), 0.0);
            v[ix.b(l)] = C64::new(0.0, 0.5 * 0.6f64.powi(l as i32));
        }
        assert!((decay_fit(v.view(), &ix, 1..=12).unwrap() - 0.6).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn roots_solve_quadratic(re in -4.0..4.0f64, im in -4.0..4.0f64, t1 in -2.0..2.0f64, gamma in -1.5..1.5f64, t2 in 0.2..2.0f64) {
            prop_assume!((t1 + gamma).abs() > 1e-2);
            let p = LatticeParams::new(10, t1, t2, gamma).unwrap();
            let b = beta_of_energy(C64::new(re, im), &p).unwrap();
            for beta in [b.beta1, b.beta2] {
                prop_assert!(beta_residual(beta, b.delta, &p) <= 1e-10, "residual {}", beta_residual(beta, b.delta, &p));
            }
            prop_assert!(b.beta1.norm() >= b.beta2.norm());
            let product = (b.beta1 * b.beta2).norm() * (t1 + gamma).abs();
            prop_assert!((product - (t1 - gamma).abs()).abs() <= 1e-12 * (1.0 + (t1 - gamma).abs()));
        }
    }
}
