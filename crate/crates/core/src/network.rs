//! Coupling matrices with a common row sum and their normal modes.
//!
//! A synchronized state can persist only if every oscillator receives the
//! same total coupling, `Σ_j J_ij = J̃`. The all-ones vector is then a right
//! eigenvector with eigenvalue `J̃` (the Perron mode); every other mode
//! decays under a positive lag iff `Re[λ(J̃ − λ)] < 0`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::{Float, Zero};

use crate::error::{invalid, Error, Result};
use crate::linalg::{invert, schur, triangular_eigenvectors, CMatrix};

/// Tolerances used when validating and decomposing coupling matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    /// Row sums must agree to `row_sum_rtol · max(1, |J̃|)`.
    pub row_sum_rtol: f64,
    /// Largest accepted 1-norm condition estimate of the eigenvector matrix.
    pub max_condition: f64,
    /// `|Re[λ(J̃−λ)]|` at or below this is reported as marginal.
    pub marginal_tol: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { row_sum_rtol: 1e-10, max_condition: 1e12, marginal_tol: 1e-12 }
    }
}

/// Square real coupling matrix `J_ij` with a validated common row sum.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    weights: Vec<f64>,
    row_sum: f64,
}

impl CouplingMatrix {
    /// Validates `weights` (row-major, `n×n`) with default tolerances.
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self> {
        Self::with_options(n, weights, &SpectralOptions::default())
    }

    pub fn with_options(n: usize, weights: Vec<f64>, opts: &SpectralOptions) -> Result<Self> {
        if n < 2 {
            return Err(invalid("coupling matrix needs at least two oscillators"));
        }
        if weights.len() != n * n {
            return Err(invalid("coupling matrix is not square"));
        }
        let row_sum = validate_row_sum(n, &weights, opts.row_sum_rtol)?;
        Ok(Self { n, weights, row_sum })
    }

    /// Mean-field coupling `J_ij = a(1 − δ_ij)`, row sum `(n−1)a`.
    pub fn all_to_all(n: usize, a: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid("all-to-all coupling needs n >= 2"));
        }
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let mut w = vec![a; n * n];
        for i in 0..n {
            w[i * n + i] = 0.0;
        }
        Ok(Self { n, weights: w, row_sum: (n - 1) as f64 * a })
    }

    /// Ring lattice Laplacian: `a` on both neighbours, `−2a` on the diagonal.
    pub fn ring_laplacian(n: usize, a: f64) -> Result<Self> {
        if n < 3 {
            return Err(invalid("ring Laplacian needs n >= 3"));
        }
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = -2.0 * a;
            w[i * n + (i + 1) % n] += a;
            w[i * n + (i + n - 1) % n] += a;
        }
        Ok(Self { n, weights: w, row_sum: 0.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The common row sum `J̃`.
    pub fn row_sum(&self) -> f64 {
        self.row_sum
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    /// `out = J x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Same matrix with oscillators relabeled: new index `k` is old `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n;
        if perm.len() != n {
            return Err(invalid("permutation length differs from n"));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(invalid("not a permutation"));
            }
            seen[p] = true;
        }
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                w[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        Ok(Self { n, weights: w, row_sum: self.row_sum })
    }
}

/// Returns the common row sum of a row-major `n×n` matrix, or the worst
/// offending row.
pub fn validate_row_sum(n: usize, weights: &[f64], rtol: f64) -> Result<f64> {
    if weights.len() != n * n || n == 0 {
        return Err(invalid("coupling matrix is not square"));
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite);
    }
    let sums: Vec<f64> = weights.chunks(n).map(|r| r.iter().sum()).collect();
    let reference = sums[0];
    let tol = rtol * reference.abs().max(1.0);
    let (row, deviation) = sums
        .iter()
        .enumerate()
        .map(|(i, s)| (i, (s - reference).abs()))
        .fold((0, 0.0), |worst, cur| if cur.1 > worst.1 { cur } else { worst });
    if deviation > tol {
        return Err(Error::RowSumMismatch { row, deviation });
    }
    Ok(sums.iter().sum::<f64>() / n as f64)
}

/// Eigenvalues with biorthonormal right and left eigenvectors.
///
/// Right vectors are the columns of `V`, left vectors the rows of `V⁻¹`, so
/// `⟨i|j⟩ = δ_ij` holds by construction. The Perron right vector is the
/// all-ones vector exactly and its eigenvalue is set to `J̃`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<Complex64>,
    right: CMatrix,
    left: CMatrix,
    pub perron_index: usize,
    pub row_sum: f64,
    /// `‖V‖₁‖V⁻¹‖₁` for unit-norm columns, before Perron rescaling.
    pub condition: f64,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `|i⟩`.
    pub fn right_vector(&self, i: usize) -> Vec<Complex64> {
        self.right.column(i)
    }

    /// `⟨i|`.
    pub fn left_vector(&self, i: usize) -> &[Complex64] {
        self.left.row(i)
    }

    /// `⟨i|x⟩` for a real state vector.
    pub fn project(&self, i: usize, x: &[f64]) -> Complex64 {
        self.left.row(i).iter().zip(x).map(|(l, &v)| l * v).sum()
    }

    /// `Σ_i λ_i |i⟩⟨i|`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.n();
        let mut scaled = self.right.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] *= self.eigenvalues[j];
            }
        }
        scaled.mul(&self.left)
    }

    /// Indices of all modes other than the Perron mode.
    pub fn non_perron(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&i| i != self.perron_index)
    }
}

pub fn spectral_decompose(j: &CouplingMatrix) -> Result<SpectralDecomposition> {
    spectral_decompose_with(j, &SpectralOptions::default())
}

pub fn spectral_decompose_with(j: &CouplingMatrix, opts: &SpectralOptions) -> Result<SpectralDecomposition> {
    let n = j.n();
    let a = CMatrix::from_real(n, j.weights());
    let s = schur(&a)?;
    let x = triangular_eigenvectors(&s.t);
    let mut v = s.z.mul(&x);
    let eigenvalues: Vec<Complex64> = (0..n).map(|i| s.t[(i, i)]).collect();

    for col in 0..n {
        normalize_column(&mut v, col);
    }
    let defective = |condition| Error::DefectiveMatrix { condition };
    let inv = invert(&v).ok_or(defective(f64::INFINITY))?;
    let condition = v.norm_one() * inv.norm_one();
    if !(condition <= opts.max_condition) {
        return Err(defective(condition));
    }

    let jt = j.row_sum();
    let scale = j.norm().max(1.0);
    let ones = vec![1.0; n];
    // Weight of |1⟩ on each mode, used to break ties inside a degenerate J̃.
    let weight: Vec<f64> = (0..n)
        .map(|i| inv.row(i).iter().zip(&ones).map(|(l, &o)| l * o).sum::<Complex64>().norm())
        .collect();
    let dist: Vec<f64> = eigenvalues.iter().map(|l| (l - jt).norm()).collect();
    let best = dist.iter().cloned().fold(f64::INFINITY, f64::min);
    let tie = best + 1e-9 * scale;
    let perron_index = (0..n)
        .filter(|&i| dist[i] <= tie)
        .max_by(|&p, &q| {
            let (a, b) = (eigenvalues[p].re, eigenvalues[q].re);
            if (a - b).abs() > 1e-9 * scale {
                a.partial_cmp(&b).unwrap_or(core::cmp::Ordering::Equal)
            } else {
                weight[p].partial_cmp(&weight[q]).unwrap_or(core::cmp::Ordering::Equal)
            }
        })
        .unwrap_or(0);

    for i in 0..n {
        v[(i, perron_index)] = Complex64::new(1.0, 0.0);
    }
    let left = invert(&v).ok_or(defective(f64::INFINITY))?;
    let mut eigenvalues = eigenvalues;
    eigenvalues[perron_index] = Complex64::new(jt, 0.0);

    Ok(SpectralDecomposition { eigenvalues, right: v, left, perron_index, row_sum: jt, condition })
}

/// Unit 2-norm, with the largest-magnitude entry made real and positive.
fn normalize_column(v: &mut CMatrix, col: usize) {
    let n = v.dim();
    let norm = (0..n).map(|i| v[(i, col)].norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return;
    }
    let pivot = (0..n)
        .map(|i| v[(i, col)])
        .fold(Complex64::zero(), |best, z| if z.norm() > best.norm() * (1.0 + 1e-12) { z } else { best });
    let phase = pivot.conj() / pivot.norm();
    for i in 0..n {
        v[(i, col)] = v[(i, col)] * phase / norm;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Synchronizing,
    Marginal,
    NonSynchronizing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeStability {
    pub index: usize,
    pub lambda: Complex64,
    /// `Re[λ(J̃ − λ)]`; negative means the mode decays for δt > 0.
    pub growth: f64,
    pub verdict: Verdict,
}

/// `Re[λ(J̃ − λ)]`.
pub fn mode_growth(lambda: Complex64, jtilde: f64) -> f64 {
    (lambda * (Complex64::new(jtilde, 0.0) - lambda)).re
}

/// Stability verdict for every non-Perron mode.
pub fn classify_stability(spec: &SpectralDecomposition) -> Vec<ModeStability> {
    classify_stability_with(spec, SpectralOptions::default().marginal_tol)
}

pub fn classify_stability_with(spec: &SpectralDecomposition, marginal_tol: f64) -> Vec<ModeStability> {
    spec.non_perron()
        .map(|i| {
            let lambda = spec.eigenvalues[i];
            let growth = mode_growth(lambda, spec.row_sum);
            let verdict = if growth.abs() <= marginal_tol {
                Verdict::Marginal
            } else if growth < 0.0 {
                Verdict::Synchronizing
            } else {
                Verdict::NonSynchronizing
            };
            ModeStability { index: i, lambda, growth, verdict }
        })
        .collect()
}
