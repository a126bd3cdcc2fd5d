//! Dense linear-algebra helpers: numerical rank, null spaces, Hermitian
//! eigendecompositions.

use nalgebra::{ComplexField, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::C64;

/// Numerical-rank convention.
///
/// A singular value counts as nonzero iff it exceeds
/// `max(max(rows, cols) * eps * sigma_max, absolute_floor)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankTolerance {
    pub absolute_floor: f64,
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self {
            absolute_floor: 1e-10,
        }
    }
}

impl RankTolerance {
    pub fn with_floor(absolute_floor: f64) -> Self {
        Self { absolute_floor }
    }

    pub fn threshold(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        let relative = rows.max(cols) as f64 * f64::EPSILON * sigma_max;
        relative.max(self.absolute_floor)
    }

    /// Counts the singular values above threshold.
    pub fn rank_of(&self, rows: usize, cols: usize, singular_values: &[f64]) -> usize {
        let smax = singular_values.iter().cloned().fold(0.0, f64::max);
        let t = self.threshold(rows, cols, smax);
        singular_values.iter().filter(|&&s| s > t).count()
    }
}

/// Singular values sorted in descending order.
pub fn singular_values<T>(m: &DMatrix<T>) -> Vec<f64>
where
    T: ComplexField<RealField = f64>,
{
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().cloned().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn numerical_rank<T>(m: &DMatrix<T>, tol: &RankTolerance) -> usize
where
    T: ComplexField<RealField = f64>,
{
    tol.rank_of(m.nrows(), m.ncols(), &singular_values(m))
}

/// Largest singular value (spectral norm).
pub fn spectral_norm<T>(m: &DMatrix<T>) -> f64
where
    T: ComplexField<RealField = f64>,
{
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Result of a null-space computation.
#[derive(Debug, Clone)]
pub struct NullSpace<T: nalgebra::Scalar> {
    pub rank: usize,
    /// Orthonormal basis of the numerical null space, one vector per entry.
    pub basis: Vec<DVector<T>>,
    /// All singular values (descending), padded with zeros up to `ncols`.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
}

impl<T: nalgebra::Scalar> NullSpace<T> {
    pub fn nullity(&self) -> usize {
        self.basis.len()
    }
}

/// Right null space of `m` via a full SVD. Wide matrices are padded with zero
/// rows so that every right singular vector is available.
pub fn null_space<T>(m: &DMatrix<T>, tol: &RankTolerance) -> NullSpace<T>
where
    T: ComplexField<RealField = f64>,
{
    let (r, c) = m.shape();
    if c == 0 {
        return NullSpace {
            rank: 0,
            basis: Vec::new(),
            singular_values: Vec::new(),
            threshold: 0.0,
        };
    }
    let padded = if r < c {
        let mut p = DMatrix::<T>::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let threshold = tol.threshold(r, c, sv.first().copied().unwrap_or(0.0));
    // structural rank cannot exceed min(r, c)
    let rank = sv.iter().filter(|&&s| s > threshold).count().min(r.min(c));
    let basis = order[rank..]
        .iter()
        .map(|&i| v_t.row(i).transpose().map(|z| z.conjugate()))
        .collect();
    NullSpace {
        rank,
        basis,
        singular_values: sv,
        threshold,
    }
}

/// Eigendecomposition of a Hermitian (or real symmetric) matrix, with
/// eigenvalues sorted ascending and eigenvectors as matching columns.
pub fn hermitian_eigen<T>(m: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>)
where
    T: ComplexField<RealField = f64>,
{
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])].clone());
    (values, vectors)
}

/// Smallest eigenvalue of a positive semidefinite Hermitian matrix; small
/// negative round-off (above `-1e-12` times the scale) is clamped to zero.
pub fn min_eigenvalue_psd<T>(m: &DMatrix<T>) -> f64
where
    T: ComplexField<RealField = f64>,
{
    if m.nrows() == 0 {
        return 0.0;
    }
    let eig = m.clone().symmetric_eigenvalues();
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.iter().cloned().fold(0.0, f64::max);
    if min < 0.0 && min > -1e-12 * max.max(1.0) {
        0.0
    } else {
        min
    }
}

/// Multiplies `v` by a unit scalar so that its largest-modulus entry is real
/// and positive (the first such entry on ties). Zero vectors are unchanged.
pub fn fix_phase(v: &DVector<C64>) -> DVector<C64> {
    let mut best = 0;
    let mut best_abs = 0.0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = z.norm();
        }
    }
    if best_abs == 0.0 {
        return v.clone();
    }
    let phase = v[best] / best_abs;
    v.map(|z| z / phase)
}

/// Real counterpart of [`fix_phase`]: flips the sign so the largest-modulus
/// entry is positive.
pub fn fix_sign(v: &DVector<f64>) -> DVector<f64> {
    let mut best = 0;
    let mut best_abs = 0.0;
    for (i, z) in v.iter().enumerate() {
        if z.abs() > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = z.abs();
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        -v
    } else {
        v.clone()
    }
}

pub fn to_complex(v: &DVector<f64>) -> DVector<C64> {
    v.map(|x| C64::new(x, 0.0))
}
