//! Lifting, the Hermitian-matrix basis, and the super analysis operator.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use super::MeasurementEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{null_space, RankTolerance};
use crate::C64;

/// `x x^*`: self-adjoint, positive semidefinite, rank at most one.
pub fn lift(x: &DVector<C64>) -> DMatrix<C64> {
    x * x.adjoint()
}

/// Hilbert-Schmidt inner product `tr(a b^*)`.
pub fn hs_inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

/// A real basis of the `M^2`-dimensional space of self-adjoint `M x M` matrices.
///
/// The first `M` elements are the trailing diagonal blocks
/// `sum_{k >= j} E_kk` for `j = 0..M` (the identity first). Each pair
/// `i < j`, in lexicographic order, then contributes the symmetric element
/// `(E_ij + E_ji) / sqrt 2` followed by the skew-phase element
/// `(i E_ij - i E_ji) / sqrt 2`. For `M = 2` this is the basis
/// `{I, E_22, sigma_x / sqrt 2, -sigma_y / sqrt 2}`.
///
/// The basis is not orthonormal, so coordinates come from solving against
/// `change_of_coordinates`, whose columns are the raw parameters of each
/// element (diagonal entries, then real and imaginary parts of the upper
/// triangle). Its LU factorization is computed once.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<DMatrix<C64>>,
    change_of_coordinates: DMatrix<f64>,
    factorization: LU<f64, Dyn, Dyn>,
}

fn pairs(m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..m).flat_map(move |i| (i + 1..m).map(move |j| (i, j)))
}

/// Raw real parameters of a (Hermitian) matrix.
fn raw_parameters(h: &DMatrix<C64>) -> DVector<f64> {
    let m = h.nrows();
    let mut out = Vec::with_capacity(m * m);
    out.extend((0..m).map(|i| h[(i, i)].re));
    for (i, j) in pairs(m) {
        out.push(h[(i, j)].re);
        out.push(h[(i, j)].im);
    }
    DVector::from_vec(out)
}

impl HermitianBasis {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidArgument(
                "basis dimension must be at least 1".into(),
            ));
        }
        let zero = C64::new(0.0, 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut elements = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            elements.push(DMatrix::from_fn(dim, dim, |r, c| {
                if r == c && r >= j {
                    C64::new(1.0, 0.0)
                } else {
                    zero
                }
            }));
        }
        for (i, j) in pairs(dim) {
            let mut sym = DMatrix::from_element(dim, dim, zero);
            sym[(i, j)] = C64::new(s, 0.0);
            sym[(j, i)] = C64::new(s, 0.0);
            elements.push(sym);
            let mut skew = DMatrix::from_element(dim, dim, zero);
            skew[(i, j)] = C64::new(0.0, s);
            skew[(j, i)] = C64::new(0.0, -s);
            elements.push(skew);
        }
        let mut change = DMatrix::zeros(dim * dim, dim * dim);
        for (k, e) in elements.iter().enumerate() {
            change.set_column(k, &raw_parameters(e));
        }
        let factorization = change.clone().lu();
        Ok(Self {
            dim,
            elements,
            change_of_coordinates: change,
            factorization,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[DMatrix<C64>] {
        &self.elements
    }

    pub fn change_of_coordinates(&self) -> &DMatrix<f64> {
        &self.change_of_coordinates
    }

    /// Indices of the elements that are real symmetric matrices.
    pub fn real_symmetric_indices(&self) -> Vec<usize> {
        let m = self.dim;
        (0..m)
            .chain((0..m * (m - 1) / 2).map(|p| m + 2 * p))
            .collect()
    }

    /// Coordinates `c` with `h = sum_k c_k B_k`.
    pub fn coordinates(&self, h: &DMatrix<C64>) -> Result<DVector<f64>> {
        if h.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: h.nrows(),
            });
        }
        let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        if (h - h.adjoint()).iter().any(|z| z.norm() > 1e-12 * scale) {
            return Err(Error::InvalidArgument("matrix is not self-adjoint".into()));
        }
        self.factorization
            .solve(&raw_parameters(h))
            .ok_or_else(|| Error::Singular("basis change of coordinates".into()))
    }

    pub fn matrix_from_coordinates(&self, c: &DVector<f64>) -> DMatrix<C64> {
        let mut out = DMatrix::from_element(self.dim, self.dim, C64::new(0.0, 0.0));
        for (e, &ck) in self.elements.iter().zip(c.iter()) {
            out += e * C64::new(ck, 0.0);
        }
        out
    }
}

/// Null space of a super analysis operator, as self-adjoint matrices.
#[derive(Debug, Clone)]
pub struct OperatorNullSpace {
    pub rank: usize,
    pub coordinates: Vec<DVector<f64>>,
    pub matrices: Vec<DMatrix<C64>>,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
}

impl OperatorNullSpace {
    pub fn nullity(&self) -> usize {
        self.coordinates.len()
    }
}

/// Matrix of the linear map `H -> (<H, phi_n phi_n^*>_HS)_n` acting on basis
/// coordinates: entry `(n, k)` is `<B_k, phi_n phi_n^*>_HS`, so multiplying
/// the coordinates of `H` reproduces the Hilbert-Schmidt pairings.
#[derive(Debug, Clone)]
pub struct SuperAnalysisOperator {
    matrix: DMatrix<f64>,
    basis: HermitianBasis,
    source: MeasurementEnsemble,
}

impl SuperAnalysisOperator {
    pub fn new(phi: &MeasurementEnsemble, basis: &HermitianBasis) -> Result<Self> {
        if basis.dim() != phi.dim() {
            return Err(Error::DimensionMismatch {
                expected: phi.dim(),
                actual: basis.dim(),
            });
        }
        let (n, k) = (phi.len(), basis.elements().len());
        let mut matrix = DMatrix::zeros(n, k);
        for col in 0..n {
            let f = phi.column(col);
            for (j, e) in basis.elements().iter().enumerate() {
                // <B, f f^*>_HS = f^* B f
                matrix[(col, j)] = f.dotc(&(e * &f)).re;
            }
        }
        Ok(Self {
            matrix,
            basis: basis.clone(),
            source: phi.clone(),
        })
    }

    /// Builds the operator with the default basis for `phi.dim()`.
    pub fn for_ensemble(phi: &MeasurementEnsemble) -> Result<Self> {
        Self::new(phi, &HermitianBasis::new(phi.dim())?)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn basis(&self) -> &HermitianBasis {
        &self.basis
    }

    pub fn source(&self) -> &MeasurementEnsemble {
        &self.source
    }

    pub fn apply(&self, h: &DMatrix<C64>) -> Result<DVector<f64>> {
        Ok(&self.matrix * self.basis.coordinates(h)?)
    }

    pub fn null_space(&self, tol: &RankTolerance) -> OperatorNullSpace {
        let ns = null_space(&self.matrix, tol);
        let matrices = ns
            .basis
            .iter()
            .map(|c| self.basis.matrix_from_coordinates(c))
            .collect();
        OperatorNullSpace {
            rank: ns.rank,
            coordinates: ns.basis,
            matrices,
            singular_values: ns.singular_values,
            threshold: ns.threshold,
        }
    }

    /// Null space of the restriction to real symmetric matrices.
    pub fn real_symmetric_null_space(&self, tol: &RankTolerance) -> OperatorNullSpace {
        let idx = self.basis.real_symmetric_indices();
        let sub = self.matrix.select_columns(&idx);
        let ns = null_space(&sub, tol);
        let full_coords: Vec<DVector<f64>> = ns
            .basis
            .iter()
            .map(|c| {
                let mut full = DVector::zeros(self.matrix.ncols());
                for (v, &k) in c.iter().zip(&idx) {
                    full[k] = *v;
                }
                full
            })
            .collect();
        let matrices = full_coords
            .iter()
            .map(|c| self.basis.matrix_from_coordinates(c))
            .collect();
        OperatorNullSpace {
            rank: ns.rank,
            coordinates: full_coords,
            matrices,
            singular_values: ns.singular_values,
            threshold: ns.threshold,
        }
    }
}
