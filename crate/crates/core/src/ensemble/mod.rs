//! Measurement ensembles and the maps they induce.
//!
//! Conventions: `<x, y> = sum_m x_m * conj(y_m)` (linear in the first
//! argument), so the analysis coefficients of `x` are `Phi^* x`, and
//! `lift(x) = x x^*`.

mod basis;
mod constructions;
pub mod io;

pub use basis::{hs_inner, lift, HermitianBasis, OperatorNullSpace, SuperAnalysisOperator};
pub use constructions::{example_3x8, fractional_dft_3, fractional_dft_stack, identity};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn label(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

/// `N` measurement vectors in dimension `M`, stored as the columns of an
/// `M x N` matrix. Real ensembles keep zero imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEnsemble {
    field: Field,
    matrix: DMatrix<C64>,
}

impl MeasurementEnsemble {
    pub fn new(field: Field, matrix: DMatrix<C64>) -> Result<Self> {
        let (m, n) = matrix.shape();
        if m == 0 {
            return Err(Error::InvalidEnsemble(
                "dimension M must be at least 1".into(),
            ));
        }
        if n == 0 {
            return Err(Error::InvalidEnsemble(
                "ensemble has no measurement vectors".into(),
            ));
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidEnsemble("non-finite entry".into()));
        }
        if field == Field::Real && matrix.iter().any(|z| z.im != 0.0) {
            return Err(Error::FieldMismatch(
                "real ensemble has an entry with nonzero imaginary part".into(),
            ));
        }
        Ok(Self { field, matrix })
    }

    pub fn real(matrix: DMatrix<f64>) -> Result<Self> {
        Self::new(Field::Real, matrix.map(|x| C64::new(x, 0.0)))
    }

    pub fn complex(matrix: DMatrix<C64>) -> Result<Self> {
        Self::new(Field::Complex, matrix)
    }

    /// Real ensemble from a list of columns.
    pub fn from_real_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let m = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != m) {
            return Err(Error::InvalidEnsemble(
                "columns have different lengths".into(),
            ));
        }
        Self::real(DMatrix::from_fn(m, columns.len(), |r, c| columns[c][r]))
    }

    pub fn from_complex_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let m = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != m) {
            return Err(Error::InvalidEnsemble(
                "columns have different lengths".into(),
            ));
        }
        Self::complex(DMatrix::from_fn(m, columns.len(), |r, c| columns[c][r]))
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Ambient dimension `M`.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of measurements `N`.
    pub fn len(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.ncols() == 0
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn column(&self, n: usize) -> DVector<C64> {
        self.matrix.column(n).into_owned()
    }

    /// The real `M x N` matrix; `None` for complex ensembles.
    pub fn real_matrix(&self) -> Option<DMatrix<f64>> {
        (self.field == Field::Real).then(|| self.matrix.map(|z| z.re))
    }

    /// The same vectors viewed over the complex field.
    pub fn as_complex(&self) -> Self {
        Self {
            field: Field::Complex,
            matrix: self.matrix.clone(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            field: self.field,
            matrix: &self.matrix * C64::new(c, 0.0),
        }
    }

    /// Sub-ensemble of the given columns (may be empty, unlike `new`).
    pub fn select_columns(&self, cols: &[usize]) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim(), cols.len(), |r, c| self.matrix[(r, cols[c])])
    }

    fn check_signal(&self, x: &DVector<C64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        if self.field == Field::Real && x.iter().any(|z| z.im != 0.0) {
            return Err(Error::FieldMismatch(
                "complex signal for a real ensemble".into(),
            ));
        }
        Ok(())
    }

    /// Analysis coefficients `<x, phi_n>` for every `n`.
    pub fn analysis(&self, x: &DVector<C64>) -> Result<DVector<C64>> {
        self.check_signal(x)?;
        Ok(self.matrix.ad_mul(x))
    }

    /// `(A(x))(n) = |<x, phi_n>|^2`.
    pub fn intensity_map(&self, x: &DVector<C64>) -> Result<DVector<f64>> {
        Ok(self.analysis(x)?.map(|z| z.norm_sqr()))
    }

    /// `(sqrt A(x))(n) = |<x, phi_n>|`.
    pub fn root_intensity_map(&self, x: &DVector<C64>) -> Result<DVector<f64>> {
        Ok(self.analysis(x)?.map(|z| z.norm()))
    }

    /// `(B(x))(n) = <x, phi_n>^2`; defined for complex ensembles.
    pub fn b_map(&self, x: &DVector<C64>) -> Result<DVector<C64>> {
        if self.field != Field::Complex {
            return Err(Error::FieldMismatch(
                "b_map is defined for complex ensembles".into(),
            ));
        }
        Ok(self.analysis(x)?.map(|z| z * z))
    }
}

/// Multiplicative group identified away in the quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    /// `{+1, -1}` acting on real vectors.
    Sign,
    /// Unit-modulus complex scalars.
    Torus,
}

/// A vector modulo a scalar group.
#[derive(Debug, Clone)]
pub struct ProjectiveVector {
    representative: DVector<C64>,
    group: Group,
}

impl ProjectiveVector {
    pub fn new(representative: DVector<C64>, group: Group) -> Result<Self> {
        if group == Group::Sign && representative.iter().any(|z| z.im != 0.0) {
            return Err(Error::FieldMismatch(
                "sign quotient requires a real vector".into(),
            ));
        }
        Ok(Self {
            representative,
            group,
        })
    }

    pub fn real(v: &DVector<f64>) -> Self {
        Self {
            representative: v.map(|x| C64::new(x, 0.0)),
            group: Group::Sign,
        }
    }

    pub fn representative(&self) -> &DVector<C64> {
        &self.representative
    }

    pub fn group(&self) -> Group {
        self.group
    }

    /// Whether the representatives differ by a group element, up to `tol`
    /// relative to the larger norm.
    pub fn equivalent(&self, other: &Self, tol: f64) -> bool {
        if self.group != other.group || self.representative.len() != other.representative.len() {
            return false;
        }
        let (x, y) = (&self.representative, &other.representative);
        let scale = x.norm().max(y.norm());
        if scale == 0.0 {
            return true;
        }
        match self.group {
            Group::Sign => (x - y).norm().min((x + y).norm()) <= tol * scale,
            Group::Torus => {
                // y = c x with |c| = 1 iff |<x, y>| = |x| |y| and |x| = |y|
                let (nx, ny) = (x.norm(), y.norm());
                (nx - ny).abs() <= tol * scale
                    && (nx * ny - y.dotc(x).norm()) <= tol * scale * scale
            }
        }
    }
}

/// `d(x, y) = min(|x - y|, |x + y|)` on `R^M / {+-1}`.
pub fn projective_distance(x: &ProjectiveVector, y: &ProjectiveVector) -> Result<f64> {
    if x.group != Group::Sign || y.group != Group::Sign {
        return Err(Error::Unsupported(
            "projective distance is only defined modulo sign on real vectors".into(),
        ));
    }
    if x.representative.len() != y.representative.len() {
        return Err(Error::DimensionMismatch {
            expected: x.representative.len(),
            actual: y.representative.len(),
        });
    }
    let a = x.representative.map(|z| z.re);
    let b = y.representative.map(|z| z.re);
    Ok(sign_distance(&a, &b))
}

/// [`projective_distance`] on plain real vectors of equal length.
pub fn sign_distance(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    (x - y).norm().min((x + y).norm())
}

/// Divides `x` by the phase of its last nonzero entry.
pub fn canonicalize(x: &DVector<C64>) -> Result<DVector<C64>> {
    let last = x
        .iter()
        .rev()
        .find(|z| **z != C64::new(0.0, 0.0))
        .ok_or(Error::ZeroVector)?;
    let phase = last / last.norm();
    let mut out = x.map(|z| z / phase);
    // the pivot is exactly real and positive by definition
    if let Some(p) = out.iter_mut().rev().find(|z| **z != C64::new(0.0, 0.0)) {
        *p = C64::new(p.norm(), 0.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn three_vectors() -> MeasurementEnsemble {
        MeasurementEnsemble::from_real_columns(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]])
            .unwrap()
    }

    #[test]
    fn intensity_of_one_i_over_three_vectors() {
        let phi = three_vectors().as_complex();
        let a = phi
            .intensity_map(&DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]))
            .unwrap();
        let b = phi
            .intensity_map(&DVector::from_vec(vec![c(1.0, 0.0), c(0.0, -1.0)]))
            .unwrap();
        assert_eq!(a, DVector::from_vec(vec![1.0, 1.0, 2.0]));
        assert_eq!(a, b);
        let r = phi
            .root_intensity_map(&DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]))
            .unwrap();
        assert!((r[2] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!((r[0], r[1]), (1.0, 1.0));
    }

    #[test]
    fn zero_signal_and_identity_basis() {
        let phi = identity(2, Field::Real);
        assert_eq!(
            phi.intensity_map(&DVector::zeros(2)).unwrap(),
            DVector::zeros(2)
        );
        let x = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(
            phi.intensity_map(&x).unwrap(),
            DVector::from_vec(vec![1.0, 0.0])
        );
        let x = DVector::from_vec(vec![c(3.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(
            phi.root_intensity_map(&x).unwrap(),
            DVector::from_vec(vec![3.0, 0.0])
        );
    }

    #[test]
    fn signal_errors() {
        let phi = identity(2, Field::Real);
        assert!(matches!(
            phi.intensity_map(&DVector::zeros(3)),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 3
            })
        ));
        let x = DVector::from_vec(vec![c(1.0, 1.0), c(0.0, 0.0)]);
        assert!(matches!(
            phi.intensity_map(&x),
            Err(Error::FieldMismatch(_))
        ));
        assert!(matches!(
            phi.b_map(&DVector::zeros(2)),
            Err(Error::FieldMismatch(_))
        ));
    }

    #[test]
    fn b_map_values() {
        let phi = three_vectors().as_complex();
        let x = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let b = phi.b_map(&x).unwrap();
        // <x, (1,1)> = 1 + i, squared = 2i
        assert_eq!(
            b,
            DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 2.0)])
        );
        assert_eq!(phi.b_map(&(-&x)).unwrap(), b);
        assert_eq!(phi.b_map(&DVector::zeros(2)).unwrap(), DVector::zeros(3));
    }

    #[test]
    fn distance_examples() {
        let v = |a: f64, b: f64| ProjectiveVector::real(&DVector::from_vec(vec![a, b]));
        assert_eq!(
            projective_distance(&v(1.0, 0.0), &v(-1.0, 0.0)).unwrap(),
            0.0
        );
        assert!(
            (projective_distance(&v(1.0, 0.0), &v(0.0, 1.0)).unwrap() - 2f64.sqrt()).abs() < 1e-15
        );
        assert_eq!(
            projective_distance(&v(2.0, 0.0), &v(1.0, 0.0)).unwrap(),
            1.0
        );
        let t = ProjectiveVector::new(DVector::from_vec(vec![c(1.0, 0.0)]), Group::Torus).unwrap();
        assert!(matches!(
            projective_distance(&t, &t),
            Err(Error::Unsupported(_))
        ));
        let w = ProjectiveVector::real(&DVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert!(matches!(
            projective_distance(&v(1.0, 0.0), &w),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(ProjectiveVector::new(DVector::from_vec(vec![c(0.0, 1.0)]), Group::Sign).is_err());
    }

    #[test]
    fn canonicalize_examples() {
        let x = DVector::from_vec(vec![c(0.0, 1.0), c(0.0, 0.0)]);
        assert_eq!(
            canonicalize(&x).unwrap(),
            DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])
        );
        let x = DVector::from_vec(vec![c(1.0, 0.0), c(-2.0, 0.0)]);
        assert_eq!(
            canonicalize(&x).unwrap(),
            DVector::from_vec(vec![c(-1.0, 0.0), c(2.0, 0.0)])
        );
        let x = DVector::from_vec(vec![c(1.0, 1.0), c(1.0, 1.0)]);
        let y = canonicalize(&x).unwrap();
        let r2 = 2f64.sqrt();
        assert!((y[0] - c(r2, 0.0)).norm() < 1e-15 && (y[1] - c(r2, 0.0)).norm() < 1e-15);
        assert!(matches!(
            canonicalize(&DVector::zeros(2)),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn equivalence_modulo_groups() {
        let x = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let y = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, -1.0)]);
        let px = ProjectiveVector::new(x.clone(), Group::Torus).unwrap();
        let py = ProjectiveVector::new(y, Group::Torus).unwrap();
        let pz = ProjectiveVector::new(x.map(|z| z * c(0.6, 0.8)), Group::Torus).unwrap();
        assert!(!px.equivalent(&py, 1e-9));
        assert!(px.equivalent(&pz, 1e-9));
    }

    #[test]
    fn construction_errors() {
        assert!(MeasurementEnsemble::real(DMatrix::zeros(2, 0)).is_err());
        assert!(MeasurementEnsemble::real(DMatrix::zeros(0, 2)).is_err());
        assert!(MeasurementEnsemble::real(DMatrix::from_element(1, 1, f64::NAN)).is_err());
        let bad = DMatrix::from_element(1, 1, c(0.0, 1.0));
        assert!(matches!(
            MeasurementEnsemble::new(Field::Real, bad),
            Err(Error::FieldMismatch(_))
        ));
    }
}
