//! Average-case stability under additive Gaussian noise.
//!
//! Observations are `y = A(theta) + z` with `z ~ N(0, s^2 I_N)`. The Fisher
//! information is `J = (4 / s^2) Psi Psi^T`, where column `n` of `Psi` is
//! `<theta, phi_n> phi_n` (real parts stacked over imaginary parts in the
//! complex case). Complex signals are only identifiable up to a global phase,
//! so `theta` is canonicalized to have a real positive last entry and that
//! entry's imaginary coordinate is dropped from `J` to form the reduced
//! matrix. The trace of the inverse bounds the mean squared error of every
//! unbiased estimator.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::ensemble::{canonicalize, Field, MeasurementEnsemble};
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::rng::{derive_seed, gaussian, seeded};
use crate::C64;

/// Eigenvalues below this fraction of the largest count as zero.
pub const DEFINITENESS_RTOL: f64 = 1e-14;
/// Beyond this condition number a CRLB is reported but flagged unreliable.
pub const MAX_RELIABLE_CONDITION: f64 = 1e12;
/// Trials per seeded block in [`monte_carlo_fisher`].
pub const MC_BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    sigma: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }
}

fn check_theta(theta: &DVector<C64>, phi: &MeasurementEnsemble) -> Result<()> {
    if theta.len() != phi.dim() {
        return Err(Error::DimensionMismatch {
            expected: phi.dim(),
            actual: theta.len(),
        });
    }
    if theta.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::ZeroVector);
    }
    if phi.field() == Field::Real && theta.iter().any(|z| z.im != 0.0) {
        return Err(Error::FieldMismatch(
            "a real ensemble needs a real parameter".into(),
        ));
    }
    Ok(())
}

/// Real coordinates of `theta`: itself for real ensembles, otherwise real
/// parts followed by imaginary parts.
pub fn real_coordinates(theta: &DVector<C64>, field: Field) -> DVector<f64> {
    let m = theta.len();
    match field {
        Field::Real => theta.map(|z| z.re),
        Field::Complex => {
            DVector::from_fn(
                2 * m,
                |i, _| if i < m { theta[i].re } else { theta[i - m].im },
            )
        }
    }
}

/// Inverse of [`real_coordinates`].
pub fn from_real_coordinates(coords: &DVector<f64>, field: Field) -> DVector<C64> {
    match field {
        Field::Real => coords.map(|x| C64::new(x, 0.0)),
        Field::Complex => {
            let m = coords.len() / 2;
            DVector::from_fn(m, |i, _| C64::new(coords[i], coords[i + m]))
        }
    }
}

/// `M x N` (real) or `2M x N` (complex) matrix whose column `n` is
/// `<theta, phi_n> phi_n`. Half the gradient of `A(theta)_n`.
pub fn psi_matrix(theta: &DVector<C64>, phi: &MeasurementEnsemble) -> Result<DMatrix<f64>> {
    check_theta(theta, phi)?;
    let m = phi.dim();
    let coeffs = phi.analysis(theta)?;
    let cols = phi.matrix() * DMatrix::from_diagonal(&coeffs);
    Ok(match phi.field() {
        Field::Real => cols.map(|z| z.re),
        Field::Complex => DMatrix::from_fn(2 * m, phi.len(), |r, c| {
            if r < m {
                cols[(r, c)].re
            } else {
                cols[(r - m, c)].im
            }
        }),
    })
}

/// Gradient of the Gaussian log-likelihood in the real coordinates of
/// `theta`: `(2 / s^2) Psi (y - A(theta))`.
pub fn score_vector(
    y: &DVector<f64>,
    theta: &DVector<C64>,
    phi: &MeasurementEnsemble,
    noise: &NoiseModel,
) -> Result<DVector<f64>> {
    if y.len() != phi.len() {
        return Err(Error::DimensionMismatch {
            expected: phi.len(),
            actual: y.len(),
        });
    }
    let psi = psi_matrix(theta, phi)?;
    let residual = y - phi.intensity_map(theta)?;
    Ok(psi * residual * (2.0 / noise.variance()))
}

/// `log f(y; theta)` for the Gaussian noise model.
pub fn log_likelihood(
    y: &DVector<f64>,
    theta: &DVector<C64>,
    phi: &MeasurementEnsemble,
    noise: &NoiseModel,
) -> Result<f64> {
    if y.len() != phi.len() {
        return Err(Error::DimensionMismatch {
            expected: phi.len(),
            actual: y.len(),
        });
    }
    let r = y - phi.intensity_map(theta)?;
    let n = phi.len() as f64;
    Ok(-r.norm_squared() / (2.0 * noise.variance())
        - 0.5 * n * (2.0 * std::f64::consts::PI * noise.variance()).ln())
}

/// Spectral summary of a symmetric positive semidefinite matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Definiteness {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// `max / min`, infinite when `min <= 0`.
    #[serde(serialize_with = "finite_or_null")]
    pub condition_number: f64,
    pub positive_definite: bool,
}

fn finite_or_null<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

fn definiteness(values: &[f64]) -> Definiteness {
    let min = values.first().copied().unwrap_or(0.0);
    let max = values.last().copied().unwrap_or(0.0);
    let positive_definite = max > 0.0 && min > DEFINITENESS_RTOL * max;
    Definiteness {
        min_eigenvalue: min,
        max_eigenvalue: max,
        condition_number: if min > 0.0 { max / min } else { f64::INFINITY },
        positive_definite,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherReport {
    pub field: Field,
    /// Canonicalized parameter in real coordinates.
    pub theta: DVector<f64>,
    pub noise: NoiseModel,
    pub j: DMatrix<f64>,
    pub j_definiteness: Definiteness,
    /// Complex case: `J` without the row and column of the frozen coordinate.
    pub j_reduced: Option<DMatrix<f64>>,
    pub j_reduced_definiteness: Option<Definiteness>,
    /// `Tr` of the inverse of the applicable matrix, when it is positive
    /// definite.
    pub crlb_trace: Option<f64>,
    /// Diagonal of that inverse.
    pub crlb_diagonal: Option<DVector<f64>>,
    /// Whether the applicable matrix has condition number at most
    /// [`MAX_RELIABLE_CONDITION`].
    pub reliable: bool,
    pub reason: Option<String>,
}

impl FisherReport {
    /// The matrix the bound is taken from: `J` (real) or the reduced `J`.
    pub fn applicable(&self) -> (&DMatrix<f64>, &Definiteness) {
        match (&self.j_reduced, &self.j_reduced_definiteness) {
            (Some(m), Some(d)) => (m, d),
            _ => (&self.j, &self.j_definiteness),
        }
    }

    pub fn positive_definite(&self) -> bool {
        self.applicable().1.positive_definite
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}

impl Serialize for FisherReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FisherReport", 12)?;
        st.serialize_field("field", &self.field)?;
        st.serialize_field("theta", &self.theta.as_slice())?;
        st.serialize_field("noise_sigma", &self.noise.sigma())?;
        st.serialize_field("J", &rows(&self.j))?;
        st.serialize_field("J_definiteness", &self.j_definiteness)?;
        st.serialize_field("J_reduced", &self.j_reduced.as_ref().map(rows))?;
        st.serialize_field("J_reduced_definiteness", &self.j_reduced_definiteness)?;
        st.serialize_field("positive_definite", &self.positive_definite())?;
        st.serialize_field("crlb_trace", &self.crlb_trace)?;
        st.serialize_field(
            "crlb_diagonal",
            &self.crlb_diagonal.as_ref().map(|d| d.as_slice().to_vec()),
        )?;
        st.serialize_field("reliable", &self.reliable)?;
        st.serialize_field("reason", &self.reason)?;
        st.end()
    }
}

/// Canonicalizes `theta` and, for complex ensembles, requires it to lie in
/// the interior of the parameter set: last entry real with
/// `Re > 1e-8 |theta|` and `|Im| <= 1e-12 |theta|`.
pub fn canonical_parameter(
    theta: &DVector<C64>,
    phi: &MeasurementEnsemble,
) -> Result<DVector<C64>> {
    check_theta(theta, phi)?;
    let canon = canonicalize(theta)?;
    if phi.field() == Field::Complex {
        let norm = canon.norm();
        let last = canon[canon.len() - 1];
        if !(last.re > 1e-8 * norm && last.im.abs() <= 1e-12 * norm) {
            return Err(Error::NotInterior(format!(
                "the last entry of theta must be nonzero (got {last} relative to |theta| = {norm:e})"
            )));
        }
    }
    Ok(canon)
}

/// `(4 / s^2) Psi Psi^T` at the canonicalized `theta`, with the reduced matrix
/// for complex ensembles and the CRLB when the applicable matrix is positive
/// definite.
pub fn fisher_matrix(
    theta: &DVector<C64>,
    phi: &MeasurementEnsemble,
    noise: &NoiseModel,
) -> Result<FisherReport> {
    let canon = canonical_parameter(theta, phi)?;
    let psi = psi_matrix(&canon, phi)?;
    let mut j = &psi * psi.transpose() * (4.0 / noise.variance());
    // exact symmetry
    j = (&j + j.transpose()) * 0.5;
    let (j_values, _) = hermitian_eigen(&j);
    let j_definiteness = definiteness(&j_values);

    let (j_reduced, j_reduced_definiteness) = match phi.field() {
        Field::Real => (None, None),
        Field::Complex => {
            let k = j.nrows() - 1;
            let reduced = j.view((0, 0), (k, k)).into_owned();
            let (values, _) = hermitian_eigen(&reduced);
            (Some(reduced), Some(definiteness(&values)))
        }
    };
    let mut report = FisherReport {
        field: phi.field(),
        theta: real_coordinates(&canon, phi.field()),
        noise: *noise,
        j,
        j_definiteness,
        j_reduced,
        j_reduced_definiteness,
        crlb_trace: None,
        crlb_diagonal: None,
        reliable: false,
        reason: None,
    };
    let (matrix, def) = report.applicable();
    let def = *def;
    if def.positive_definite {
        let diag = inverse_diagonal(matrix);
        report.crlb_trace = Some(diag.sum());
        report.crlb_diagonal = Some(diag);
        report.reliable = def.condition_number <= MAX_RELIABLE_CONDITION;
        if !report.reliable {
            report.reason = Some(format!(
                "condition number {:.3e} exceeds {MAX_RELIABLE_CONDITION:e}",
                def.condition_number
            ));
        }
    } else {
        report.reason = Some(format!(
            "Fisher matrix is singular (min eigenvalue {:.3e}, max {:.3e})",
            def.min_eigenvalue, def.max_eigenvalue
        ));
    }
    Ok(report)
}

fn inverse_diagonal(m: &DMatrix<f64>) -> DVector<f64> {
    let (values, vectors) = hermitian_eigen(m);
    DVector::from_fn(m.nrows(), |i, _| {
        values
            .iter()
            .enumerate()
            .map(|(k, l)| vectors[(i, k)].powi(2) / l)
            .sum()
    })
}

/// `Tr` of the inverse of the applicable Fisher matrix.
pub fn crlb_trace(report: &FisherReport) -> Result<f64> {
    report.crlb_trace.ok_or_else(|| {
        Error::Singular(
            report
                .reason
                .clone()
                .unwrap_or_else(|| "Fisher matrix is singular".into()),
        )
    })
}

/// Mean outer product of the score over `trials` simulated observations at
/// `theta`. Trials are drawn in blocks of [`MC_BLOCK`], block `b` from
/// `derive_seed(seed, [b])`, and block sums are added in block order.
pub fn monte_carlo_fisher(
    theta: &DVector<C64>,
    phi: &MeasurementEnsemble,
    noise: &NoiseModel,
    trials: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let psi = psi_matrix(theta, phi)?;
    let mean = phi.intensity_map(theta)?;
    let scale = 2.0 / noise.variance();
    let dim = psi.nrows();
    let blocks = trials.div_ceil(MC_BLOCK);
    let sums: Vec<DMatrix<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = seeded(derive_seed(seed, &[b as u64]));
            let count = MC_BLOCK.min(trials - b * MC_BLOCK);
            let mut acc = DMatrix::zeros(dim, dim);
            for _ in 0..count {
                let y = DVector::from_fn(mean.len(), |i, _| {
                    mean[i] + noise.sigma() * gaussian(&mut rng)
                });
                let s = &psi * (y - &mean) * scale;
                acc.ger(1.0, &s, &s, 1.0);
            }
            acc
        })
        .collect();
    let total = sums
        .into_iter()
        .fold(DMatrix::zeros(dim, dim), |a, b| a + b);
    Ok(total / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{example_3x8, identity};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar(t: f64) -> (MeasurementEnsemble, DVector<C64>) {
        (
            MeasurementEnsemble::real(DMatrix::from_element(1, 1, 1.0)).unwrap(),
            DVector::from_element(1, c(t, 0.0)),
        )
    }

    #[test]
    fn single_measurement_closed_form() {
        let (phi, theta) = scalar(2.0);
        let noise = NoiseModel::new(1.0).unwrap();
        assert_eq!(
            psi_matrix(&theta, &phi).unwrap(),
            DMatrix::from_element(1, 1, 2.0)
        );
        let r = fisher_matrix(&theta, &phi, &noise).unwrap();
        assert_eq!(r.j[(0, 0)], 16.0);
        assert!((crlb_trace(&r).unwrap() - 0.0625).abs() < 1e-15);
        assert!(r.reliable);
    }

    #[test]
    fn complex_psi_column() {
        let phi = identity(2, Field::Complex);
        let theta = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let psi = psi_matrix(&theta, &phi).unwrap();
        assert_eq!(
            psi.column(0).iter().copied().collect::<Vec<_>>(),
            vec![1.0, 0.0, 0.0, 0.0]
        );
        assert!(psi.column(1).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn zero_score_at_noiseless_observation() {
        let phi = example_3x8();
        let theta = DVector::from_vec(vec![c(0.3, -1.0), c(0.2, 0.5), c(1.0, 0.0)]);
        let y = phi.intensity_map(&theta).unwrap();
        let s = score_vector(&y, &theta, &phi, &NoiseModel::new(0.5).unwrap()).unwrap();
        assert!(s.norm() < 1e-12);
    }

    #[test]
    fn interior_check() {
        let phi = example_3x8();
        let noise = NoiseModel::new(1.0).unwrap();
        let boundary = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
        assert!(matches!(
            fisher_matrix(&boundary, &phi, &noise),
            Err(Error::NotInterior(_))
        ));
        let rotated = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 2.0)]);
        let r = fisher_matrix(&rotated, &phi, &noise).unwrap();
        assert_eq!(r.theta.len(), 6);
        assert_eq!(r.theta[5], 0.0);
        assert!(r.theta[2] > 0.0);
        assert!(r.positive_definite());
        assert_eq!(r.j_reduced.as_ref().unwrap().nrows(), 5);
    }

    #[test]
    fn identity_trace_is_dimension() {
        // Psi = I at theta = (1, 1, 1), so J = (4 / s^2) I = I
        let phi = identity(3, Field::Real);
        let theta = DVector::from_element(3, c(1.0, 0.0));
        let r = fisher_matrix(&theta, &phi, &NoiseModel::new(2.0).unwrap()).unwrap();
        assert!((r.j.clone() - DMatrix::identity(3, 3)).norm() < 1e-15);
        assert!((crlb_trace(&r).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn singular_fisher_has_no_bound() {
        let phi = identity(2, Field::Real);
        let theta = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let r = fisher_matrix(&theta, &phi, &NoiseModel::new(1.0).unwrap()).unwrap();
        assert!(!r.positive_definite());
        assert!(matches!(crlb_trace(&r), Err(Error::Singular(_))));
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["crlb_trace"].is_null());
        assert_eq!(v["positive_definite"], false);
    }

    #[test]
    fn single_trial_is_rank_one() {
        let phi = example_3x8();
        let theta = DVector::from_vec(vec![c(0.3, -1.0), c(0.2, 0.5), c(1.0, 0.0)]);
        let mc = monte_carlo_fisher(&theta, &phi, &NoiseModel::new(1.0).unwrap(), 1, 4).unwrap();
        assert_eq!(crate::linalg::numerical_rank(&mc, &Default::default()), 1);
        assert!(monte_carlo_fisher(&theta, &phi, &NoiseModel::new(1.0).unwrap(), 0, 4).is_err());
    }

    #[test]
    fn bad_inputs() {
        let (phi, _) = scalar(1.0);
        assert!(NoiseModel::new(0.0).is_err());
        assert!(NoiseModel::new(f64::NAN).is_err());
        let noise = NoiseModel::new(1.0).unwrap();
        assert!(matches!(
            psi_matrix(&DVector::from_element(1, c(0.0, 0.0)), &phi),
            Err(Error::ZeroVector)
        ));
        assert!(psi_matrix(&DVector::from_element(1, c(1.0, 1.0)), &phi).is_err());
        let theta = DVector::from_element(1, c(1.0, 0.0));
        assert!(score_vector(&DVector::zeros(2), &theta, &phi, &noise).is_err());
    }

    #[test]
    fn coordinates_round_trip() {
        let theta = DVector::from_vec(vec![c(0.3, -1.0), c(0.2, 0.5)]);
        let coords = real_coordinates(&theta, Field::Complex);
        assert_eq!(coords.as_slice(), &[0.3, 0.2, -1.0, 0.5]);
        assert_eq!(from_real_coordinates(&coords, Field::Complex), theta);
    }
}
