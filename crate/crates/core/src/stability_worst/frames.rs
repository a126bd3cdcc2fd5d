use nalgebra::DMatrix;

use crate::ensemble::MeasurementEnsemble;
use crate::error::{Error, Result};
use crate::rng::{complex_gaussian_matrix, gaussian_matrix, seeded};

/// Real `M x N` frame built from the first `M / 2` rows of the `N x N` DFT
/// (entries `e^{-2 pi i m n / N}`), with real parts stacked over imaginary
/// parts and scaled by `sqrt(2 / M)` so that every column has unit norm.
///
/// Nearby columns are nearly parallel, so splitting the index set into two
/// contiguous halves leaves both sides with a small frame bound.
pub fn localized_fourier_frame(m: usize, n: usize) -> Result<MeasurementEnsemble> {
    if m == 0 || n == 0 || m % 2 == 1 || n % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "M and N must be positive and even (M = {m}, N = {n})"
        )));
    }
    if n < m {
        return Err(Error::InvalidArgument(format!(
            "need N >= M (M = {m}, N = {n})"
        )));
    }
    let half = m / 2;
    let scale = (2.0 / m as f64).sqrt();
    let matrix = DMatrix::from_fn(m, n, |r, c| {
        let k = (r % half) as f64;
        let angle = -2.0 * std::f64::consts::PI * k * c as f64 / n as f64;
        scale * if r < half { angle.cos() } else { angle.sin() }
    });
    MeasurementEnsemble::real(matrix)
}

/// Real ensemble with i.i.d. standard normal entries drawn column by column.
pub fn gaussian_ensemble(m: usize, n: usize, seed: u64) -> Result<MeasurementEnsemble> {
    MeasurementEnsemble::real(gaussian_matrix(&mut seeded(seed), m, n))
}

/// Complex ensemble with i.i.d. standard complex normal entries.
pub fn complex_gaussian_ensemble(m: usize, n: usize, seed: u64) -> Result<MeasurementEnsemble> {
    MeasurementEnsemble::complex(complex_gaussian_matrix(&mut seeded(seed), m, n))
}
