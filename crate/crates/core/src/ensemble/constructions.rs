//! Named ensembles.

use nalgebra::DMatrix;

use super::{Field, MeasurementEnsemble};
use crate::C64;

/// The standard basis of `R^M` or `C^M` (`N = M`).
pub fn identity(m: usize, field: Field) -> MeasurementEnsemble {
    let eye = DMatrix::<C64>::identity(m, m);
    MeasurementEnsemble::new(field, eye).expect("identity is a valid ensemble")
}

/// A complex `3 x 8` ensemble whose super analysis operator has a
/// one-dimensional null space spanned by a nonsingular matrix.
pub fn example_3x8() -> MeasurementEnsemble {
    let r = |x: f64| C64::new(x, 0.0);
    let i = |x: f64| C64::new(0.0, x);
    #[rustfmt::skip]
    let rows = [
        r(2.0),  r(1.0), r(1.0),  r(0.0), r(0.0),  r(0.0),  r(1.0),  i(1.0),
        r(-1.0), r(0.0), r(0.0),  r(1.0), r(1.0),  r(-1.0), r(-2.0), r(2.0),
        r(0.0),  r(1.0), r(-1.0), r(1.0), r(-1.0), i(2.0),  i(1.0),  r(-1.0),
    ];
    MeasurementEnsemble::complex(DMatrix::from_row_slice(3, 8, &rows)).expect("valid")
}

/// The `3 x 3` fractional discrete Fourier transform `F^alpha`, assembled
/// from its spectral projections onto the discrete Hermite-Gaussian
/// eigenspaces with eigenvalues `1`, `e^{i pi alpha}` and `e^{i pi alpha / 2}`.
pub fn fractional_dft_3(alpha: f64) -> MeasurementEnsemble {
    MeasurementEnsemble::complex(fractional_dft_3_matrix(alpha)).expect("valid")
}

pub(crate) fn fractional_dft_3_matrix(alpha: f64) -> DMatrix<C64> {
    let s3 = 3f64.sqrt();
    let lo = (3.0 - s3) / 2.0;
    let hi = (3.0 + s3) / 2.0;
    #[rustfmt::skip]
    let p0 = DMatrix::from_row_slice(3, 3, &[
        3.0 + s3, s3, s3,
        s3,       lo, lo,
        s3,       lo, lo,
    ]) / 6.0;
    #[rustfmt::skip]
    let p1 = DMatrix::from_row_slice(3, 3, &[
        3.0 - s3, -s3, -s3,
        -s3,      hi,  hi,
        -s3,      hi,  hi,
    ]) / 6.0;
    #[rustfmt::skip]
    let p2 = DMatrix::from_row_slice(3, 3, &[
        0.0, 0.0,  0.0,
        0.0, 1.0,  -1.0,
        0.0, -1.0, 1.0,
    ]) / 2.0;
    let w1 = C64::from_polar(1.0, alpha * std::f64::consts::PI);
    let w2 = C64::from_polar(1.0, alpha * std::f64::consts::FRAC_PI_2);
    p0.map(|x| C64::new(x, 0.0)) + p1.map(|x| w1 * x) + p2.map(|x| w2 * x)
}

/// Concatenates `[F^{a_1} F^{a_2} ...]` into one `3 x 3k` ensemble.
/// `fractional_dft_stack(&[0.0, 0.5, 1.0, 1.5])` is `[I F^{1/2} F F^{3/2}]`.
pub fn fractional_dft_stack(alphas: &[f64]) -> MeasurementEnsemble {
    let mut m = DMatrix::<C64>::zeros(3, 3 * alphas.len());
    for (k, &a) in alphas.iter().enumerate() {
        m.view_mut((0, 3 * k), (3, 3))
            .copy_from(&fractional_dft_3_matrix(a));
    }
    MeasurementEnsemble::complex(m).expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_zero_is_identity() {
        let f0 = fractional_dft_3_matrix(0.0);
        assert!((f0 - DMatrix::<C64>::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn semigroup_on_grid() {
        let grid = [-1.0, -0.25, 0.0, 0.3, 0.5, 1.0, 1.5, 2.75];
        for &a in &grid {
            for &b in &grid {
                let lhs = fractional_dft_3_matrix(a) * fractional_dft_3_matrix(b);
                let rhs = fractional_dft_3_matrix(a + b);
                assert!((lhs - rhs).norm() < 1e-9, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn fractional_powers_are_unitary() {
        for a in [0.5, 1.0, 1.5, 0.123] {
            let f = fractional_dft_3_matrix(a);
            assert!((f.adjoint() * &f - DMatrix::<C64>::identity(3, 3)).norm() < 1e-12);
        }
    }

    #[test]
    fn full_power_is_a_dft() {
        // F^1 has entries of modulus 1/sqrt(3) and F^4 = I
        let f = fractional_dft_3_matrix(1.0);
        for z in f.iter() {
            assert!((z.norm() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        }
        let f4 = &f * &f * &f * &f;
        assert!((f4 - DMatrix::<C64>::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn stack_shape() {
        let phi = fractional_dft_stack(&[0.0, 0.5, 1.0, 1.5]);
        assert_eq!((phi.dim(), phi.len()), (3, 12));
        assert_eq!(identity(4, Field::Real).len(), 4);
        assert_eq!((example_3x8().dim(), example_3x8().len()), (3, 8));
    }
}
