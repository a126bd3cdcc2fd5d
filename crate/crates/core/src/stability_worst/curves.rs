use std::f64::consts::{E, SQRT_2};

use crate::error::{Error, Result};

fn redundancy_check(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 2.0) {
        return Err(Error::InvalidArgument(format!(
            "redundancy must exceed 2, got {r}"
        )));
    }
    Ok(())
}

/// `2^{R / (R - 2)}`.
fn blowup(r: f64) -> f64 {
    2f64.powf(r / (r - 2.0))
}

/// Strong-complement-property constant that an `M x N` standard Gaussian
/// ensemble exceeds with probability at least `1 - e^{-eps M}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremSigma {
    pub sigma: f64,
    /// Set when `N` is odd; the guarantee is stated for even `N`.
    pub odd_n: bool,
}

pub fn theorem_sigma(m: usize, n: usize, eps: f64) -> Result<TheoremSigma> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be positive".into()));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let (mf, nf) = (m as f64, n as f64);
    let r = nf / mf;
    redundancy_check(r)?;
    let sigma =
        (nf - 2.0 * mf + 2.0) / (SQRT_2 * (1.0 + eps / (r - 2.0)).exp() * blowup(r) * nf.sqrt());
    Ok(TheoremSigma {
        sigma,
        odd_n: n % 2 == 1,
    })
}

/// Upper bound on `2 beta / sigma` for a Gaussian ensemble at redundancy `R`
/// and dimension `M`, with `N = R M` taken as a real number.
pub fn curve_a(r: f64, m: usize) -> Result<f64> {
    redundancy_check(r)?;
    if m == 0 {
        return Err(Error::InvalidArgument("M must be positive".into()));
    }
    let mf = m as f64;
    let n = r * mf;
    Ok(2.0 * (n.sqrt() + mf.sqrt()) * SQRT_2 * E * blowup(r) * n.sqrt() / (n - 2.0 * mf + 2.0))
}

/// Dimension-free limit of [`curve_a`] as `M` grows.
pub fn curve_b(r: f64) -> Result<f64> {
    redundancy_check(r)?;
    Ok(2.0 * SQRT_2 * E * (r + r.sqrt()) / (r - 2.0) * blowup(r))
}

/// Number of measurements used for redundancy `R` in dimension `M`:
/// `round(R M)`, bumped to the next even number when odd.
pub fn measurements_for(r: f64, m: usize) -> usize {
    let n = (r * m as f64).round().max(0.0) as usize;
    n + n % 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        // R = 4: 1 / (sqrt2 e^{1.5}) * 10 / (4 * 4)
        let s = theorem_sigma(4, 16, 1.0).unwrap();
        assert!((s.sigma - 0.625 / (SQRT_2 * 1.5f64.exp())).abs() < 1e-15);
        assert!((s.sigma - 0.0986).abs() < 5e-5);
        assert!(!s.odd_n);
        assert!(theorem_sigma(4, 15, 1.0).unwrap().odd_n);

        let b4 = curve_b(4.0).unwrap();
        assert!((b4 - 2.0 * SQRT_2 * E * 12.0).abs() < 1e-12);
        assert!((b4 - 92.26).abs() < 0.01);
        assert!((b4.log10() - 1.965).abs() < 1e-3);
        let b3 = curve_b(3.0).unwrap();
        assert!((b3 - 291.1).abs() < 0.1);
        assert!((b3.log10() - 2.464).abs() < 1e-3);
    }

    #[test]
    fn sigma_decreases_in_eps_and_grows_like_sqrt_n() {
        let mut last = f64::INFINITY;
        for eps in [0.1, 0.5, 1.0, 2.0, 8.0, 64.0] {
            let s = theorem_sigma(8, 32, eps).unwrap().sigma;
            assert!(s < last);
            last = s;
        }
        let ratio = theorem_sigma(4000, 16000, 1.0).unwrap().sigma
            / theorem_sigma(1000, 4000, 1.0).unwrap().sigma;
        let expected = (8002.0 / 16000f64.sqrt()) / (2002.0 / 4000f64.sqrt());
        assert!((ratio - expected).abs() < 1e-12);
        assert!((ratio - 2.0).abs() < 2e-3);
    }

    #[test]
    fn asymptote_is_rejected() {
        assert!(curve_b(2.0).is_err());
        assert!(curve_a(1.5, 4).is_err());
        assert!(theorem_sigma(4, 8, 1.0).is_err());
        assert!(theorem_sigma(4, 16, 0.0).is_err());
    }

    #[test]
    fn curve_a_approaches_curve_b() {
        let b = curve_b(3.0).unwrap();
        let gaps: Vec<f64> = [2, 8, 32, 128]
            .iter()
            .map(|&m| b - curve_a(3.0, m).unwrap())
            .collect();
        assert!(gaps.iter().all(|g| *g > 0.0));
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn even_measurement_counts() {
        assert_eq!(measurements_for(2.5, 4), 10);
        assert_eq!(measurements_for(3.0, 5), 16);
        assert_eq!(measurements_for(2.1, 2), 4);
        assert_eq!(measurements_for(3.5, 4), 14);
    }
}
