use nalgebra::DVector;
use serde::Serialize;

use super::scp::{scp_sigma, ScpReport};
use crate::ensemble::{sign_distance, MeasurementEnsemble};
use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::rng::{derive_seed, gaussian, gaussian_vector, seeded};
use crate::C64;

/// Pairs closer than this (modulo sign) are skipped by the sampler.
pub const MIN_PAIR_DISTANCE: f64 = 1e-9;

/// Spectral norm of the `M x N` synthesis matrix, which is the upper
/// Lipschitz constant of `x -> |Phi^* x|` modulo sign.
pub fn operator_norm(phi: &MeasurementEnsemble) -> f64 {
    match phi.real_matrix() {
        Some(r) => spectral_norm(&r),
        None => spectral_norm(phi.matrix()),
    }
}

/// `(sigma, sqrt(2) sigma)`, the interval known to contain the lower
/// Lipschitz constant.
pub fn alpha_bounds(report: &ScpReport) -> (f64, f64) {
    (report.sigma, std::f64::consts::SQRT_2 * report.sigma)
}

fn require_real(phi: &MeasurementEnsemble) -> Result<nalgebra::DMatrix<f64>> {
    phi.real_matrix().ok_or_else(|| {
        Error::FieldMismatch("Lipschitz ratios are defined for real ensembles".into())
    })
}

fn root_intensities(phi_t: &nalgebra::DMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    (phi_t * x).abs()
}

/// `|sqrt A(x) - sqrt A(y)| / d(x, y)` with `d` the distance modulo sign, or
/// `None` when `d` is below [`MIN_PAIR_DISTANCE`].
pub fn lipschitz_ratio(
    phi: &MeasurementEnsemble,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<Option<f64>> {
    let r = require_real(phi)?;
    for v in [x, y] {
        if v.len() != phi.dim() {
            return Err(Error::DimensionMismatch {
                expected: phi.dim(),
                actual: v.len(),
            });
        }
    }
    let d = sign_distance(x, y);
    if d < MIN_PAIR_DISTANCE {
        return Ok(None);
    }
    let rt = r.transpose();
    Ok(Some(
        (root_intensities(&rt, x) - root_intensities(&rt, y)).norm() / d,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSample {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// The pair attaining `min_ratio`.
    pub argmin: (DVector<f64>, DVector<f64>),
    /// Pairs that entered the extremes, including the deterministic one.
    pub evaluated: usize,
    pub skipped: usize,
}

fn random_point(rng: &mut crate::rng::Rng, m: usize) -> DVector<f64> {
    loop {
        let g = gaussian_vector(rng, m);
        let norm = g.norm();
        if norm > 0.0 {
            return g * (gaussian(rng).abs() / norm);
        }
    }
}

/// Extremes of the Lipschitz ratio over `pairs` random pairs plus the pair
/// `(v, 0)` with `v` the top left singular vector of `Phi`, which attains the
/// upper constant exactly.
///
/// Each point is uniform on the sphere times an `|N(0, 1)|` radius; pair `k`
/// draws from its own stream `derive_seed(seed, [k])`.
pub fn sample_lipschitz_ratios(
    phi: &MeasurementEnsemble,
    pairs: usize,
    seed: u64,
) -> Result<RatioSample> {
    let r = require_real(phi)?;
    if pairs == 0 {
        return Err(Error::InvalidArgument("pairs must be at least 1".into()));
    }
    let m = phi.dim();
    let rt = r.transpose();
    let ratio = |x: &DVector<f64>, y: &DVector<f64>| {
        let d = sign_distance(x, y);
        (d >= MIN_PAIR_DISTANCE)
            .then(|| (root_intensities(&rt, x) - root_intensities(&rt, y)).norm() / d)
    };

    let top = {
        let svd = r.clone().svd(true, false);
        let u = svd.u.expect("u requested");
        let k = svd.singular_values.imax();
        u.column(k).into_owned()
    };
    let zero = DVector::zeros(m);
    let top_ratio = ratio(&top, &zero).expect("unit vector is far from zero");
    let mut sample = RatioSample {
        min_ratio: top_ratio,
        max_ratio: top_ratio,
        argmin: (top, zero),
        evaluated: 1,
        skipped: 0,
    };
    for k in 0..pairs {
        let mut rng = seeded(derive_seed(seed, &[k as u64]));
        let x = random_point(&mut rng, m);
        let y = random_point(&mut rng, m);
        match ratio(&x, &y) {
            None => sample.skipped += 1,
            Some(q) => {
                sample.evaluated += 1;
                sample.max_ratio = sample.max_ratio.max(q);
                if q < sample.min_ratio {
                    sample.min_ratio = q;
                    sample.argmin = (x, y);
                }
            }
        }
    }
    Ok(sample)
}

/// Worst-case stability summary of a real ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzReport {
    pub beta: f64,
    pub sigma: f64,
    pub alpha_lower: f64,
    pub alpha_upper: f64,
    /// `2 beta / sigma`, infinite when `sigma = 0`.
    pub stability_constant_upper: f64,
    pub sampled_min_ratio: f64,
    pub sampled_max_ratio: f64,
    pub samples: usize,
    pub seed: u64,
    pub scp: ScpReport,
}

impl Serialize for LipschitzReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let finite = self.stability_constant_upper.is_finite();
        let mut st = s.serialize_struct("LipschitzReport", 11)?;
        st.serialize_field("beta", &self.beta)?;
        st.serialize_field("sigma", &self.sigma)?;
        st.serialize_field("alpha_lower", &self.alpha_lower)?;
        st.serialize_field("alpha_upper", &self.alpha_upper)?;
        st.serialize_field(
            "stability_constant_upper",
            &finite.then_some(self.stability_constant_upper),
        )?;
        st.serialize_field("stability_constant_infinite", &!finite)?;
        st.serialize_field("sampled_min_ratio", &self.sampled_min_ratio)?;
        st.serialize_field("sampled_max_ratio", &self.sampled_max_ratio)?;
        st.serialize_field("samples", &self.samples)?;
        st.serialize_field("seed", &self.seed)?;
        st.serialize_field("scp", &self.scp)?;
        st.end()
    }
}

pub fn lipschitz_report(
    phi: &MeasurementEnsemble,
    samples: usize,
    seed: u64,
    budget: usize,
) -> Result<LipschitzReport> {
    require_real(phi)?;
    let scp = scp_sigma(phi, budget)?;
    let beta = operator_norm(phi);
    let (alpha_lower, alpha_upper) = alpha_bounds(&scp);
    let sample = sample_lipschitz_ratios(phi, samples, seed)?;
    let stability_constant_upper = if scp.sigma > 0.0 {
        2.0 * beta / scp.sigma
    } else {
        f64::INFINITY
    };
    Ok(LipschitzReport {
        beta,
        sigma: scp.sigma,
        alpha_lower,
        alpha_upper,
        stability_constant_upper,
        sampled_min_ratio: sample.min_ratio,
        sampled_max_ratio: sample.max_ratio,
        samples,
        seed,
        scp,
    })
}

/// Difference quotients of the intensity map along `phi_n -> (C + 1) phi_n`:
/// `|A((C+1) phi_n) - A(phi_n)| / d((C+1) phi_n, phi_n)` for each `C`. They
/// equal `((C+1)^2 - 1) / C * |A(phi_n)| / |phi_n|` and grow without bound, so
/// the intensity map is not Lipschitz.
pub fn holder_divergence_probe(
    phi: &MeasurementEnsemble,
    n: usize,
    c_values: &[f64],
) -> Result<Vec<f64>> {
    if n >= phi.len() {
        return Err(Error::InvalidArgument(format!(
            "index {n} out of range for N = {}",
            phi.len()
        )));
    }
    let f = phi.column(n);
    if f.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    if let Some(c) = c_values.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "C must be positive and finite, got {c}"
        )));
    }
    let base = phi.intensity_map(&f)?;
    c_values
        .iter()
        .map(|&c| {
            let scaled = &f * C64::from(c + 1.0);
            let num = (phi.intensity_map(&scaled)? - &base).norm();
            // distance modulo unit scalars: sqrt(|x|^2 + |y|^2 - 2 |<x, y>|)
            let (nx, ny) = (scaled.norm(), f.norm());
            let d = (nx * nx + ny * ny - 2.0 * scaled.dotc(&f).norm())
                .max(0.0)
                .sqrt();
            Ok(num / d)
        })
        .collect()
}
