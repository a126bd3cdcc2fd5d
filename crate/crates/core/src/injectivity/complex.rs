use nalgebra::{DMatrix, DVector};

use super::real::{annihilator, complement_property};
use super::{CheckOptions, InjectivityVerdict, Method, Status};
use crate::ensemble::{Field, MeasurementEnsemble, OperatorNullSpace, SuperAnalysisOperator};
use crate::error::{Error, Result};
use crate::linalg::{
    fix_phase, hermitian_eigen, null_space, numerical_rank, spectral_norm, RankTolerance,
};
use crate::rng::{complex_gaussian_vector, derive_seed, seeded};
use crate::subsets::{full_mask, mask_of};
use crate::C64;

const BISECTION_STEPS: usize = 200;

fn require_complex(phi: &MeasurementEnsemble, what: &str) -> Result<()> {
    match phi.field() {
        Field::Complex => Ok(()),
        Field::Real => Err(Error::FieldMismatch(format!(
            "{what} requires a complex ensemble (use real_injectivity for real ones)"
        ))),
    }
}

fn trailing(sv: &[f64], k: usize) -> Vec<f64> {
    sv[sv.len().saturating_sub(k)..].to_vec()
}

fn with_nullspace(mut v: InjectivityVerdict, ns: &OperatorNullSpace) -> InjectivityVerdict {
    v.nullity = Some(ns.nullity());
    v.diagnostics.rank_threshold = Some(ns.threshold);
    v.diagnostics.trailing_singular_values = trailing(&ns.singular_values, 3);
    v
}

/// `|det H| / |H|_2^M`, the scale-free nonsingularity measure of `H`.
fn det_ratio(h: &DMatrix<C64>) -> f64 {
    let norm = spectral_norm(h);
    if norm == 0.0 {
        return 0.0;
    }
    h.determinant().norm() / norm.powi(h.nrows() as i32)
}

/// Splits a self-adjoint `H` of rank at most two into `x x^* - y y^*` using
/// its two eigenpairs of largest modulus.
///
/// When the two eigenvalues have opposite signs this is exact for rank two.
/// When they share a sign, or `H` has rank one, the returned vectors are
/// eigenvectors scaled by `|lambda|^{1/2}` (or one of them is zero); for a null
/// matrix of the super analysis operator both then have zero intensity
/// measurements, which still makes them a collision.
pub fn lemma_witness(h: &DMatrix<C64>) -> (DVector<C64>, DVector<C64>) {
    let m = h.nrows();
    let (values, vectors) = hermitian_eigen(h);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
    let scaled = |i: usize| fix_phase(&(vectors.column(i) * C64::from(values[i].abs().sqrt())));
    let zero = DVector::zeros(m);
    if m == 0 {
        return (zero.clone(), zero);
    }
    let first = order[0];
    if m == 1 || values[order[1]].abs() <= 1e-12 * values[first].abs() {
        return (scaled(first), zero);
    }
    let second = order[1];
    if values[first] * values[second] < 0.0 {
        let (pos, neg) = if values[first] > 0.0 {
            (first, second)
        } else {
            (second, first)
        };
        (scaled(pos), scaled(neg))
    } else {
        (scaled(first), scaled(second))
    }
}

/// Finds `t` in `[0, pi]` with `det(A cos t + B sin t) = 0` by bisection. For
/// odd `M` the endpoints have opposite signs, so a root always exists.
fn singular_combination(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let pencil = |t: f64| a * C64::from(t.cos()) + b * C64::from(t.sin());
    let f = |t: f64| pencil(t).determinant().re;
    let (mut lo, mut hi) = (0.0, std::f64::consts::PI);
    let f_lo = f(lo);
    if f_lo == 0.0 {
        return pencil(lo);
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return pencil(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < f64::EPSILON {
            break;
        }
    }
    pencil(0.5 * (lo + hi))
}

fn collision_from(
    phi: &MeasurementEnsemble,
    verdict: InjectivityVerdict,
    h: &DMatrix<C64>,
) -> InjectivityVerdict {
    let (x, y) = lemma_witness(h);
    verdict.with_checked_witness(phi, x, y)
}

/// Decides injectivity of a complex ensemble in `C^3`.
///
/// Nullity 0 of the super analysis operator means injective, and so does
/// nullity 1 with a nonsingular spanner. A singular spanner has rank at most
/// two and yields a collision directly; with nullity two or more, a singular
/// matrix in the span of two null matrices is found by bisection on the
/// determinant along `A cos t + B sin t`.
pub fn hmw_test(phi: &MeasurementEnsemble, opts: &CheckOptions) -> Result<InjectivityVerdict> {
    require_complex(phi, "hmw_test")?;
    if phi.dim() != 3 {
        return Err(Error::InvalidArgument(format!(
            "hmw_test requires M = 3, got M = {}",
            phi.dim()
        )));
    }
    let ns = SuperAnalysisOperator::for_ensemble(phi)?.null_space(&opts.rank_tol);
    let verdict = with_nullspace(InjectivityVerdict::new(Status::Injective, Method::Hmw), &ns);
    match ns.matrices.as_slice() {
        [] => Ok(verdict),
        [h] => {
            let ratio = det_ratio(h);
            let mut verdict = verdict;
            verdict.diagnostics.det_ratio = Some(ratio);
            if ratio > opts.det_tol {
                Ok(verdict)
            } else {
                Ok(collision_from(phi, verdict, h))
            }
        }
        [a, b, ..] => {
            let h = singular_combination(a, b);
            let mut verdict = verdict;
            verdict.diagnostics.det_ratio = Some(det_ratio(&h));
            Ok(collision_from(phi, verdict, &h))
        }
    }
}

/// Classifies a complex ensemble from the null space of its super analysis
/// operator: any null matrix of rank at most two gives a collision, while a
/// trivial null space means injective.
///
/// With nullity one the spanner decides. With nullity two or more, `M <= 2`
/// always collides (every nonzero matrix has rank at most two) and `M = 3`
/// defers to [`hmw_test`]. For `M > 3` the basis matrices are checked for
/// rank at most two, and otherwise the verdict is `Indeterminate`.
pub fn nullspace_classifier(
    phi: &MeasurementEnsemble,
    opts: &CheckOptions,
) -> Result<InjectivityVerdict> {
    require_complex(phi, "nullspace_classifier")?;
    let m = phi.dim();
    let ns = SuperAnalysisOperator::for_ensemble(phi)?.null_space(&opts.rank_tol);
    let mut verdict = with_nullspace(
        InjectivityVerdict::new(Status::Injective, Method::Nullspace),
        &ns,
    );
    match ns.matrices.as_slice() {
        [] => Ok(verdict),
        [h] => {
            let rank = numerical_rank(h, &opts.rank_tol);
            verdict.diagnostics.spanner_rank = Some(rank);
            verdict.diagnostics.det_ratio = Some(det_ratio(h));
            if rank >= 3 {
                Ok(verdict)
            } else {
                Ok(collision_from(phi, verdict, h))
            }
        }
        [first, ..] if m <= 2 => Ok(collision_from(phi, verdict, first)),
        _ if m == 3 => {
            let mut v = hmw_test(phi, opts)?;
            v.method = Method::Nullspace;
            Ok(v)
        }
        matrices => {
            if let Some(h) = matrices
                .iter()
                .find(|h| numerical_rank(*h, &opts.rank_tol) <= 2)
            {
                return Ok(collision_from(phi, verdict, h));
            }
            verdict.status = Status::Indeterminate;
            verdict.reason = Some(format!(
                "nullity {} >= 2 with M = {m} > 3: no null matrix of rank <= 2 was found, and a \
                 singular null matrix may still have rank >= 3",
                matrices.len()
            ));
            Ok(verdict)
        }
    }
}

/// Rejects complex ensembles that fail the complement property, which is
/// necessary for injectivity. Returns `None` when the property holds.
///
/// For a violating `S`, `u` orthogonal to `{phi_n}_{n in S}` and `v`
/// orthogonal to the complement give `A(u + v) = A(u - v)`. If those two
/// happen to be equivalent modulo a global phase, `u` and `v` are parallel
/// and `A(u) = 0 = A(0)` is used instead.
pub fn cp_necessity_filter(
    phi: &MeasurementEnsemble,
    opts: &CheckOptions,
) -> Result<Option<InjectivityVerdict>> {
    require_complex(phi, "cp_necessity_filter")?;
    let (holds, subset) = complement_property(phi, opts)?;
    if holds {
        return Ok(None);
    }
    let sub = subset.expect("violation carries a subset");
    let s = mask_of(&sub.subset);
    let sc = full_mask(phi.len()) ^ s;
    let mut verdict = InjectivityVerdict::new(Status::NotInjective, Method::CpNecessity);
    verdict.subset = Some(sub);
    let (Some(u), Some(v)) = (
        annihilator(phi, s, &opts.rank_tol),
        annihilator(phi, sc, &opts.rank_tol),
    ) else {
        verdict.status = Status::Indeterminate;
        verdict.reason = Some("violating subset found but no annihilating vector".into());
        return Ok(Some(verdict));
    };
    let primary = verdict.clone().with_checked_witness(phi, &u + &v, &u - &v);
    if primary.status == Status::NotInjective {
        return Ok(Some(primary));
    }
    let fallback = verdict.with_checked_witness(phi, u.clone(), DVector::zeros(phi.dim()));
    Ok(Some(if fallback.status == Status::NotInjective {
        fallback
    } else {
        primary
    }))
}

/// Real `2M x N` matrix whose columns are `phi_n phi_n^* u` with real parts
/// stacked over imaginary parts.
fn span_matrix(phi: &MeasurementEnsemble, u: &DVector<C64>) -> DMatrix<f64> {
    let m = phi.dim();
    let coeffs = phi.matrix().ad_mul(u);
    let images = phi.matrix() * DMatrix::from_diagonal(&coeffs);
    DMatrix::from_fn(2 * m, phi.len(), |r, c| {
        if r < m {
            images[(r, c)].re
        } else {
            images[(r - m, c)].im
        }
    })
}

fn check_probe(phi: &MeasurementEnsemble, u: &DVector<C64>) -> Result<()> {
    require_complex(phi, "span_condition")?;
    if u.len() != phi.dim() {
        return Err(Error::DimensionMismatch {
            expected: phi.dim(),
            actual: u.len(),
        });
    }
    if u.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Err(Error::ZeroVector);
    }
    Ok(())
}

/// Real dimension of `span{phi_n phi_n^* u}` inside `C^M = R^{2M}`. It never
/// exceeds `2M - 1`, and any `u` with a smaller value certifies that the
/// ensemble is not injective.
pub fn span_condition(
    phi: &MeasurementEnsemble,
    u: &DVector<C64>,
    tol: &RankTolerance,
) -> Result<usize> {
    check_probe(phi, u)?;
    Ok(numerical_rank(&span_matrix(phi, u), tol))
}

/// Draws `probes` seeded Gaussian vectors and returns the first one whose
/// span dimension falls below `2M - 1`, if any.
pub fn span_probe(
    phi: &MeasurementEnsemble,
    probes: usize,
    seed: u64,
    tol: &RankTolerance,
) -> Result<Option<(DVector<C64>, usize)>> {
    require_complex(phi, "span_probe")?;
    let target = 2 * phi.dim() - 1;
    for k in 0..probes {
        let mut rng = seeded(derive_seed(seed, &[k as u64]));
        let u = complex_gaussian_vector(&mut rng, phi.dim());
        let dim = span_condition(phi, &u, tol)?;
        if dim < target {
            return Ok(Some((u, dim)));
        }
    }
    Ok(None)
}

/// Turns a span-deficient `u` into a collision: a unit `v` that is orthogonal
/// in `R^{2M}` to every `phi_n phi_n^* u` and to `iu` gives
/// `A(u + v) = A(u - v)`.
pub fn span_witness(
    phi: &MeasurementEnsemble,
    u: &DVector<C64>,
    tol: &RankTolerance,
) -> Result<InjectivityVerdict> {
    check_probe(phi, u)?;
    let m = phi.dim();
    let u = u.unscale(u.norm());
    let s = span_matrix(phi, &u);
    let dim = numerical_rank(&s, tol);
    let mut constraints = DMatrix::zeros(2 * m, phi.len() + 1);
    constraints
        .view_mut((0, 0), (2 * m, phi.len()))
        .copy_from(&s);
    for r in 0..m {
        let iu = C64::i() * u[r];
        constraints[(r, phi.len())] = iu.re;
        constraints[(r + m, phi.len())] = iu.im;
    }
    let ns = null_space(&constraints.transpose(), tol);
    let mut verdict = InjectivityVerdict::new(Status::NotInjective, Method::SpanCondition);
    verdict.diagnostics.span_dimension = Some(dim);
    let Some(v) = ns.basis.first() else {
        verdict.status = Status::Indeterminate;
        verdict.reason = Some(format!(
            "span dimension {dim} leaves no direction orthogonal to iu"
        ));
        return Ok(verdict);
    };
    let v = DVector::from_fn(m, |r, _| C64::new(v[r], v[r + m]));
    Ok(verdict.with_checked_witness(phi, &u + &v, &u - &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{example_3x8, fractional_dft_stack, identity, lift};
    use crate::injectivity::verify_witness;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn three_vectors() -> MeasurementEnsemble {
        MeasurementEnsemble::from_real_columns(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]])
            .unwrap()
            .as_complex()
    }

    fn assert_sound(phi: &MeasurementEnsemble, v: &InjectivityVerdict) {
        assert_eq!(v.status, Status::NotInjective, "{v:?}");
        let w = v.witness.as_ref().unwrap();
        assert!(verify_witness(phi, &w.x, &w.y).is_sound());
        let op = SuperAnalysisOperator::for_ensemble(phi).unwrap();
        let d = lift(&w.x) - lift(&w.y);
        let scale = 1.0 + w.x.norm_squared() + w.y.norm_squared();
        assert!(op.apply(&d).unwrap().norm() <= 1e-8 * scale);
        assert!(numerical_rank(&d, &RankTolerance::default()) <= 2);
    }

    #[test]
    fn paper_example_is_injective() {
        let v = hmw_test(&example_3x8(), &CheckOptions::default()).unwrap();
        assert_eq!(v.status, Status::Injective);
        assert_eq!(v.nullity, Some(1));
        assert!(v.diagnostics.det_ratio.unwrap() > 1e-9);
    }

    #[test]
    fn fractional_dft_stack_collides() {
        // the four fractional powers share eigenprojections, which leaves a
        // three-dimensional null space; the collision is checked independently
        // in the acceptance suite
        let phi = fractional_dft_stack(&[0.0, 0.5, 1.0, 1.5]);
        let v = hmw_test(&phi, &CheckOptions::default()).unwrap();
        assert_eq!(v.nullity, Some(3));
        assert_sound(&phi, &v);
    }

    #[test]
    fn short_m3_ensembles_collide() {
        let phi = MeasurementEnsemble::complex(example_3x8().matrix().columns(0, 7).into_owned())
            .unwrap();
        let v = hmw_test(&phi, &CheckOptions::default()).unwrap();
        assert_eq!(v.nullity, Some(2));
        assert_sound(&phi, &v);
    }

    #[test]
    fn m2_examples() {
        let opts = CheckOptions::default();
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(2, 4, &[
            c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0),
            c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0),
        ]);
        let phi = MeasurementEnsemble::complex(m).unwrap();
        let v = nullspace_classifier(&phi, &opts).unwrap();
        assert_eq!((v.status, v.nullity), (Status::Injective, Some(0)));

        let short = MeasurementEnsemble::complex(phi.matrix().columns(0, 3).into_owned()).unwrap();
        let v = nullspace_classifier(&short, &opts).unwrap();
        assert_sound(&short, &v);
    }

    #[test]
    fn real_vectors_fail_in_complex_space() {
        let phi = three_vectors();
        let v = nullspace_classifier(&phi, &CheckOptions::default()).unwrap();
        assert_sound(&phi, &v);
        let w = v.witness.unwrap();
        // equivalent to ((1, i), (1, -i)) up to scale and phases
        let (x, y) = (w.x.unscale(w.x[0].norm()), w.y.unscale(w.y[0].norm()));
        let ratio_x = x[1] / x[0];
        let ratio_y = y[1] / y[0];
        assert!((ratio_x - ratio_y.conj()).norm() < 1e-10);
        assert!((ratio_x.im.abs() - 1.0).abs() < 1e-10 && ratio_x.re.abs() < 1e-10);
    }

    #[test]
    fn rejects_real_and_wrong_dimension() {
        let opts = CheckOptions::default();
        assert!(nullspace_classifier(&identity(2, Field::Real), &opts).is_err());
        assert!(hmw_test(&identity(2, Field::Complex), &opts).is_err());
        assert!(hmw_test(&identity(3, Field::Real), &opts).is_err());
    }

    #[test]
    fn cp_filter() {
        let opts = CheckOptions::default();
        let phi = identity(2, Field::Complex);
        let v = cp_necessity_filter(&phi, &opts).unwrap().unwrap();
        assert_sound(&phi, &v);
        assert!(cp_necessity_filter(&three_vectors(), &opts)
            .unwrap()
            .is_none());
    }

    #[test]
    fn span_condition_examples() {
        let tol = RankTolerance::default();
        let phi = three_vectors();
        // x - y for the collision (1, i), (1, -i)
        let u = DVector::from_vec(vec![c(0.0, 0.0), c(0.0, 2.0)]);
        assert_eq!(span_condition(&phi, &u, &tol).unwrap(), 2);
        assert_sound(&phi, &span_witness(&phi, &u, &tol).unwrap());
        let u = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        assert!(span_condition(&phi, &u, &tol).unwrap() <= 3);
        assert!(matches!(
            span_condition(&phi, &DVector::zeros(2), &tol),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn span_condition_on_injective_example() {
        let phi = example_3x8();
        let tol = RankTolerance::default();
        assert_eq!(span_probe(&phi, 100, 3, &tol).unwrap(), None);
    }

    #[test]
    fn lemma_witness_reconstructs_rank_two() {
        let x = DVector::from_vec(vec![c(1.0, 0.5), c(-0.3, 0.0), c(0.2, 1.0)]);
        let y = DVector::from_vec(vec![c(0.0, 1.0), c(2.0, 0.1), c(0.4, -0.7)]);
        let h = lift(&x) - lift(&y);
        let (a, b) = lemma_witness(&h);
        assert!((lift(&a) - lift(&b) - h).norm() < 1e-12);
    }
}
