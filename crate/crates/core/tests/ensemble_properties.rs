use nalgebra::{DMatrix, DVector};
use phaselab::ensemble::{
    canonicalize, projective_distance, ProjectiveVector, SuperAnalysisOperator,
};
use phaselab::{Field, MeasurementEnsemble, C64};
use proptest::prelude::*;

/// A random ensemble together with a signal, both over the same field.
#[derive(Debug, Clone)]
struct Instance {
    phi: MeasurementEnsemble,
    x: DVector<C64>,
}

fn instance(max_m: usize, max_n: usize) -> impl Strategy<Value = Instance> {
    (1..=max_m, 1..=max_n, any::<bool>()).prop_flat_map(|(m, n, complex)| {
        let entries = prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), m * n);
        let signal = prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), m);
        (entries, signal).prop_map(move |(e, s)| {
            let keep_im = |(re, im): (f64, f64)| C64::new(re, if complex { im } else { 0.0 });
            let matrix = DMatrix::from_iterator(m, n, e.into_iter().map(keep_im));
            let field = if complex { Field::Complex } else { Field::Real };
            Instance {
                phi: MeasurementEnsemble::new(field, matrix).unwrap(),
                x: DVector::from_iterator(m, s.into_iter().map(keep_im)),
            }
        })
    })
}

/// `|<x, phi_n>|^2` written out entry by entry.
fn intensity_oracle(phi: &MeasurementEnsemble, x: &DVector<C64>) -> Vec<f64> {
    (0..phi.len())
        .map(|n| {
            let mut acc = C64::new(0.0, 0.0);
            for m in 0..phi.dim() {
                acc += x[m] * phi.matrix()[(m, n)].conj();
            }
            acc.norm_sqr()
        })
        .collect()
}

fn unit_scalar(field: Field, t: f64) -> C64 {
    match field {
        Field::Real => C64::new(if t < 0.0 { -1.0 } else { 1.0 }, 0.0),
        Field::Complex => C64::from_polar(1.0, t),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn lift_identity(inst in instance(6, 10)) {
        let op = SuperAnalysisOperator::for_ensemble(&inst.phi).unwrap();
        let lifted = op.apply(&phaselab::ensemble::lift(&inst.x)).unwrap();
        let direct = inst.phi.intensity_map(&inst.x).unwrap();
        let oracle = intensity_oracle(&inst.phi, &inst.x);
        for n in 0..inst.phi.len() {
            let scale = 1.0 + inst.x.norm_squared() * inst.phi.column(n).norm_squared();
            prop_assert!((lifted[n] - direct[n]).abs() <= 1e-10 * scale);
            prop_assert!((direct[n] - oracle[n]).abs() <= 1e-12 * scale);
            prop_assert!(direct[n] >= 0.0);
        }
    }

    #[test]
    fn gauge_invariance(inst in instance(6, 10), t in -3.2..3.2f64) {
        let c = unit_scalar(inst.phi.field(), t);
        let a = inst.phi.intensity_map(&inst.x).unwrap();
        let b = inst.phi.intensity_map(&(&inst.x * c)).unwrap();
        prop_assert!((&a - &b).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn canonical_form_is_idempotent_and_gauge_invariant(inst in instance(6, 1), t in -3.2..3.2f64) {
        prop_assume!(inst.x.norm() > 1e-6);
        let c = unit_scalar(inst.phi.field(), t);
        let a = canonicalize(&inst.x).unwrap();
        prop_assert!((canonicalize(&a).unwrap() - &a).norm() <= 1e-12 * a.norm());
        let b = canonicalize(&(&inst.x * c)).unwrap();
        prop_assert!((&a - &b).norm() <= 1e-12 * (1.0 + a.norm()));
        let last = a.iter().rev().find(|z| z.norm() > 0.0).unwrap();
        prop_assert!(last.re > 0.0 && last.im == 0.0);
    }

    #[test]
    fn b_map_is_even(inst in instance(6, 10)) {
        let phi = inst.phi.as_complex();
        let a = phi.b_map(&inst.x).unwrap();
        let b = phi.b_map(&-&inst.x).unwrap();
        prop_assert!((&a - &b).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn sign_distance_is_a_metric(
        m in 1usize..6,
        seed in any::<u64>(),
    ) {
        let mut rng = phaselab::rng::seeded(seed);
        let mut draw = || ProjectiveVector::real(&phaselab::rng::gaussian_vector(&mut rng, m));
        let (x, y, z) = (draw(), draw(), draw());
        let d = |a: &ProjectiveVector, b: &ProjectiveVector| projective_distance(a, b).unwrap();
        prop_assert!(d(&x, &x) == 0.0);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-15);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        let neg = ProjectiveVector::real(&-x.representative().map(|c| c.re));
        prop_assert!(d(&x, &neg) == 0.0);
    }
}
