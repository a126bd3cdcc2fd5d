use nalgebra::{ComplexField, DMatrix, DVector};

use super::{CheckOptions, InjectivityVerdict, Method, Status, SubsetWitness};
use crate::ensemble::{Field, MeasurementEnsemble, SuperAnalysisOperator};
use crate::error::{Error, Result};
use crate::linalg::{fix_phase, fix_sign, null_space, numerical_rank, to_complex, RankTolerance};
use crate::subsets::{self, full_mask, lex_cmp, par_chunks, subset_at};
use crate::C64;

fn select<T: nalgebra::Scalar + Copy>(cols: &DMatrix<T>, mask: u64) -> DMatrix<T> {
    let idx = subsets::indices(mask);
    DMatrix::from_fn(cols.nrows(), idx.len(), |r, c| cols[(r, idx[c])])
}

fn spans<T>(cols: &DMatrix<T>, mask: u64, tol: &RankTolerance) -> bool
where
    T: ComplexField<RealField = f64> + Copy,
{
    let m = cols.nrows();
    mask.count_ones() as usize >= m && numerical_rank(&select(cols, mask), tol) == m
}

/// Lexicographically smallest `S` (containing index 0) such that neither
/// side spans, or `None` when the complement property holds.
pub(crate) fn find_cp_violation<T>(cols: &DMatrix<T>, tol: &RankTolerance) -> Option<u64>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let (m, n) = cols.shape();
    let full = full_mask(n);
    let per_chunk = par_chunks(n, |range| {
        let mut best: Option<u64> = None;
        for i in range {
            let s = subset_at(i);
            let sc = full ^ s;
            let small = (s.count_ones() as usize) < m && (sc.count_ones() as usize) < m;
            let violated = small || (!spans(cols, s, tol) && !spans(cols, sc, tol));
            if violated && best.is_none_or(|b| lex_cmp(s, b).is_lt()) {
                best = Some(s);
            }
        }
        best
    });
    per_chunk
        .into_iter()
        .flatten()
        .min_by(|&a, &b| lex_cmp(a, b))
}

fn check_budget(n: usize, budget: usize) -> Result<()> {
    if n > budget.min(subsets::MAX_N) {
        return Err(Error::BudgetExceeded { n, budget });
    }
    Ok(())
}

/// Whether every `S` has `{phi_n : n in S}` or its complement spanning the
/// ambient space, with a violating `S` when it fails. Spans are taken over
/// the ensemble's field.
pub fn complement_property(
    phi: &MeasurementEnsemble,
    opts: &CheckOptions,
) -> Result<(bool, Option<SubsetWitness>)> {
    check_budget(phi.len(), opts.cp_budget)?;
    let violation = match phi.real_matrix() {
        Some(r) => find_cp_violation(&r, &opts.rank_tol),
        None => find_cp_violation(phi.matrix(), &opts.rank_tol),
    };
    Ok(match violation {
        None => (true, None),
        Some(s) => (
            false,
            Some(SubsetWitness {
                subset: subsets::indices(s),
                spanned_s: false,
                spanned_complement: false,
            }),
        ),
    })
}

/// Whether every `M`-subset of the vectors spans. Requires `N >= M`.
pub fn full_spark(phi: &MeasurementEnsemble, opts: &CheckOptions) -> Result<bool> {
    let (m, n) = (phi.dim(), phi.len());
    if n < m {
        return Err(Error::InvalidArgument(format!(
            "full spark needs N >= M (N = {n}, M = {m})"
        )));
    }
    let count = binomial(n as u64, m as u64);
    if count > opts.full_spark_budget {
        return Err(Error::BudgetExceeded {
            n,
            budget: opts.full_spark_budget as usize,
        });
    }
    let mut combo: Vec<usize> = (0..m).collect();
    loop {
        let sub = phi.select_columns(&combo);
        let rank = match phi.field() {
            Field::Real => numerical_rank(&sub.map(|z| z.re), &opts.rank_tol),
            Field::Complex => numerical_rank(&sub, &opts.rank_tol),
        };
        if rank < m {
            return Ok(false);
        }
        // next combination in lexicographic order
        let Some(pos) = (0..m).rev().find(|&i| combo[i] < n - m + i) else {
            return Ok(true);
        };
        combo[pos] += 1;
        for i in pos + 1..m {
            combo[i] = combo[i - 1] + 1;
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// A unit vector orthogonal (in the field's inner product) to every column of
/// `phi` indexed by `mask`, when one exists.
pub(crate) fn annihilator(
    phi: &MeasurementEnsemble,
    mask: u64,
    tol: &RankTolerance,
) -> Option<DVector<C64>> {
    let sub = phi.select_columns(&subsets::indices(mask));
    if sub.ncols() == 0 {
        let mut e = DVector::zeros(phi.dim());
        e[0] = C64::new(1.0, 0.0);
        return Some(e);
    }
    match phi.field() {
        Field::Real => {
            let ns = null_space(&sub.map(|z| z.re).transpose(), tol);
            ns.basis.first().map(|u| to_complex(&fix_sign(u)))
        }
        Field::Complex => {
            let ns = null_space(&sub.adjoint(), tol);
            ns.basis.first().map(fix_phase)
        }
    }
}

/// Decides injectivity of a real ensemble modulo sign.
///
/// Injective iff the complement property holds. On a violation `S`, nonzero
/// `u` orthogonal to `{phi_n}_{n in S}` and `v` orthogonal to the complement
/// give the colliding pair `(u + v, u - v)`.
pub fn real_injectivity(
    phi: &MeasurementEnsemble,
    opts: &CheckOptions,
) -> Result<InjectivityVerdict> {
    if phi.field() != Field::Real {
        return Err(Error::FieldMismatch(
            "real_injectivity requires a real ensemble".into(),
        ));
    }
    let op = SuperAnalysisOperator::for_ensemble(phi)?;
    let ns = op.real_symmetric_null_space(&opts.rank_tol);
    let (holds, subset) = complement_property(phi, opts)?;
    let mut verdict = InjectivityVerdict::new(Status::Injective, Method::ComplementProperty);
    verdict.nullity = Some(ns.nullity());
    verdict.diagnostics.rank_threshold = Some(ns.threshold);
    if holds {
        return Ok(verdict);
    }
    let sub = subset.expect("violation carries a subset");
    let s = subsets::mask_of(&sub.subset);
    let sc = full_mask(phi.len()) ^ s;
    let u = annihilator(phi, s, &opts.rank_tol);
    let v = annihilator(phi, sc, &opts.rank_tol);
    verdict.subset = Some(sub);
    Ok(match (u, v) {
        (Some(u), Some(v)) => verdict.with_checked_witness(phi, &u + &v, &u - &v),
        _ => {
            verdict.status = Status::Indeterminate;
            verdict.reason = Some("violating subset found but no annihilating vector".into());
            verdict
        }
    })
}
