use nalgebra::{ComplexField, DMatrix};
use serde::Serialize;

use crate::ensemble::MeasurementEnsemble;
use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue_psd;
use crate::subsets::{self, full_mask, lex_cmp, par_chunks, subset_at, toggled_at};

pub const DEFAULT_SCP_BUDGET: usize = 24;

/// Largest `sigma` such that every split `{S, S^c}` has one side whose frame
/// operator is bounded below by `sigma^2`, and the split attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScpReport {
    pub sigma: f64,
    /// Zero-based indices of `S`; always contains 0.
    pub witness_subset: Vec<usize>,
    #[serde(rename = "lambda_S")]
    pub lambda_s: f64,
    #[serde(rename = "lambda_Sc")]
    pub lambda_sc: f64,
    pub subsets_examined: u64,
}

/// Value of the split objective at one fixed `S`, which bounds `sigma` above.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScpUpperBound {
    pub sigma_upper: f64,
    pub subset: Vec<usize>,
    #[serde(rename = "lambda_S")]
    pub lambda_s: f64,
    #[serde(rename = "lambda_Sc")]
    pub lambda_sc: f64,
}

fn outer_products<T>(cols: &DMatrix<T>) -> Vec<DMatrix<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    (0..cols.ncols())
        .map(|c| cols.column(c) * cols.column(c).adjoint())
        .collect()
}

fn gram<T>(outer: &[DMatrix<T>], mask: u64, m: usize) -> DMatrix<T>
where
    T: ComplexField<RealField = f64> + Copy,
{
    subsets::indices(mask)
        .into_iter()
        .fold(DMatrix::zeros(m, m), |acc, n| acc + &outer[n])
}

/// `lambda_min` of a frame operator over `count` vectors; fewer than `m`
/// vectors cannot span, so the value is exactly zero.
fn side_value<T>(g: &DMatrix<T>, count: u32, m: usize) -> f64
where
    T: ComplexField<RealField = f64> + Copy,
{
    if (count as usize) < m {
        0.0
    } else {
        min_eigenvalue_psd(g)
    }
}

fn exact_split<T>(outer: &[DMatrix<T>], mask: u64, n: usize, m: usize) -> (f64, f64)
where
    T: ComplexField<RealField = f64> + Copy,
{
    let sc = full_mask(n) ^ mask;
    (
        side_value(&gram(outer, mask, m), mask.count_ones(), m),
        side_value(&gram(outer, sc, m), sc.count_ones(), m),
    )
}

fn better(value: f64, mask: u64, best: Option<(f64, u64)>) -> bool {
    match best {
        None => true,
        Some((v, b)) => value < v || (value == v && lex_cmp(mask, b).is_lt()),
    }
}

fn minimize<T>(cols: &DMatrix<T>) -> (u64, u64)
where
    T: ComplexField<RealField = f64> + Copy,
{
    let (m, n) = cols.shape();
    let outer = outer_products(cols);
    let total = gram(&outer, full_mask(n), m);
    let full = full_mask(n);
    let per_chunk = par_chunks(n, |range| {
        let mut best: Option<(f64, u64)> = None;
        let mut mask = subset_at(range.start);
        let mut g = gram(&outer, mask, m);
        for i in range.clone() {
            if i != range.start {
                let bit = toggled_at(i);
                mask ^= 1 << bit;
                if mask & (1 << bit) != 0 {
                    g += &outer[bit];
                } else {
                    g -= &outer[bit];
                }
            }
            let ls = side_value(&g, mask.count_ones(), m);
            if best.is_some_and(|(v, _)| ls > v) {
                continue;
            }
            let sc = full ^ mask;
            let lsc = side_value(&(&total - &g), sc.count_ones(), m);
            let value = ls.max(lsc);
            if better(value, mask, best) {
                best = Some((value, mask));
            }
        }
        best
    });
    let best = per_chunk
        .into_iter()
        .flatten()
        .reduce(|a, b| if better(b.0, b.1, Some(a)) { b } else { a })
        .expect("at least one subset");
    (best.1, subsets::pair_count(n))
}

fn check_budget(n: usize, budget: usize) -> Result<()> {
    if n > budget.min(subsets::MAX_N) {
        return Err(Error::BudgetExceeded { n, budget });
    }
    Ok(())
}

fn report<T>(cols: &DMatrix<T>) -> ScpReport
where
    T: ComplexField<RealField = f64> + Copy,
{
    let (m, n) = cols.shape();
    let (mask, examined) = minimize(cols);
    // recomputed from scratch so the witness is free of update drift
    let (lambda_s, lambda_sc) = exact_split(&outer_products(cols), mask, n, m);
    ScpReport {
        sigma: lambda_s.max(lambda_sc).max(0.0).sqrt(),
        witness_subset: subsets::indices(mask),
        lambda_s,
        lambda_sc,
        subsets_examined: examined,
    }
}

/// Exhaustive strong-complement-property constant over the `2^{N-1}`
/// complementary splits. Frame operators are updated incrementally along a
/// Gray-code walk, and the reported witness is recomputed exactly; among
/// equal values the lexicographically smallest `S` wins.
pub fn scp_sigma(phi: &MeasurementEnsemble, budget: usize) -> Result<ScpReport> {
    check_budget(phi.len(), budget)?;
    Ok(match phi.real_matrix() {
        Some(r) => report(&r),
        None => report(phi.matrix()),
    })
}

/// `sqrt(max(lambda_min(S), lambda_min(S^c)))` at the given `S`, an upper
/// bound on the exhaustive value that needs no enumeration.
pub fn scp_upper_bound(phi: &MeasurementEnsemble, subset: &[usize]) -> Result<ScpUpperBound> {
    let n = phi.len();
    if let Some(&bad) = subset.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidArgument(format!(
            "subset index {bad} out of range for N = {n}"
        )));
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let sc: Vec<usize> = (0..n)
        .filter(|i| sorted.binary_search(i).is_err())
        .collect();
    let side = |idx: &[usize]| -> f64 {
        if idx.len() < phi.dim() {
            return 0.0;
        }
        let sub = phi.select_columns(idx);
        match phi.field() {
            crate::Field::Real => {
                let r = sub.map(|z| z.re);
                min_eigenvalue_psd(&(&r * r.transpose()))
            }
            crate::Field::Complex => min_eigenvalue_psd(&(&sub * sub.adjoint())),
        }
    };
    let (lambda_s, lambda_sc) = (side(&sorted), side(&sc));
    Ok(ScpUpperBound {
        sigma_upper: lambda_s.max(lambda_sc).max(0.0).sqrt(),
        subset: sorted,
        lambda_s,
        lambda_sc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::identity;
    use crate::Field;

    #[test]
    fn identity_has_zero_sigma() {
        for m in 1..5 {
            let r = scp_sigma(&identity(m, Field::Real), DEFAULT_SCP_BUDGET).unwrap();
            if m == 1 {
                // the only split is {S = {0}, empty}
                assert_eq!(r.sigma, 1.0);
            } else {
                assert_eq!(r.sigma, 0.0);
                assert_eq!(r.witness_subset, vec![0]);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let phi = MeasurementEnsemble::real(DMatrix::from_element(1, 5, 1.0)).unwrap();
        assert!(matches!(
            scp_sigma(&phi, 4),
            Err(Error::BudgetExceeded { n: 5, budget: 4 })
        ));
    }

    #[test]
    fn counts_every_pair_once() {
        let phi =
            MeasurementEnsemble::real(DMatrix::from_fn(2, 7, |r, c| (r + 2 * c) as f64 + 0.5))
                .unwrap();
        assert_eq!(scp_sigma(&phi, 24).unwrap().subsets_examined, 64);
    }

    #[test]
    fn upper_bound_matches_at_witness() {
        let phi = MeasurementEnsemble::real(DMatrix::from_row_slice(
            2,
            3,
            &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0],
        ))
        .unwrap();
        let r = scp_sigma(&phi, 24).unwrap();
        let ub = scp_upper_bound(&phi, &r.witness_subset).unwrap();
        assert!((ub.sigma_upper - r.sigma).abs() < 1e-12);
        assert!(scp_upper_bound(&phi, &[5]).is_err());
    }

    #[test]
    fn complex_matches_real_embedding_for_real_vectors() {
        let phi = MeasurementEnsemble::real(DMatrix::from_row_slice(
            2,
            4,
            &[1.0, 0.0, 1.0, 2.0, 0.0, 1.0, 1.0, -1.0],
        ))
        .unwrap();
        let a = scp_sigma(&phi, 24).unwrap();
        let b = scp_sigma(&phi.as_complex(), 24).unwrap();
        assert!((a.sigma - b.sigma).abs() < 1e-12);
        assert_eq!(a.witness_subset, b.witness_subset);
    }
}
