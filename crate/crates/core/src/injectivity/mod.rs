//! Deciding or bounding injectivity of the intensity map.
//!
//! Real ensembles are decided exactly by the complement property. Complex
//! ensembles are decided through the null space of the super analysis
//! operator: a nonzero null matrix of rank one or two yields a collision, so
//! nullity zero is injective, nullity one depends on the rank of the spanner,
//! and for `M = 3` any nullity of two or more forces a collision. Past that,
//! the complement property (necessary) and randomized span probes can only
//! reject; everything else is reported as [`Status::Indeterminate`].

mod bounds;
mod complex;
mod real;

pub use bounds::{conjecture_status, hmw_lower_bound, ConjectureStatus};
pub use complex::{
    cp_necessity_filter, hmw_test, lemma_witness, nullspace_classifier, span_condition, span_probe,
    span_witness,
};
pub use real::{complement_property, full_spark, real_injectivity};

use nalgebra::DVector;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::ensemble::{sign_distance, Field, MeasurementEnsemble};
use crate::error::Result;
use crate::linalg::RankTolerance;
use crate::C64;

/// Tunable thresholds shared by the injectivity procedures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub rank_tol: RankTolerance,
    /// A null-space spanner `H` counts as nonsingular iff
    /// `|det H| > det_tol * |H|_2^M`.
    pub det_tol: f64,
    /// Largest `N` for subset enumeration.
    pub cp_budget: usize,
    /// Largest `C(N, M)` for the full-spark check.
    pub full_spark_budget: u64,
    /// Random probes for the span condition.
    pub span_probes: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            rank_tol: RankTolerance::default(),
            det_tol: 1e-9,
            cp_budget: 26,
            full_spark_budget: 20_000_000,
            span_probes: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Injective,
    NotInjective,
    Indeterminate,
}

/// The procedure that produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ComplementProperty,
    Hmw,
    Nullspace,
    CpNecessity,
    SpanCondition,
}

/// Two signals with equal intensity measurements that are not equivalent
/// modulo the field's unit scalars. Pairs are meaningful up to a common
/// positive scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub x: DVector<C64>,
    pub y: DVector<C64>,
}

/// A subset `S` together with whether each side spans.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetWitness {
    /// Zero-based indices in `S`.
    pub subset: Vec<usize>,
    pub spanned_s: bool,
    pub spanned_complement: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_threshold: Option<f64>,
    /// Null-space singular values (smallest few), for auditing the rank call.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trailing_singular_values: Vec<f64>,
    /// `|det H| / |H|_2^M` of the null-space spanner.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub det_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spanner_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span_dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensity_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InjectivityVerdict {
    pub status: Status,
    pub method: Method,
    pub nullity: Option<usize>,
    pub witness: Option<Witness>,
    pub subset: Option<SubsetWitness>,
    pub reason: Option<String>,
    pub diagnostics: Diagnostics,
}

impl InjectivityVerdict {
    pub fn new(status: Status, method: Method) -> Self {
        Self {
            status,
            method,
            nullity: None,
            witness: None,
            subset: None,
            reason: None,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn indeterminate(method: Method, reason: impl Into<String>) -> Self {
        Self {
            reason: Some(reason.into()),
            ..Self::new(Status::Indeterminate, method)
        }
    }

    pub fn is_injective(&self) -> bool {
        self.status == Status::Injective
    }

    /// Attaches a collision pair after verifying it against `phi`; a pair that
    /// fails verification turns the verdict into `Indeterminate`.
    pub(crate) fn with_checked_witness(
        mut self,
        phi: &MeasurementEnsemble,
        x: DVector<C64>,
        y: DVector<C64>,
    ) -> Self {
        let check = verify_witness(phi, &x, &y);
        self.diagnostics.intensity_gap = Some(check.intensity_gap);
        if check.is_sound() {
            self.status = Status::NotInjective;
            self.witness = Some(Witness { x, y });
        } else {
            self.status = Status::Indeterminate;
            self.reason = Some(format!(
                "constructed collision failed verification (gap {:.3e}, separated: {})",
                check.intensity_gap, check.separated
            ));
        }
        self
    }
}

fn complex_pairs(v: &DVector<C64>) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Witness", 2)?;
        st.serialize_field("x", &complex_pairs(&self.x))?;
        st.serialize_field("y", &complex_pairs(&self.y))?;
        st.end()
    }
}

impl Serialize for InjectivityVerdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("InjectivityVerdict", 7)?;
        st.serialize_field("status", &self.status)?;
        st.serialize_field("method", &self.method)?;
        st.serialize_field("nullity", &self.nullity)?;
        if let Some(w) = &self.witness {
            st.serialize_field("witness", w)?;
        }
        if let Some(sub) = &self.subset {
            st.serialize_field("subset", sub)?;
        }
        if let Some(r) = &self.reason {
            st.serialize_field("reason", r)?;
        }
        st.serialize_field("diagnostics", &self.diagnostics)?;
        st.end()
    }
}

/// Outcome of checking a collision pair.
#[derive(Debug, Clone, Copy)]
pub struct WitnessCheck {
    /// `|A(x) - A(y)| / (1 + |A(x)|)`.
    pub intensity_gap: f64,
    pub separated: bool,
}

impl WitnessCheck {
    pub fn is_sound(&self) -> bool {
        self.intensity_gap <= 1e-8 && self.separated
    }
}

/// Checks that `A(x) = A(y)` to `1e-8` (relative) and that `x` and `y` are
/// not equivalent modulo the unit scalars of the ensemble's field.
pub fn verify_witness(
    phi: &MeasurementEnsemble,
    x: &DVector<C64>,
    y: &DVector<C64>,
) -> WitnessCheck {
    let (ax, ay) = match (phi.intensity_map(x), phi.intensity_map(y)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => {
            return WitnessCheck {
                intensity_gap: f64::INFINITY,
                separated: false,
            }
        }
    };
    let intensity_gap = (&ax - &ay).norm() / (1.0 + ax.norm());
    let (nx, ny) = (x.norm(), y.norm());
    let scale = nx.max(ny);
    let separated = scale > 0.0
        && match phi.field() {
            Field::Real => {
                let (xr, yr) = (x.map(|z| z.re), y.map(|z| z.re));
                sign_distance(&xr, &yr) > 1e-6 * scale
            }
            Field::Complex => {
                y.dotc(x).norm() < (1.0 - 1e-6) * nx * ny || (nx - ny).abs() > 1e-6 * scale
            }
        };
    WitnessCheck {
        intensity_gap,
        separated,
    }
}

/// Routes an ensemble to the strongest applicable procedure.
///
/// Real ensembles use the complement property. Complex ensembles use the HMW
/// test when `M = 3` and the null-space classifier when `M <= 2` or the
/// nullity is at most one. Otherwise the complement-property filter, random
/// span probes and a low-rank null-space search are tried in turn before
/// giving up with `Indeterminate`.
pub fn check(phi: &MeasurementEnsemble, opts: &CheckOptions) -> Result<InjectivityVerdict> {
    use crate::ensemble::SuperAnalysisOperator;
    if phi.field() == Field::Real {
        return real_injectivity(phi, opts);
    }
    if phi.dim() == 3 {
        return hmw_test(phi, opts);
    }
    if phi.dim() <= 2 {
        return nullspace_classifier(phi, opts);
    }
    let nullity = SuperAnalysisOperator::for_ensemble(phi)?
        .null_space(&opts.rank_tol)
        .nullity();
    if nullity <= 1 {
        return nullspace_classifier(phi, opts);
    }
    if phi.len() <= opts.cp_budget {
        if let Some(mut v) = cp_necessity_filter(phi, opts)? {
            v.nullity = Some(nullity);
            if v.status == Status::NotInjective {
                return Ok(v);
            }
        }
    }
    if let Some((u, dim)) = span_probe(phi, opts.span_probes, opts.seed, &opts.rank_tol)? {
        let mut v = span_witness(phi, &u, &opts.rank_tol)?;
        v.nullity = Some(nullity);
        v.diagnostics.span_dimension = Some(dim);
        if v.status == Status::NotInjective {
            return Ok(v);
        }
    }
    let mut v = nullspace_classifier(phi, opts)?;
    if v.status == Status::Indeterminate {
        v.reason = Some(format!(
            "nullity {nullity} >= 2 with M = {} > 3: complement property holds or was not enumerated, \
             {} span probes found no deficiency, and no rank <= 2 null matrix was found",
            phi.dim(),
            opts.span_probes
        ));
    }
    Ok(v)
}
