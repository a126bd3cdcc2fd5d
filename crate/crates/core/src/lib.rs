//! Injectivity and stability analysis for phase-retrieval measurement ensembles.
//!
//! An ensemble is a collection of `N` measurement vectors in `R^M` or `C^M`.
//! The intensity map sends a signal `x` to `|<x, phi_n>|^2` for each `n`; this
//! crate decides (or bounds) whether that map is injective modulo the global
//! phase, measures its worst-case stability through Lipschitz constants of the
//! root-intensity map and the strong complement property, and evaluates its
//! average-case stability through Fisher information and Cramer-Rao bounds.
//!
//! Module map:
//!
//! - [`ensemble`]: the data model, intensity maps, lifting, the Hermitian basis
//!   and the super analysis operator, plus named constructions and JSON I/O.
//! - [`injectivity`]: complement property, real and complex injectivity tests.
//! - [`stability_worst`]: Lipschitz bounds, sigma-SCP, and the Gaussian experiment.
//! - [`stability_avg`]: Fisher information, score vectors, CRLB traces.

pub mod ensemble;
pub mod error;
pub mod injectivity;
pub mod linalg;
pub mod rng;
pub mod stability_avg;
pub mod stability_worst;
pub mod subsets;

pub use ensemble::{Field, MeasurementEnsemble};
pub use error::{Error, Result};

/// Complex scalar type used throughout.
pub type C64 = nalgebra::Complex<f64>;
