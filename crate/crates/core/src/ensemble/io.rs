//! JSON ensemble files.
//!
//! ```text
//! {"field": "real" | "complex", "M": 2, "N": 3,
//!  "columns": [[[re, im], [re, im]], ...]}
//! ```
//!
//! Entries are `[re, im]` pairs; real ensembles may also use bare numbers.
//! Files are always written with pairs.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Field, MeasurementEnsemble};
use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Pair([f64; 2]),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Real(x) => C64::new(x, 0.0),
            Entry::Pair([re, im]) => C64::new(re, im),
        }
    }

    pub fn from_complex(z: C64) -> Self {
        Entry::Pair([z.re, z.im])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub field: Field,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub columns: Vec<Vec<Entry>>,
}

impl EnsembleFile {
    pub fn from_ensemble(phi: &MeasurementEnsemble) -> Self {
        let columns = (0..phi.len())
            .map(|c| {
                phi.matrix()
                    .column(c)
                    .iter()
                    .map(|&z| Entry::from_complex(z))
                    .collect()
            })
            .collect();
        Self {
            field: phi.field(),
            m: phi.dim(),
            n: phi.len(),
            columns,
        }
    }

    pub fn into_ensemble(self) -> Result<MeasurementEnsemble> {
        if self.columns.is_empty() {
            return Err(Error::InvalidEnsemble("columns list is empty".into()));
        }
        if self.columns.len() != self.n {
            return Err(Error::InvalidEnsemble(format!(
                "N = {} but {} columns given",
                self.n,
                self.columns.len()
            )));
        }
        if let Some((i, c)) = self
            .columns
            .iter()
            .enumerate()
            .find(|(_, c)| c.len() != self.m)
        {
            return Err(Error::InvalidEnsemble(format!(
                "column {i} has {} entries, expected M = {}",
                c.len(),
                self.m
            )));
        }
        if self.field == Field::Complex
            && self
                .columns
                .iter()
                .flatten()
                .any(|e| matches!(e, Entry::Real(_)))
        {
            return Err(Error::InvalidEnsemble(
                "complex ensembles require [re, im] entries".into(),
            ));
        }
        let matrix = DMatrix::from_fn(self.m, self.n, |r, c| self.columns[c][r].value());
        MeasurementEnsemble::new(self.field, matrix)
    }
}

pub fn ensemble_from_json(text: &str) -> Result<MeasurementEnsemble> {
    serde_json::from_str::<EnsembleFile>(text)?.into_ensemble()
}

pub fn ensemble_to_json(phi: &MeasurementEnsemble) -> String {
    serde_json::to_string(&EnsembleFile::from_ensemble(phi)).expect("serializable")
}

pub fn load_ensemble(path: impl AsRef<Path>) -> Result<MeasurementEnsemble> {
    ensemble_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_ensemble(phi: &MeasurementEnsemble, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, ensemble_to_json(phi) + "\n")?;
    Ok(())
}

/// Parses a signal given as a JSON array of numbers or `[re, im]` pairs.
pub fn vector_from_json(text: &str) -> Result<DVector<C64>> {
    let entries: Vec<Entry> = serde_json::from_str(text)?;
    Ok(DVector::from_iterator(
        entries.len(),
        entries.into_iter().map(Entry::value),
    ))
}
