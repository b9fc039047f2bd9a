//! Sweep records and their CSV files.
//!
//! Intervention sweeps: `fraction,policy,basis,seed,task_acc,concept_acc`.
//! Correlation sweeps: `rate,seed,measure,fraction,value`, where `measure`
//! is `concept_acc`, `task_acc` or `intervention_acc`.

use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub fraction: f64,
    pub policy: String,
    pub basis: String,
    pub seed: u64,
    pub task_acc: f64,
    pub concept_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InterventionOutcome {
    pub rows: Vec<OutcomeRow>,
}

impl InterventionOutcome {
    /// Mean task accuracy over seeds at `fraction`, if recorded.
    pub fn mean_task_acc(&self, fraction: f64) -> Option<f64> {
        let v: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.fraction == fraction)
            .map(|r| r.task_acc)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub rate: f64,
    pub seed: u64,
    pub measure: String,
    pub fraction: f64,
    pub value: f64,
}

pub fn write_outcome_csv(path: impl AsRef<Path>, outcome: &InterventionOutcome) -> Result<()> {
    write_rows(path.as_ref(), &outcome.rows)
}

pub fn read_outcome_csv(path: impl AsRef<Path>) -> Result<InterventionOutcome> {
    Ok(InterventionOutcome {
        rows: read_rows(path.as_ref())?,
    })
}

pub fn write_correlation_csv(path: impl AsRef<Path>, rows: &[CorrelationRow]) -> Result<()> {
    write_rows(path.as_ref(), rows)
}

pub fn read_correlation_csv(path: impl AsRef<Path>) -> Result<Vec<CorrelationRow>> {
    read_rows(path.as_ref())
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::parse(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::parse(path, e))
}
