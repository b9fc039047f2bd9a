//! Basis-aided concept intervention.
//!
//! An expert supplies ground truth for some concepts. Every other concept
//! is imputed from the ground truth of its `q` nearest intervened concepts
//! in a basis (`basis_hard`), from a similarity-weighted blend of that
//! mean and the concept predictor (`basis_weighted`), or left to the
//! concept predictor (`predictor_only`). The label predictor then runs on
//! the imputed vector.

mod outcome;
mod sweep;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::bases::ConceptBasis;
use crate::error::{Error, Result};
use crate::metrics::{distance_matrix, VectorMetric};
use crate::predictors::{ConceptPredictor, LabelPredictor};

pub use outcome::{
    read_correlation_csv, read_outcome_csv, write_correlation_csv, write_outcome_csv,
    CorrelationRow, InterventionOutcome, OutcomeRow,
};
pub use sweep::{
    correlation_sweep, intervened_count, intervention_sweep, select_intervened,
    CorrelationSweepParams, Pipeline, PipelineParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterventionMode {
    PredictorOnly,
    BasisHard,
    BasisWeighted,
}

impl InterventionMode {
    pub fn name(self) -> &'static str {
        match self {
            InterventionMode::PredictorOnly => "predictor_only",
            InterventionMode::BasisHard => "basis_hard",
            InterventionMode::BasisWeighted => "basis_weighted",
        }
    }
}

impl fmt::Display for InterventionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InterventionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "predictor_only" => Ok(InterventionMode::PredictorOnly),
            "basis_hard" => Ok(InterventionMode::BasisHard),
            "basis_weighted" => Ok(InterventionMode::BasisWeighted),
            other => Err(Error::invalid(format!(
                "unknown policy `{other}` (expected predictor_only, basis_hard or basis_weighted)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterventionPolicy {
    mode: InterventionMode,
    q: usize,
    delta_v: VectorMetric,
}

impl Default for InterventionPolicy {
    fn default() -> Self {
        InterventionPolicy {
            mode: InterventionMode::BasisHard,
            q: 10,
            delta_v: VectorMetric::Euclidean,
        }
    }
}

impl InterventionPolicy {
    pub fn new(mode: InterventionMode, q: usize, delta_v: VectorMetric) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("q must be >= 1"));
        }
        if mode == InterventionMode::BasisWeighted && delta_v != VectorMetric::CosineDistance {
            return Err(Error::invalid(
                "basis_weighted requires the cosine distance",
            ));
        }
        Ok(InterventionPolicy { mode, q, delta_v })
    }

    pub fn predictor_only() -> Self {
        InterventionPolicy {
            mode: InterventionMode::PredictorOnly,
            ..Default::default()
        }
    }

    pub fn basis_hard(q: usize) -> Result<Self> {
        InterventionPolicy::new(InterventionMode::BasisHard, q, VectorMetric::Euclidean)
    }

    pub fn basis_weighted(q: usize) -> Result<Self> {
        InterventionPolicy::new(
            InterventionMode::BasisWeighted,
            q,
            VectorMetric::CosineDistance,
        )
    }

    pub fn mode(&self) -> InterventionMode {
        self.mode
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn delta_v(&self) -> VectorMetric {
        self.delta_v
    }
}

/// Pairwise basis distances prepared once for many imputations.
#[derive(Debug, Clone)]
pub struct Imputer {
    policy: InterventionPolicy,
    dist: Option<Array2<f64>>,
}

impl Imputer {
    pub fn new(b: &ConceptBasis, policy: InterventionPolicy) -> Result<Self> {
        let dist = match policy.mode {
            InterventionMode::PredictorOnly => None,
            _ => Some(distance_matrix(b, policy.delta_v)?),
        };
        Ok(Imputer { policy, dist })
    }

    /// Imputed concept vector given the concept predictor's output.
    /// `intervened` must be in range and free of duplicates.
    pub fn impute(
        &self,
        predicted: ArrayView1<'_, f64>,
        truth: ArrayView1<'_, u8>,
        intervened: &[usize],
    ) -> Array1<f64> {
        let k = predicted.len();
        let mut out = predicted.to_owned();
        let mut is_intervened = vec![false; k];
        for &j in intervened {
            out[j] = f64::from(truth[j]);
            is_intervened[j] = true;
        }
        let Some(dist) = &self.dist else {
            return out;
        };
        if intervened.is_empty() {
            return out;
        }
        let mut near: Vec<usize> = Vec::with_capacity(intervened.len());
        for j in (0..k).filter(|&j| !is_intervened[j]) {
            near.clear();
            near.extend_from_slice(intervened);
            near.sort_by(|&a, &b| dist[[j, a]].total_cmp(&dist[[j, b]]).then(a.cmp(&b)));
            near.truncate(self.policy.q);
            let mean = near.iter().map(|&i| f64::from(truth[i])).sum::<f64>() / near.len() as f64;
            out[j] = match self.policy.mode {
                InterventionMode::BasisHard => mean,
                InterventionMode::BasisWeighted => {
                    let sim =
                        near.iter().map(|&i| 1.0 - dist[[j, i]]).sum::<f64>() / near.len() as f64;
                    let w = sim.clamp(0.0, 1.0);
                    w * mean + (1.0 - w) * predicted[j]
                }
                InterventionMode::PredictorOnly => unreachable!(),
            };
        }
        out
    }
}

pub(crate) fn check_intervened(intervened: &[usize], k: usize) -> Result<()> {
    let mut seen = vec![false; k];
    for &j in intervened {
        if j >= k {
            return Err(Error::IndexOutOfRange { index: j, len: k });
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::invalid(format!("concept {j} intervened twice")));
        }
    }
    Ok(())
}

/// Runs one intervention and returns the predicted label (1-based) and
/// the imputed concept vector. `intervened` holds 0-based indices.
#[allow(clippy::too_many_arguments)]
pub fn intervene_sample(
    f: &LabelPredictor,
    g: &ConceptPredictor,
    b: &ConceptBasis,
    x: ArrayView1<'_, f64>,
    true_concepts: ArrayView1<'_, u8>,
    intervened: &[usize],
    policy: InterventionPolicy,
) -> Result<(usize, Array1<f64>)> {
    let k = g.num_concepts();
    if b.num_concepts() != k || true_concepts.len() != k || f.num_concepts() != k {
        return Err(Error::DimensionMismatch(format!(
            "basis ({}), concepts ({}) and predictors ({k}, {}) disagree on k",
            b.num_concepts(),
            true_concepts.len(),
            f.num_concepts()
        )));
    }
    if x.len() != g.num_features() {
        return Err(Error::DimensionMismatch(format!(
            "{} features for a predictor expecting {}",
            x.len(),
            g.num_features()
        )));
    }
    check_intervened(intervened, k)?;
    let imputer = Imputer::new(b, policy)?;
    let c_hat = imputer.impute(g.predict_one(x).view(), true_concepts, intervened);
    Ok((f.predict_label(c_hat.view()), c_hat))
}
