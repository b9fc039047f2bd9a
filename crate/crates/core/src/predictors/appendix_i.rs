//! The two linear models of the two-coordinate mixture scenario.
//!
//! Both predict each task as a linear function. The `correct` model uses
//! concept presence only, `y_t = sum_i w_it c_i`, fit by least squares.
//! The `random` model is `y_t = sum_i v_it x_i + sum_i u_it c_i` with the
//! concept weights drawn from U(0, 1) and only the feature weights fit.
//! A concept's representation is its pair of per-task concept weights.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bases::ConceptBasis;
use crate::datasets::{appendix_i_tasks, ConceptDataset};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AppendixIKind {
    Random,
    Correct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixIModel {
    kind: AppendixIKind,
    /// m x 2, random kind only.
    feature_weights: Option<Array2<f64>>,
    /// k x 2.
    concept_weights: Array2<f64>,
    names: Vec<String>,
}

impl AppendixIModel {
    pub fn kind(&self) -> AppendixIKind {
        self.kind
    }

    pub fn feature_weights(&self) -> Option<&Array2<f64>> {
        self.feature_weights.as_ref()
    }

    pub fn concept_weights(&self) -> &Array2<f64> {
        &self.concept_weights
    }

    /// One 2-vector `(task 1 weight, task 2 weight)` per concept.
    pub fn representation(&self) -> Result<ConceptBasis> {
        ConceptBasis::new(self.names.clone(), self.concept_weights.clone())
    }

    /// Real-valued predictions `(y1, y2)` for one sample.
    pub fn predict(&self, x: &[f64], c: &[u8]) -> (f64, f64) {
        let mut out = [0.0; 2];
        for (t, o) in out.iter_mut().enumerate() {
            *o = c
                .iter()
                .enumerate()
                .map(|(i, &ci)| f64::from(ci) * self.concept_weights[[i, t]])
                .sum();
            if let Some(v) = &self.feature_weights {
                *o += x
                    .iter()
                    .enumerate()
                    .map(|(i, xi)| xi * v[[i, t]])
                    .sum::<f64>();
            }
        }
        (out[0], out[1])
    }
}

pub fn fit_appendix_i(
    d: &ConceptDataset,
    kind: AppendixIKind,
    seed: u64,
) -> Result<AppendixIModel> {
    if d.num_concepts() != 4 || d.num_features() != 2 || d.num_labels() != 4 {
        return Err(Error::invalid(
            "expected a mixture-scenario dataset (2 features, 4 concepts, 4 labels)",
        ));
    }
    let n = d.num_samples();
    let k = d.num_concepts();
    let c = DMatrix::from_fn(n, k, |i, j| f64::from(d.concepts()[[i, j]]));
    let tasks: Vec<(u8, u8)> = d.labels().iter().map(|&y| appendix_i_tasks(y)).collect();
    let target = |t: usize| {
        DVector::from_iterator(
            n,
            tasks
                .iter()
                .map(|&(a, b)| f64::from(if t == 0 { a } else { b })),
        )
    };

    let mut concept_weights = Array2::zeros((k, 2));
    match kind {
        AppendixIKind::Correct => {
            for t in 0..2 {
                let w = least_squares(&c, &target(t));
                for i in 0..k {
                    concept_weights[[i, t]] = w[i];
                }
            }
            Ok(AppendixIModel {
                kind,
                feature_weights: None,
                concept_weights,
                names: d.concept_names().to_vec(),
            })
        }
        AppendixIKind::Random => {
            let mut rng = rng::seeded(seed);
            concept_weights.mapv_inplace(|_| rng.random_range(0.0..=1.0));
            let m = d.num_features();
            let x = DMatrix::from_fn(n, m, |i, j| d.features()[[i, j]]);
            let mut feature_weights = Array2::zeros((m, 2));
            for t in 0..2 {
                let u = DVector::from_iterator(k, concept_weights.column(t).iter().copied());
                let residual = target(t) - &c * u;
                let v = least_squares(&x, &residual);
                for i in 0..m {
                    feature_weights[[i, t]] = v[i];
                }
            }
            Ok(AppendixIModel {
                kind,
                feature_weights: Some(feature_weights),
                concept_weights,
                names: d.concept_names().to_vec(),
            })
        }
    }
}

/// Minimum-norm least-squares solution; the mixture's concepts are
/// collinear (`c1 + c2 = c3 + c4 = 1`), so the design is rank deficient.
fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-10 * a.nrows().max(a.ncols()) as f64;
    svd.solve(b, eps).expect("u and v were computed")
}
