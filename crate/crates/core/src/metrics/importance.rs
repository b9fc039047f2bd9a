//! Task-importance vectors: `s_j[l] = sum_{i in A_j} p_i[l] - sum_{i not in A_j} p_i[l]`
//! with `p_i = f(g(x_i))` and `A_j` the samples where concept `j` is active.

use ndarray::{Array1, Array2, ArrayView2};

use crate::bases::ConceptBasis;
use crate::datasets::ConceptDataset;
use crate::error::{Error, Result};
use crate::predictors::{ConceptPredictor, LabelPredictor};

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceBasis {
    names: Vec<String>,
    /// k x L.
    vectors: Array2<f64>,
    /// Concepts active in every sample or in none; their vector is a
    /// one-sided sum.
    degenerate: Vec<usize>,
}

impl ImportanceBasis {
    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn degenerate(&self) -> &[usize] {
        &self.degenerate
    }

    pub fn to_basis(&self) -> Result<ConceptBasis> {
        ConceptBasis::new(self.names.clone(), self.vectors.clone())
    }
}

pub fn importance_vectors(
    g: &ConceptPredictor,
    f: &LabelPredictor,
    d: &ConceptDataset,
) -> Result<ImportanceBasis> {
    if g.num_features() != d.num_features()
        || g.num_concepts() != d.num_concepts()
        || f.num_concepts() != d.num_concepts()
        || f.num_labels() != d.num_labels()
    {
        return Err(Error::DimensionMismatch(format!(
            "predictors ({} -> {} -> {}) do not fit dataset (m={}, k={}, L={})",
            g.num_features(),
            f.num_concepts(),
            f.num_labels(),
            d.num_features(),
            d.num_concepts(),
            d.num_labels()
        )));
    }
    let outputs = f.predict(g.predict(d.features().view()).view());
    importance_from_outputs(outputs.view(), d.concepts().view(), d.concept_names())
}

/// Importance vectors from precomputed `f(g(x))` rows (n x L).
pub fn importance_from_outputs(
    outputs: ArrayView2<'_, f64>,
    concepts: ArrayView2<'_, u8>,
    names: &[String],
) -> Result<ImportanceBasis> {
    let (n, l) = outputs.dim();
    let k = concepts.ncols();
    if concepts.nrows() != n || names.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{n} output rows, {} concept rows, {} names for {k} concepts",
            concepts.nrows(),
            names.len()
        )));
    }
    if outputs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("predictor outputs".into()));
    }
    let mut vectors = Array2::zeros((k, l));
    let mut degenerate = Vec::new();
    for j in 0..k {
        let mut pos = Array1::<f64>::zeros(l);
        let mut neg = Array1::<f64>::zeros(l);
        let mut active = 0;
        for i in 0..n {
            if concepts[[i, j]] == 1 {
                pos += &outputs.row(i);
                active += 1;
            } else {
                neg += &outputs.row(i);
            }
        }
        if active == 0 || active == n {
            degenerate.push(j);
        }
        vectors.row_mut(j).assign(&(pos - neg));
    }
    Ok(ImportanceBasis {
        names: names.to_vec(),
        vectors,
        degenerate,
    })
}
