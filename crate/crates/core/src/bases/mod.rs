//! Concept bases: one named real vector per concept.

mod concept2vec;
mod file;

use ndarray::{Array2, ArrayView1};

use crate::datasets::{check_unique_names, ConceptDataset};
use crate::error::{Error, Result};

pub use concept2vec::{
    concept2vec, skipgram_gradient, skipgram_loss, training_pairs, PairSample, SkipgramConfig,
    SkipgramTrainer,
};
pub use file::{basis_from_json, basis_to_json, export_basis, import_basis};

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptBasis {
    names: Vec<String>,
    /// k x d, one row per concept.
    vectors: Array2<f64>,
}

impl ConceptBasis {
    pub fn new(names: Vec<String>, vectors: Array2<f64>) -> Result<Self> {
        let (k, d) = vectors.dim();
        if names.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {k} vectors",
                names.len()
            )));
        }
        if k < 2 {
            return Err(Error::TooFewConcepts(k));
        }
        if d == 0 {
            return Err(Error::invalid("basis vectors must have dimension >= 1"));
        }
        check_unique_names(&names)?;
        Ok(ConceptBasis { names, vectors })
    }

    /// Builds a basis from per-concept vectors, rejecting ragged input.
    pub fn from_rows(names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        for (name, row) in names.iter().zip(&rows) {
            if row.len() != d {
                return Err(Error::RaggedDimension {
                    name: name.clone(),
                    expected: d,
                    found: row.len(),
                });
            }
        }
        let k = rows.len();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let vectors = Array2::from_shape_vec((k, d), flat).expect("checked rectangular");
        ConceptBasis::new(names, vectors)
    }

    pub fn num_concepts(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn vector(&self, j: usize) -> ArrayView1<'_, f64> {
        self.vectors.row(j)
    }

    /// Reorders concepts so that new position `i` holds old concept `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let k = self.num_concepts();
        let mut seen = vec![false; k];
        if perm.len() != k
            || perm
                .iter()
                .any(|&p| p >= k || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::invalid("not a permutation of the concepts"));
        }
        let names = perm.iter().map(|&p| self.names[p].clone()).collect();
        let vectors = self.vectors.select(ndarray::Axis(0), perm);
        ConceptBasis::new(names, vectors)
    }
}

/// The label basis: concept `j` is represented by column `j` of the binary
/// concept matrix, so vectors have dimension `n`.
pub fn label_basis(d: &ConceptDataset) -> Result<ConceptBasis> {
    if d.num_samples() == 0 {
        return Err(Error::invalid("label basis needs at least one sample"));
    }
    let vectors = d.concepts().t().mapv(f64::from);
    ConceptBasis::new(d.concept_names().to_vec(), vectors)
}
