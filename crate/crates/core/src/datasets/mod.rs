//! Concept-annotated datasets: the core container, synthetic generators,
//! the perturbation operators behind robustness and responsiveness, and
//! CSV persistence.
//!
//! Labels are stored 1-based (`1..=num_labels`). Concept and feature
//! indices are 0-based in the Rust API; files and the CLI use 1-based
//! concept indices where an index is written out.

mod generators;
mod io;
mod perturb;
mod profile;

use std::collections::HashSet;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

pub use generators::{
    appendix_i_tasks, gen_appendix_i, gen_correlated_pairs, gen_weak_correlation, pairs_pairing,
    WEAK_FEATURE_NOISE,
};
pub use io::{load_dataset, load_dataset_dir, save_dataset};
pub use perturb::{corrupt_responsiveness, perturb_robustness, RobustnessPerturbation};
pub use profile::ProfileDistribution;

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptDataset {
    features: Array2<f64>,
    feature_range: (f64, f64),
    concepts: Array2<u8>,
    labels: Vec<usize>,
    num_labels: usize,
    concept_names: Vec<String>,
    groups: Option<Vec<Vec<usize>>>,
}

impl ConceptDataset {
    /// Builds a dataset, checking every container invariant.
    ///
    /// `groups`, when given, must partition `0..k` exactly.
    pub fn new(
        features: Array2<f64>,
        feature_range: (f64, f64),
        concepts: Array2<u8>,
        labels: Vec<usize>,
        num_labels: usize,
        concept_names: Vec<String>,
        groups: Option<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        let n = concepts.nrows();
        let k = concepts.ncols();
        if features.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "features have {} rows, concepts have {}",
                features.nrows(),
                n
            )));
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} samples",
                labels.len(),
                n
            )));
        }
        if concept_names.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "{} concept names for {} concept columns",
                concept_names.len(),
                k
            )));
        }
        if let Some(((row, col), &v)) = concepts.indexed_iter().find(|(_, &v)| v > 1) {
            return Err(Error::NonBinaryConcept {
                row: row + 1,
                col: col + 1,
                value: v.to_string(),
            });
        }
        if num_labels == 0 {
            return Err(Error::invalid("number of labels must be at least 1"));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y == 0 || y > num_labels) {
            return Err(Error::invalid(format!(
                "label {bad} outside 1..={num_labels}"
            )));
        }
        if !(feature_range.0.is_finite() && feature_range.1.is_finite())
            || feature_range.0 > feature_range.1
        {
            return Err(Error::invalid(format!(
                "feature range [{}, {}] is not a finite interval",
                feature_range.0, feature_range.1
            )));
        }
        check_unique_names(&concept_names)?;
        if let Some(groups) = &groups {
            check_partition(groups, k)?;
        }
        Ok(ConceptDataset {
            features,
            feature_range,
            concepts,
            labels,
            num_labels,
            concept_names,
            groups,
        })
    }

    pub fn num_samples(&self) -> usize {
        self.concepts.nrows()
    }

    pub fn num_concepts(&self) -> usize {
        self.concepts.ncols()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn feature_range(&self) -> (f64, f64) {
        self.feature_range
    }

    pub fn concepts(&self) -> &Array2<u8> {
        &self.concepts
    }

    pub fn concept_row(&self, i: usize) -> ArrayView1<'_, u8> {
        self.concepts.row(i)
    }

    /// Concept matrix as reals, for feeding predictors.
    pub fn concepts_f64(&self) -> Array2<f64> {
        self.concepts.mapv(f64::from)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn concept_names(&self) -> &[String] {
        &self.concept_names
    }

    pub fn groups(&self) -> Option<&[Vec<usize>]> {
        self.groups.as_deref()
    }

    pub fn with_groups(mut self, groups: Option<Vec<Vec<usize>>>) -> Result<Self> {
        if let Some(g) = &groups {
            check_partition(g, self.num_concepts())?;
        }
        self.groups = groups;
        Ok(self)
    }

    /// Same samples with replaced features and concepts. Labels, names and
    /// groups are carried over.
    pub(crate) fn with_data(&self, features: Array2<f64>, concepts: Array2<u8>) -> Self {
        debug_assert_eq!(features.dim(), self.features.dim());
        debug_assert_eq!(concepts.dim(), self.concepts.dim());
        ConceptDataset {
            features,
            concepts,
            ..self.clone()
        }
    }

    /// Rows `[start, end)` as a new dataset.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.num_samples() {
            return Err(Error::invalid(format!(
                "row range {start}..{end} invalid for {} samples",
                self.num_samples()
            )));
        }
        Ok(ConceptDataset {
            features: self.features.slice(ndarray::s![start..end, ..]).to_owned(),
            concepts: self.concepts.slice(ndarray::s![start..end, ..]).to_owned(),
            labels: self.labels[start..end].to_vec(),
            ..self.clone()
        })
    }
}

pub(crate) fn check_unique_names(names: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(names.len());
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateName(name.clone()));
        }
    }
    Ok(())
}

fn check_partition(groups: &[Vec<usize>], k: usize) -> Result<()> {
    let mut seen = vec![false; k];
    for group in groups {
        if group.is_empty() {
            return Err(Error::invalid("empty concept group"));
        }
        for &j in group {
            if j >= k {
                return Err(Error::IndexOutOfRange {
                    index: j + 1,
                    len: k,
                });
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::invalid(format!(
                    "concept {} appears in more than one group",
                    j + 1
                )));
            }
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::invalid(format!(
            "groups do not cover concept {}",
            missing + 1
        )));
    }
    Ok(())
}
