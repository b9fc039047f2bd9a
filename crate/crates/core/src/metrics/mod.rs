//! Concept-vector distances, t-nearest-neighbour tables and the basis
//! distance built on them, plus the four desiderata metrics and concept
//! agreement.
//!
//! Neighbour sets never contain the concept itself, and ties are broken
//! towards the lower concept index so every table is deterministic.

mod desiderata;
mod importance;
mod report;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::bases::ConceptBasis;
use crate::error::{Error, Result};

pub use desiderata::{
    concept_agreement, faithfulness, responsiveness, robustness, stability, stability_distances,
};
pub use importance::{importance_from_outputs, importance_vectors, ImportanceBasis};
pub use report::{read_metric_report, write_metric_report, MetricRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorMetric {
    #[default]
    Euclidean,
    Manhattan,
    /// `1 - cos(a, b)`.
    CosineDistance,
}

impl VectorMetric {
    pub const ALL: [VectorMetric; 3] = [
        VectorMetric::Euclidean,
        VectorMetric::Manhattan,
        VectorMetric::CosineDistance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VectorMetric::Euclidean => "euclidean",
            VectorMetric::Manhattan => "manhattan",
            VectorMetric::CosineDistance => "cosine",
        }
    }
}

impl fmt::Display for VectorMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VectorMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" | "l2" => Ok(VectorMetric::Euclidean),
            "manhattan" | "l1" => Ok(VectorMetric::Manhattan),
            "cosine" | "cosine_distance" => Ok(VectorMetric::CosineDistance),
            other => Err(Error::invalid(format!(
                "unknown distance `{other}` (expected euclidean, manhattan or cosine)"
            ))),
        }
    }
}

pub fn vector_distance(
    metric: VectorMetric,
    a: ArrayView1<'_, f64>,
    b: ArrayView1<'_, f64>,
) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let d = match metric {
        VectorMetric::Euclidean => a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
        VectorMetric::Manhattan => a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum(),
        VectorMetric::CosineDistance => {
            let na = a.dot(&a).sqrt();
            let nb = b.dot(&b).sqrt();
            if na == 0.0 || nb == 0.0 {
                return Err(Error::ZeroVector);
            }
            (1.0 - a.dot(&b) / (na * nb)).clamp(0.0, 2.0)
        }
    };
    if d.is_nan() {
        return Err(Error::NonFinite("concept vector".into()));
    }
    Ok(d)
}

/// All pairwise distances between the concepts of `b` (k x k, zero diagonal).
pub fn distance_matrix(b: &ConceptBasis, metric: VectorMetric) -> Result<Array2<f64>> {
    let k = b.num_concepts();
    let mut out = Array2::zeros((k, k));
    for i in 0..k {
        for j in i + 1..k {
            let d = vector_distance(metric, b.vector(i), b.vector(j))?;
            out[[i, j]] = d;
            out[[j, i]] = d;
        }
    }
    Ok(out)
}

/// For each concept, the indices (0-based) of its `min(t, k-1)` nearest
/// other concepts, nearest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborTable {
    t: usize,
    neighbors: Vec<Vec<usize>>,
}

impl NeighborTable {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn num_concepts(&self) -> usize {
        self.neighbors.len()
    }

    /// Neighbour-set size, `min(t, k - 1)`.
    pub fn set_size(&self) -> usize {
        self.t.min(self.neighbors.len().saturating_sub(1))
    }

    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.neighbors[j]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    /// Builds a table from an explicit distance matrix.
    pub fn from_distances(dist: &Array2<f64>, t: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::invalid("t must be >= 1"));
        }
        let k = dist.nrows();
        let size = t.min(k.saturating_sub(1));
        let neighbors = (0..k)
            .map(|j| {
                let mut others: Vec<usize> = (0..k).filter(|&i| i != j).collect();
                others.sort_by(|&a, &b| dist[[j, a]].total_cmp(&dist[[j, b]]).then(a.cmp(&b)));
                others.truncate(size);
                others
            })
            .collect();
        Ok(NeighborTable { t, neighbors })
    }
}

pub fn neighbor_table(b: &ConceptBasis, metric: VectorMetric, t: usize) -> Result<NeighborTable> {
    if t == 0 {
        return Err(Error::invalid("t must be >= 1"));
    }
    NeighborTable::from_distances(&distance_matrix(b, metric)?, t)
}

/// `1 - (1/k) sum_j |N1(j) ∩ N2(j)| / min(t, k-1)`.
pub fn basis_distance(
    b1: &ConceptBasis,
    b2: &ConceptBasis,
    metric: VectorMetric,
    t: usize,
) -> Result<f64> {
    if b1.num_concepts() != b2.num_concepts() {
        return Err(Error::DimensionMismatch(format!(
            "bases have {} and {} concepts",
            b1.num_concepts(),
            b2.num_concepts()
        )));
    }
    let n1 = neighbor_table(b1, metric, t)?;
    let n2 = neighbor_table(b2, metric, t)?;
    Ok(table_distance(&n1, &n2))
}

/// Basis distance between two precomputed tables of equal size.
pub fn table_distance(n1: &NeighborTable, n2: &NeighborTable) -> f64 {
    assert_eq!(n1.num_concepts(), n2.num_concepts());
    let k = n1.num_concepts();
    let size = n1.set_size().min(n2.set_size());
    if k == 0 || size == 0 {
        return 0.0;
    }
    let overlap: usize = (0..k)
        .map(|j| {
            n1.neighbors(j)
                .iter()
                .filter(|i| n2.neighbors(j).contains(i))
                .count()
        })
        .sum();
    (1.0 - overlap as f64 / (k * size) as f64).clamp(0.0, 1.0)
}
