//! Stability, robustness, responsiveness, faithfulness and concept
//! agreement.
//!
//! A builder is any `Fn(&ConceptDataset, seed) -> Result<ConceptBasis>`;
//! seed-independent builders (the label basis) simply ignore the seed.

use rayon::prelude::*;

use super::{basis_distance, neighbor_table, ImportanceBasis, VectorMetric};
use crate::bases::ConceptBasis;
use crate::datasets::{
    corrupt_responsiveness, perturb_robustness, ConceptDataset, RobustnessPerturbation,
};
use crate::error::{Error, Result};

/// Basis distances for every unordered pair of seeds, in `(i < j)` order.
pub fn stability_distances<F>(
    builder: F,
    d: &ConceptDataset,
    seeds: &[u64],
    metric: VectorMetric,
    t: usize,
) -> Result<Vec<f64>>
where
    F: Fn(&ConceptDataset, u64) -> Result<ConceptBasis> + Sync,
{
    if seeds.len() < 2 {
        return Err(Error::invalid("stability needs at least 2 seeds"));
    }
    let bases: Vec<ConceptBasis> = seeds
        .par_iter()
        .map(|&s| builder(d, s))
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..bases.len())
        .flat_map(|i| (i + 1..bases.len()).map(move |j| (i, j)))
        .collect();
    pairs
        .par_iter()
        .map(|&(i, j)| basis_distance(&bases[i], &bases[j], metric, t))
        .collect()
}

/// `1 - mean basis distance` over all unordered seed pairs.
pub fn stability<F>(
    builder: F,
    d: &ConceptDataset,
    seeds: &[u64],
    metric: VectorMetric,
    t: usize,
) -> Result<f64>
where
    F: Fn(&ConceptDataset, u64) -> Result<ConceptBasis> + Sync,
{
    let dist = stability_distances(builder, d, seeds, metric, t)?;
    Ok(1.0 - dist.iter().sum::<f64>() / dist.len() as f64)
}

/// `1 - δ_b(B, B')` with `B'` built from a slightly perturbed copy of `d`.
pub fn robustness<F>(
    builder: F,
    d: &ConceptDataset,
    perturbation: RobustnessPerturbation,
    metric: VectorMetric,
    t: usize,
    seed: u64,
) -> Result<f64>
where
    F: Fn(&ConceptDataset, u64) -> Result<ConceptBasis>,
{
    let perturbed = perturb_robustness(d, perturbation, seed)?;
    let b = builder(d, seed)?;
    let b2 = builder(&perturbed, seed)?;
    Ok(1.0 - basis_distance(&b, &b2, metric, t)?)
}

/// `δ_b(B, B')` with `B'` built from a fully corrupted copy of `d`.
/// Higher means the basis reacts more to the corruption.
pub fn responsiveness<F>(
    builder: F,
    d: &ConceptDataset,
    metric: VectorMetric,
    t: usize,
    seed: u64,
) -> Result<f64>
where
    F: Fn(&ConceptDataset, u64) -> Result<ConceptBasis>,
{
    let corrupted = corrupt_responsiveness(d, seed);
    let b = builder(d, seed)?;
    let b2 = builder(&corrupted, seed)?;
    basis_distance(&b, &b2, metric, t)
}

pub fn faithfulness(
    b: &ConceptBasis,
    imp: &ImportanceBasis,
    metric: VectorMetric,
    t: usize,
) -> Result<f64> {
    Ok(1.0 - basis_distance(&imp.to_basis()?, b, metric, t)?)
}

/// Fraction of concepts whose nearest other concept is their partner in
/// `pairing` (0-based index pairs forming a perfect matching).
pub fn concept_agreement(
    b: &ConceptBasis,
    pairing: &[(usize, usize)],
    metric: VectorMetric,
) -> Result<f64> {
    let k = b.num_concepts();
    let mut partner = vec![usize::MAX; k];
    for &(i, j) in pairing {
        if i >= k || j >= k {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                len: k,
            });
        }
        if i == j || partner[i] != usize::MAX || partner[j] != usize::MAX {
            return Err(Error::invalid(format!(
                "pairing is not a matching at ({i}, {j})"
            )));
        }
        partner[i] = j;
        partner[j] = i;
    }
    if partner.contains(&usize::MAX) {
        return Err(Error::invalid("pairing does not cover every concept"));
    }
    let nt = neighbor_table(b, metric, 1)?;
    let hits = (0..k).filter(|&j| nt.neighbors(j)[0] == partner[j]).count();
    Ok(hits as f64 / k as f64)
}
