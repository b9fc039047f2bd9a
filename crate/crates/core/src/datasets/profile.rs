use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand_distr::Distribution;

use super::ConceptDataset;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

/// A generative model over whole concept patterns: each profile (a binary
/// pattern of length k) is drawn with its stated probability. Because the
/// distribution is explicit, its co-occurrence matrix is available in
/// closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileDistribution {
    profiles: Vec<(Vec<u8>, f64)>,
    k: usize,
}

impl ProfileDistribution {
    pub fn new(profiles: Vec<(Vec<u8>, f64)>) -> Result<Self> {
        let k = profiles
            .first()
            .map(|(p, _)| p.len())
            .ok_or_else(|| Error::invalid("profile distribution needs at least one profile"))?;
        if k == 0 {
            return Err(Error::invalid("profiles must have at least one concept"));
        }
        let mut total = 0.0;
        for (pattern, p) in &profiles {
            if pattern.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "profile of length {} in a distribution over {k} concepts",
                    pattern.len()
                )));
            }
            if let Some(&v) = pattern.iter().find(|&&v| v > 1) {
                return Err(Error::invalid(format!("profile entry {v} is not binary")));
            }
            if !(p.is_finite() && *p >= 0.0) {
                return Err(Error::invalid(format!(
                    "profile probability {p} is negative"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "profile probabilities sum to {total}, not 1"
            )));
        }
        Ok(ProfileDistribution { profiles, k })
    }

    pub fn num_concepts(&self) -> usize {
        self.k
    }

    pub fn profiles(&self) -> &[(Vec<u8>, f64)] {
        &self.profiles
    }

    /// Draws `n` profile indices.
    pub fn sample_indices(&self, n: usize, rng: &mut Rng) -> Vec<usize> {
        let index = WeightedIndex::new(self.profiles.iter().map(|(_, p)| *p))
            .expect("validated probabilities");
        (0..n).map(|_| index.sample(rng)).collect()
    }

    /// Draws an `n x k` concept matrix.
    pub fn sample_concepts(&self, n: usize, rng: &mut Rng) -> Array2<u8> {
        let idx = self.sample_indices(n, rng);
        Array2::from_shape_fn((n, self.k), |(i, j)| self.profiles[idx[i]].0[j])
    }

    /// A dataset whose features equal its concepts and whose label is the
    /// (1-based) index of the drawn profile.
    pub fn sample_dataset(&self, n: usize, seed: u64) -> Result<ConceptDataset> {
        if n == 0 {
            return Err(Error::invalid("n_samples must be >= 1"));
        }
        let mut rng = rng::seeded(seed);
        let idx = self.sample_indices(n, &mut rng);
        let concepts = Array2::from_shape_fn((n, self.k), |(i, j)| self.profiles[idx[i]].0[j]);
        let features = concepts.mapv(f64::from);
        let labels = idx.iter().map(|&i| i + 1).collect();
        let names = (1..=self.k).map(|j| format!("c{j}")).collect();
        ConceptDataset::new(
            features,
            (0.0, 1.0),
            concepts,
            labels,
            self.profiles.len(),
            names,
            None,
        )
    }
}
