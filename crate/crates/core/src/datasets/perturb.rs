use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use super::ConceptDataset;
use crate::error::{Error, Result};
use crate::rng;

/// Small perturbation used by the robustness metric: random concept flips
/// plus additive Gaussian feature noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessPerturbation {
    pub flip_prob: f64,
    /// `None` means 50/255 of the dataset's declared feature range.
    pub noise_std: Option<f64>,
}

impl Default for RobustnessPerturbation {
    fn default() -> Self {
        RobustnessPerturbation {
            flip_prob: 0.01,
            noise_std: None,
        }
    }
}

impl RobustnessPerturbation {
    pub fn flips(flip_prob: f64) -> Self {
        RobustnessPerturbation {
            flip_prob,
            noise_std: None,
        }
    }

    pub fn noise_std_for(&self, d: &ConceptDataset) -> f64 {
        self.noise_std.unwrap_or_else(|| {
            let (lo, hi) = d.feature_range();
            50.0 / 255.0 * (hi - lo)
        })
    }
}

pub fn perturb_robustness(
    d: &ConceptDataset,
    params: RobustnessPerturbation,
    seed: u64,
) -> Result<ConceptDataset> {
    if !(0.0..=1.0).contains(&params.flip_prob) {
        return Err(Error::invalid(format!(
            "flip probability {} outside [0, 1]",
            params.flip_prob
        )));
    }
    let std = params.noise_std_for(d);
    let noise = Normal::new(0.0, std)
        .map_err(|_| Error::invalid(format!("noise std {std} must be >= 0")))?;

    let mut flip_rng = rng::seeded(rng::derive(seed, 1));
    let concepts = d.concepts().mapv(|c| {
        if flip_rng.random_bool(params.flip_prob) {
            1 - c
        } else {
            c
        }
    });

    let mut noise_rng = rng::seeded(rng::derive(seed, 2));
    let features = d.features().mapv(|x| x + noise.sample(&mut noise_rng));

    Ok(d.with_data(features, concepts))
}

/// Heavy corruption used by the responsiveness metric: concepts become
/// i.i.d. Bernoulli(1/2) and features i.i.d. uniform over the declared
/// feature range. Labels are untouched.
pub fn corrupt_responsiveness(d: &ConceptDataset, seed: u64) -> ConceptDataset {
    let mut rng = rng::seeded(rng::derive(seed, 3));
    let concepts = d.concepts().mapv(|_| u8::from(rng.random_bool(0.5)));
    let (lo, hi) = d.feature_range();
    let features = d.features().mapv(|_| {
        if hi > lo {
            rng.random_range(lo..hi)
        } else {
            lo
        }
    });
    d.with_data(features, concepts)
}
