//! Concept2Vec: skipgram-style concept embeddings trained to tell whether
//! two concepts were observed in the same data point.
//!
//! A single embedding table is shared by both sides of a pair. Positives
//! are distinct concepts co-active in one sample; each positive is paired
//! with `negatives_per_positive` negatives that keep the anchor and draw
//! the context from the active concepts of a different sample, skipping
//! contexts that are also active in the anchor's own sample. The score
//! is `sigmoid(v_a . v_b)` and training is plain SGD on the logistic loss.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::ConceptBasis;
use crate::datasets::ConceptDataset;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkipgramConfig {
    pub embed_dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub negatives_per_positive: usize,
    pub seed: u64,
}

impl Default for SkipgramConfig {
    fn default() -> Self {
        SkipgramConfig {
            embed_dim: 16,
            epochs: 25,
            learning_rate: 0.05,
            negatives_per_positive: 1,
            seed: 0,
        }
    }
}

impl SkipgramConfig {
    pub fn with_seed(seed: u64) -> Self {
        SkipgramConfig {
            seed,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.epochs == 0 || self.negatives_per_positive == 0 {
            return Err(Error::invalid(
                "embed_dim, epochs and negatives_per_positive must be >= 1",
            ));
        }
        // lr = 0 is accepted and leaves the initialisation untouched.
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::invalid(format!(
                "learning rate {} must be a non-negative number",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// A labelled concept pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairSample {
    pub anchor: usize,
    pub context: usize,
    pub positive: bool,
}

/// Stateful trainer, exposed so callers can observe the loss per epoch.
#[derive(Debug, Clone)]
pub struct SkipgramTrainer {
    table: Array2<f64>,
    learning_rate: f64,
    negatives: usize,
    active: Vec<Vec<usize>>,
    rng: Rng,
}

impl SkipgramTrainer {
    pub fn new(d: &ConceptDataset, cfg: &SkipgramConfig) -> Result<Self> {
        cfg.validate()?;
        let active = active_sets(d)?;
        let mut rng = rng::seeded(cfg.seed);
        let half = 0.5 / cfg.embed_dim as f64;
        let table = Array2::from_shape_simple_fn((d.num_concepts(), cfg.embed_dim), || {
            rng.random_range(-half..=half)
        });
        Ok(SkipgramTrainer {
            table,
            learning_rate: cfg.learning_rate,
            negatives: cfg.negatives_per_positive,
            active,
            rng,
        })
    }

    pub fn table(&self) -> &Array2<f64> {
        &self.table
    }

    /// One pass over the dataset in a freshly shuffled sample order.
    pub fn run_epoch(&mut self) {
        let pairs = epoch_pairs(&self.active, self.negatives, &mut self.rng);
        for p in &pairs {
            sgd_step(&mut self.table, p, self.learning_rate);
        }
    }
}

pub fn concept2vec(d: &ConceptDataset, cfg: &SkipgramConfig) -> Result<ConceptBasis> {
    let mut trainer = SkipgramTrainer::new(d, cfg)?;
    for _ in 0..cfg.epochs {
        trainer.run_epoch();
    }
    ConceptBasis::new(d.concept_names().to_vec(), trainer.table)
}

/// One epoch's worth of training pairs drawn with `seed`; useful as a
/// frozen evaluation sample.
pub fn training_pairs(d: &ConceptDataset, negatives: usize, seed: u64) -> Result<Vec<PairSample>> {
    let active = active_sets(d)?;
    Ok(epoch_pairs(&active, negatives, &mut rng::seeded(seed)))
}

/// Mean logistic loss of `table` on `pairs`.
pub fn skipgram_loss(table: &Array2<f64>, pairs: &[PairSample]) -> f64 {
    let total: f64 = pairs
        .iter()
        .map(|p| {
            let s = dot(table, p.anchor, p.context);
            // -log sigmoid(s) for positives, -log sigmoid(-s) for negatives
            let m = if p.positive { s } else { -s };
            softplus(-m)
        })
        .sum();
    total / pairs.len().max(1) as f64
}

/// Analytic gradient of [`skipgram_loss`] with respect to the table.
pub fn skipgram_gradient(table: &Array2<f64>, pairs: &[PairSample]) -> Array2<f64> {
    let mut grad = Array2::zeros(table.raw_dim());
    let scale = 1.0 / pairs.len().max(1) as f64;
    for p in pairs {
        let coef = score_gradient(table, p) * scale;
        for c in 0..table.ncols() {
            grad[[p.anchor, c]] += coef * table[[p.context, c]];
            grad[[p.context, c]] += coef * table[[p.anchor, c]];
        }
    }
    grad
}

/// dL/ds for one pair, where s is the pair's dot product.
fn score_gradient(table: &Array2<f64>, p: &PairSample) -> f64 {
    let target = if p.positive { 1.0 } else { 0.0 };
    sigmoid(dot(table, p.anchor, p.context)) - target
}

fn sgd_step(table: &mut Array2<f64>, p: &PairSample, lr: f64) {
    let coef = score_gradient(table, p);
    for c in 0..table.ncols() {
        let a = table[[p.anchor, c]];
        let b = table[[p.context, c]];
        table[[p.anchor, c]] = a - lr * coef * b;
        table[[p.context, c]] = b - lr * coef * a;
    }
}

fn active_sets(d: &ConceptDataset) -> Result<Vec<Vec<usize>>> {
    let c = d.concepts();
    for (j, name) in d.concept_names().iter().enumerate() {
        if c.column(j).iter().all(|&v| v == 0) {
            return Err(Error::InactiveConcept(name.clone()));
        }
    }
    Ok(c.rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &v)| v == 1)
                .map(|(j, _)| j)
                .collect()
        })
        .collect())
}

fn epoch_pairs(active: &[Vec<usize>], negatives: usize, rng: &mut Rng) -> Vec<PairSample> {
    const NEGATIVE_ATTEMPTS: usize = 8;
    let nonempty: Vec<usize> = (0..active.len())
        .filter(|&i| !active[i].is_empty())
        .collect();
    let mut order: Vec<usize> = (0..active.len()).collect();
    order.shuffle(rng);

    let mut pairs = Vec::new();
    for &i in &order {
        let set = &active[i];
        for x in 0..set.len() {
            for y in x + 1..set.len() {
                let (anchor, context) = if rng.random_bool(0.5) {
                    (set[x], set[y])
                } else {
                    (set[y], set[x])
                };
                pairs.push(PairSample {
                    anchor,
                    context,
                    positive: true,
                });
                if nonempty.len() < 2 {
                    continue;
                }
                for _ in 0..negatives {
                    for _ in 0..NEGATIVE_ATTEMPTS {
                        let other = nonempty[rng.random_range(0..nonempty.len())];
                        if other == i {
                            continue;
                        }
                        let cands = &active[other];
                        let neg = cands[rng.random_range(0..cands.len())];
                        if !set.contains(&neg) {
                            pairs.push(PairSample {
                                anchor,
                                context: neg,
                                positive: false,
                            });
                            break;
                        }
                    }
                }
            }
        }
    }
    pairs
}

fn dot(table: &Array2<f64>, a: usize, b: usize) -> f64 {
    table.row(a).dot(&table.row(b))
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::ProfileDistribution;

    fn two_profiles() -> ConceptDataset {
        ProfileDistribution::new(vec![(vec![1, 1, 0, 0], 0.5), (vec![0, 0, 1, 1], 0.5)])
            .unwrap()
            .sample_dataset(400, 3)
            .unwrap()
    }

    fn cosine(t: &Array2<f64>, a: usize, b: usize) -> f64 {
        dot(t, a, b) / (dot(t, a, a).sqrt() * dot(t, b, b).sqrt())
    }

    #[test]
    fn zero_learning_rate_keeps_initialisation() {
        let d = two_profiles();
        let cfg = SkipgramConfig {
            learning_rate: 0.0,
            ..SkipgramConfig::with_seed(5)
        };
        let init = SkipgramTrainer::new(&d, &cfg).unwrap().table().clone();
        let b = concept2vec(&d, &cfg).unwrap();
        assert_eq!(b.vectors(), &init);
        let bound = 0.5 / 16.0;
        assert!(init.iter().all(|v| v.abs() <= bound));
    }

    #[test]
    fn co_occurring_pair_is_more_similar() {
        let d = two_profiles();
        let b = concept2vec(&d, &SkipgramConfig::with_seed(1)).unwrap();
        let t = b.vectors();
        assert!(cosine(t, 0, 1) > cosine(t, 0, 2));
        assert!(cosine(t, 2, 3) > cosine(t, 1, 3));
        assert_eq!(b.dim(), 16);
    }

    #[test]
    fn inactive_concept_is_rejected() {
        let d = ProfileDistribution::new(vec![(vec![1, 1, 0], 1.0)])
            .unwrap()
            .sample_dataset(10, 0)
            .unwrap();
        let err = concept2vec(&d, &SkipgramConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InactiveConcept(ref n) if n == "c3"));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let d = ProfileDistribution::new(vec![
            (vec![1, 1, 0], 0.4),
            (vec![0, 1, 1], 0.3),
            (vec![1, 0, 1], 0.3),
        ])
        .unwrap()
        .sample_dataset(20, 2)
        .unwrap();
        let pairs = training_pairs(&d, 2, 9).unwrap();
        let mut rng = rng::seeded(4);
        let table = Array2::from_shape_simple_fn((3, 4), || rng.random_range(-1.0..1.0));
        let grad = skipgram_gradient(&table, &pairs);
        let h = 1e-6;
        for idx in ndarray::indices(table.raw_dim()) {
            let mut plus = table.clone();
            plus[idx] += h;
            let mut minus = table.clone();
            minus[idx] -= h;
            let fd = (skipgram_loss(&plus, &pairs) - skipgram_loss(&minus, &pairs)) / (2.0 * h);
            let rel = (fd - grad[idx]).abs() / fd.abs().max(grad[idx].abs()).max(1e-8);
            assert!(rel < 1e-5, "{idx:?}: fd {fd} vs {}", grad[idx]);
        }
    }

    #[test]
    fn loss_on_frozen_sample_decreases_at_small_rate() {
        let d = two_profiles();
        let cfg = SkipgramConfig {
            learning_rate: 0.005,
            ..SkipgramConfig::with_seed(8)
        };
        let frozen = training_pairs(&d, 1, 77).unwrap();
        let mut trainer = SkipgramTrainer::new(&d, &cfg).unwrap();
        let mut prev = skipgram_loss(trainer.table(), &frozen);
        for epoch in 0..cfg.epochs {
            trainer.run_epoch();
            let loss = skipgram_loss(trainer.table(), &frozen);
            assert!(loss <= prev, "epoch {epoch}: {loss} > {prev}");
            prev = loss;
        }
    }
}
