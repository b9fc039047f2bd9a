use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CorrelationRow, Imputer, InterventionOutcome, InterventionPolicy, OutcomeRow};
use crate::bases::{label_basis, ConceptBasis};
use crate::datasets::{gen_correlated_pairs, ConceptDataset};
use crate::error::{Error, Result};
use crate::predictors::{
    train_concept_predictor, train_label_predictor, ConceptPredictor, LabelPredictor,
};
use crate::rng::{self, Rng};

/// `round(fraction * units)`, kept within `0..=units`.
pub fn intervened_count(fraction: f64, units: usize) -> usize {
    ((fraction * units as f64).round().max(0.0) as usize).min(units)
}

/// Draws `count` concepts (or, with `groups`, `count` whole groups)
/// uniformly without replacement. Returns sorted concept indices.
pub fn select_intervened(
    k: usize,
    groups: Option<&[Vec<usize>]>,
    count: usize,
    rng: &mut Rng,
) -> Vec<usize> {
    let mut out: Vec<usize> = match groups {
        Some(groups) => sample(rng, groups.len(), count)
            .into_iter()
            .flat_map(|g| groups[g].iter().copied())
            .collect(),
        None => sample(rng, k, count).into_vec(),
    };
    out.sort_unstable();
    out
}

/// For every fraction and seed, intervenes on a fresh random selection per
/// evaluation sample and records mean task and concept accuracy.
///
/// Selections depend only on `(seed, fraction, sample)`, so sweeps with
/// different policies see identical interventions.
#[allow(clippy::too_many_arguments)]
pub fn intervention_sweep(
    f: &LabelPredictor,
    g: &ConceptPredictor,
    b: &ConceptBasis,
    d: &ConceptDataset,
    fractions: &[f64],
    policy: InterventionPolicy,
    group_mode: bool,
    seeds: &[u64],
    basis_name: &str,
) -> Result<InterventionOutcome> {
    if fractions.is_empty() || seeds.is_empty() {
        return Err(Error::invalid("fractions and seeds must be non-empty"));
    }
    if let Some(fr) = fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(Error::invalid(format!("fraction {fr} outside [0, 1]")));
    }
    let k = d.num_concepts();
    if g.num_features() != d.num_features()
        || g.num_concepts() != k
        || f.num_concepts() != k
        || b.num_concepts() != k
    {
        return Err(Error::DimensionMismatch(
            "predictors or basis do not fit the dataset".into(),
        ));
    }
    let groups = if group_mode {
        Some(
            d.groups()
                .ok_or_else(|| Error::invalid("group mode needs concept groups"))?,
        )
    } else {
        None
    };
    let units = groups.map_or(k, <[_]>::len);
    let imputer = Imputer::new(b, policy)?;
    let predicted = g.predict(d.features().view());
    let n = d.num_samples();

    let mut rows = Vec::with_capacity(fractions.len() * seeds.len());
    for &fraction in fractions {
        let count = intervened_count(fraction, units);
        for &seed in seeds {
            let base = rng::derive(seed, fraction.to_bits());
            let (task_hits, concept_hits) = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut r = rng::stream(base, i as u64);
                    let chosen = select_intervened(k, groups, count, &mut r);
                    let truth = d.concept_row(i);
                    let c_hat = imputer.impute(predicted.row(i), truth, &chosen);
                    let task = usize::from(f.predict_label(c_hat.view()) == d.labels()[i]);
                    let concept = c_hat
                        .iter()
                        .zip(truth.iter())
                        .filter(|(&c, &t)| u8::from(c >= 0.5) == t)
                        .count();
                    (task, concept)
                })
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            rows.push(OutcomeRow {
                fraction,
                policy: policy.mode().name().to_string(),
                basis: basis_name.to_string(),
                seed,
                task_acc: task_hits as f64 / n as f64,
                concept_acc: concept_hits as f64 / (n * k) as f64,
            });
        }
    }
    Ok(InterventionOutcome { rows })
}

/// Training setup for a concept-bottleneck pipeline: `g` on features,
/// `f` on ground-truth concepts, label basis on the training split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineParams {
    pub train_fraction: f64,
    pub g_epochs: usize,
    pub g_lr: f64,
    pub f_epochs: usize,
    pub f_lr: f64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            train_fraction: 0.8,
            g_epochs: 100,
            g_lr: 0.5,
            f_epochs: 200,
            f_lr: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub g: ConceptPredictor,
    pub f: LabelPredictor,
    pub basis: ConceptBasis,
    pub train: ConceptDataset,
    pub test: ConceptDataset,
}

impl Pipeline {
    pub fn fit(d: &ConceptDataset, params: &PipelineParams, seed: u64) -> Result<Self> {
        let n = d.num_samples();
        let cut =
            ((n as f64 * params.train_fraction).round() as usize).clamp(1, n.saturating_sub(1));
        if n < 2 {
            return Err(Error::invalid("need at least 2 samples to split"));
        }
        let train = d.slice_rows(0, cut)?;
        let test = d.slice_rows(cut, n)?;
        let (g, _) =
            train_concept_predictor(&train, params.g_epochs, params.g_lr, rng::derive(seed, 10))?;
        let (f, _) = train_label_predictor(
            train.concepts_f64().view(),
            train.labels(),
            train.num_labels(),
            params.f_epochs,
            params.f_lr,
            rng::derive(seed, 11),
        )?;
        let basis = label_basis(&train)?;
        Ok(Pipeline {
            g,
            f,
            basis,
            train,
            test,
        })
    }

    /// Concept accuracy of `g` on the test split.
    pub fn concept_accuracy(&self) -> f64 {
        self.g
            .accuracy(self.test.features().view(), self.test.concepts().view())
    }

    /// Task accuracy of `f(g(x))` on the test split.
    pub fn task_accuracy(&self) -> f64 {
        let c = self.g.predict(self.test.features().view());
        self.f.accuracy(c.view(), self.test.labels())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrelationSweepParams {
    pub n_digits: usize,
    pub n_samples: usize,
    pub feature_noise: f64,
    /// Intervened fraction for the `intervention_acc` measure.
    pub fraction: f64,
    pub pipeline: PipelineParams,
}

impl Default for CorrelationSweepParams {
    fn default() -> Self {
        CorrelationSweepParams {
            n_digits: 10,
            n_samples: 2000,
            feature_noise: 0.5,
            fraction: 0.5,
            pipeline: PipelineParams::default(),
        }
    }
}

/// Fresh data and predictors per correlation rate and seed; records the
/// concept accuracy, the task accuracy and the task accuracy after
/// intervention at `params.fraction`.
pub fn correlation_sweep(
    rates: &[f64],
    params: &CorrelationSweepParams,
    policy: InterventionPolicy,
    seeds: &[u64],
) -> Result<Vec<CorrelationRow>> {
    if rates.is_empty() || seeds.is_empty() {
        return Err(Error::invalid("rates and seeds must be non-empty"));
    }
    let mut rows = Vec::with_capacity(rates.len() * seeds.len() * 3);
    for &rate in rates {
        for &seed in seeds {
            let d = gen_correlated_pairs(
                params.n_digits,
                params.n_samples,
                rate,
                params.feature_noise,
                seed,
            )?;
            let p = Pipeline::fit(&d, &params.pipeline, seed)?;
            let sweep = intervention_sweep(
                &p.f,
                &p.g,
                &p.basis,
                &p.test,
                &[params.fraction],
                policy,
                false,
                &[seed],
                "label",
            )?;
            let row = |measure: &str, fraction: f64, value: f64| CorrelationRow {
                rate,
                seed,
                measure: measure.to_string(),
                fraction,
                value,
            };
            rows.push(row("concept_acc", 0.0, p.concept_accuracy()));
            rows.push(row("task_acc", 0.0, p.task_accuracy()));
            rows.push(row(
                "intervention_acc",
                params.fraction,
                sweep.rows[0].task_acc,
            ));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervention::InterventionMode;

    fn setup() -> (Pipeline, ConceptDataset) {
        let d = gen_correlated_pairs(4, 600, 0.9, 0.6, 1).unwrap();
        let p = Pipeline::fit(&d, &PipelineParams::default(), 1).unwrap();
        let test = p.test.clone();
        (p, test)
    }

    #[test]
    fn counts_round_to_nearest() {
        assert_eq!(intervened_count(0.25, 10), 3);
        assert_eq!(intervened_count(0.0, 10), 0);
        assert_eq!(intervened_count(1.0, 7), 7);
        assert_eq!(intervened_count(0.5, 3), 2);
    }

    #[test]
    fn full_intervention_equals_ground_truth_accuracy() {
        let (p, test) = setup();
        let truth_acc = p.f.accuracy(test.concepts_f64().view(), test.labels());
        for policy in [
            InterventionPolicy::predictor_only(),
            InterventionPolicy::basis_hard(1).unwrap(),
            InterventionPolicy::basis_weighted(3).unwrap(),
        ] {
            let out = intervention_sweep(
                &p.f,
                &p.g,
                &p.basis,
                &test,
                &[1.0],
                policy,
                false,
                &[0, 1],
                "label",
            )
            .unwrap();
            for r in &out.rows {
                assert_eq!(r.task_acc, truth_acc);
                assert_eq!(r.concept_acc, 1.0);
            }
        }
    }

    #[test]
    fn zero_fraction_equals_predictor_only() {
        let (p, test) = setup();
        let base = p.task_accuracy();
        let out = intervention_sweep(
            &p.f,
            &p.g,
            &p.basis,
            &test,
            &[0.0],
            InterventionPolicy::basis_hard(2).unwrap(),
            false,
            &[3],
            "label",
        )
        .unwrap();
        assert_eq!(out.rows[0].task_acc, base);
    }

    #[test]
    fn group_mode_intervenes_whole_groups() {
        let (p, test) = setup();
        let groups = test.groups().unwrap();
        let mut r = rng::seeded(0);
        let chosen = select_intervened(8, Some(groups), 1, &mut r);
        assert!(chosen == groups[0] || chosen == groups[1]);
        let out = intervention_sweep(
            &p.f,
            &p.g,
            &p.basis,
            &test,
            &[0.5],
            InterventionPolicy::predictor_only(),
            true,
            &[0],
            "label",
        )
        .unwrap();
        assert_eq!(out.rows.len(), 1);
        let no_groups = test.clone().with_groups(None).unwrap();
        assert!(intervention_sweep(
            &p.f,
            &p.g,
            &p.basis,
            &no_groups,
            &[0.5],
            InterventionPolicy::predictor_only(),
            true,
            &[0],
            "label"
        )
        .is_err());
    }

    #[test]
    fn sweeps_are_reproducible() {
        let (p, test) = setup();
        let run = || {
            intervention_sweep(
                &p.f,
                &p.g,
                &p.basis,
                &test,
                &[0.2, 0.6],
                InterventionPolicy::basis_hard(1).unwrap(),
                false,
                &[4, 5],
                "label",
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn single_rate_gives_one_row_per_measure() {
        let params = CorrelationSweepParams {
            n_digits: 3,
            n_samples: 200,
            ..Default::default()
        };
        let policy =
            InterventionPolicy::new(InterventionMode::BasisHard, 1, Default::default()).unwrap();
        let rows = correlation_sweep(&[0.5], &params, policy, &[0]).unwrap();
        let measures: Vec<&str> = rows.iter().map(|r| r.measure.as_str()).collect();
        assert_eq!(
            measures,
            vec!["concept_acc", "task_acc", "intervention_acc"]
        );
    }
}
