//! Co-occurrence matrices and Monte Carlo checks of the two guarantees
//! behind label-basis intervention:
//!
//! * the inner-product estimate of `M[i][j] = P(c_j = 1 | c_i = 1)` from a
//!   label basis is within `eps` of the truth with probability `1 - delta`
//!   once `n >= n*` ([`verify_theorem1`]);
//! * picking the most co-occurring intervened concept from a noisy `M`
//!   loses at most a Gaussian-tail-weighted sum of gaps
//!   ([`verify_theorem2`]).

mod normal;

use ndarray::{Array2, ArrayView2};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::ConceptBasis;
use crate::datasets::ProfileDistribution;
use crate::error::{Error, Result};
use crate::rng;

pub use normal::std_normal_cdf;

/// `M[i][j] = P(c_j = 1 | c_i = 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceMatrix {
    m: Array2<f64>,
}

impl CooccurrenceMatrix {
    pub fn new(m: Array2<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "co-occurrence matrix must be square and non-empty, got {:?}",
                m.dim()
            )));
        }
        if let Some(v) = m.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!(
                "co-occurrence entry {v} outside [0, 1]"
            )));
        }
        Ok(CooccurrenceMatrix { m })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.m
    }

    pub fn num_concepts(&self) -> usize {
        self.m.nrows()
    }

    pub fn theta(&self) -> f64 {
        self.m.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// First (row-major) entry attaining the minimum, 0-based.
    pub fn argmin(&self) -> (usize, usize) {
        let theta = self.theta();
        ndarray::indices(self.m.raw_dim())
            .into_iter()
            .find(|&(i, j)| self.m[[i, j]] == theta)
            .expect("non-empty")
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &CooccurrenceMatrix) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn exact_cooccurrence(p: &ProfileDistribution) -> Result<CooccurrenceMatrix> {
    let k = p.num_concepts();
    let mut joint = Array2::<f64>::zeros((k, k));
    for (pattern, prob) in p.profiles() {
        for i in (0..k).filter(|&i| pattern[i] == 1) {
            for j in (0..k).filter(|&j| pattern[j] == 1) {
                joint[[i, j]] += prob;
            }
        }
    }
    for i in 0..k {
        if joint[[i, i]] <= 0.0 {
            return Err(Error::invalid(format!(
                "concept {} has zero marginal probability",
                i + 1
            )));
        }
    }
    let m = Array2::from_shape_fn((k, k), |(i, j)| {
        if i == j {
            1.0
        } else {
            (joint[[i, j]] / joint[[i, i]]).min(1.0)
        }
    });
    CooccurrenceMatrix::new(m)
}

/// `M̂[i][j] = v_i . v_j / |v_i|` with `|v_i|` the number of active
/// entries, for a binary-valued label basis.
pub fn estimate_cooccurrence(b: &ConceptBasis) -> Result<CooccurrenceMatrix> {
    let v = b.vectors();
    if let Some(x) = v.iter().find(|&&x| x != 0.0 && x != 1.0) {
        return Err(Error::invalid(format!(
            "co-occurrence estimate needs a binary label basis, found entry {x}"
        )));
    }
    let k = b.num_concepts();
    let counts: Vec<f64> = (0..k).map(|i| v.row(i).sum()).collect();
    if let Some(i) = counts.iter().position(|&c| c == 0.0) {
        return Err(Error::InactiveConcept(b.names()[i].clone()));
    }
    let gram = v.dot(&v.t());
    CooccurrenceMatrix::new(Array2::from_shape_fn((k, k), |(i, j)| {
        gram[[i, j]] / counts[i]
    }))
}

/// Same estimate straight from an `n x k` concept matrix; also covers
/// `k = 1`, which a basis cannot hold.
pub fn cooccurrence_from_concepts(c: ArrayView2<'_, u8>) -> Result<CooccurrenceMatrix> {
    let k = c.ncols();
    let mut both = Array2::<f64>::zeros((k, k));
    for row in c.rows() {
        for i in (0..k).filter(|&i| row[i] == 1) {
            for j in (0..k).filter(|&j| row[j] == 1) {
                both[[i, j]] += 1.0;
            }
        }
    }
    if let Some(i) = (0..k).find(|&i| both[[i, i]] == 0.0) {
        return Err(Error::InactiveConcept(format!("c{}", i + 1)));
    }
    CooccurrenceMatrix::new(Array2::from_shape_fn((k, k), |(i, j)| {
        both[[i, j]] / both[[i, i]]
    }))
}

/// A random profile distribution over `k` concepts: `n_profiles` patterns
/// with Bernoulli(1/2) entries and normalised uniform weights. Concepts
/// left inactive everywhere are switched on in one random profile, so
/// every marginal is positive.
pub fn random_profile_distribution(
    k: usize,
    n_profiles: usize,
    seed: u64,
) -> Result<ProfileDistribution> {
    use rand::Rng as _;
    if k == 0 || n_profiles == 0 {
        return Err(Error::invalid("k and n_profiles must be >= 1"));
    }
    let mut r = rng::seeded(seed);
    let mut patterns: Vec<Vec<u8>> = (0..n_profiles)
        .map(|_| (0..k).map(|_| u8::from(r.random_bool(0.5))).collect())
        .collect();
    for j in 0..k {
        if patterns.iter().all(|p| p[j] == 0) {
            let at = r.random_range(0..n_profiles);
            patterns[at][j] = 1;
        }
    }
    let weights: Vec<f64> = (0..n_profiles).map(|_| r.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let drift = 1.0 - probs.iter().sum::<f64>();
    probs[0] += drift;
    ProfileDistribution::new(patterns.into_iter().zip(probs).collect())
}

/// Corrected sample threshold
/// `n* = ceil(3 / (eps^2 theta) * ln(1 / (1 - (1 - delta)^(1/k^2))))`.
pub fn theorem1_threshold(epsilon: f64, delta: f64, k: usize, theta: f64) -> Result<usize> {
    check_unit("epsilon", epsilon)?;
    check_unit("delta", delta)?;
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::invalid(format!("theta {theta} must lie in (0, 1]")));
    }
    let per_entry = 1.0 - (1.0 - delta).powf(1.0 / (k * k) as f64);
    let n = 3.0 / (epsilon * epsilon * theta) * (1.0 / per_entry).ln();
    Ok(n.ceil().max(1.0) as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_star: Option<usize>,
    pub trials: usize,
    /// Failure frequency (estimation check) or mean regret (regret check).
    pub empirical: f64,
    pub stderr: f64,
    /// `delta` (estimation check) or the analytic regret bound (regret check).
    pub threshold: f64,
    pub pass: bool,
}

impl TheoremReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialises") + "\n"
    }

    pub fn summary(&self) -> String {
        let what = if self.theorem == "theorem1" {
            "failure frequency"
        } else {
            "mean regret"
        };
        let n = self.n.map(|n| format!(" n={n}")).unwrap_or_default();
        format!(
            "{} {}: {what} {:.6} (se {:.6}) vs {} {:.6}, eps={} k={}{n} trials={}",
            self.theorem,
            if self.pass { "PASS" } else { "FAIL" },
            self.empirical,
            self.stderr,
            if self.theorem == "theorem1" {
                "delta"
            } else {
                "bound"
            },
            self.threshold,
            self.epsilon,
            self.k,
            self.trials
        )
    }
}

/// Draws `trials` datasets of size `n` and returns the fraction with
/// `max |M - M̂| >= eps`. A concept absent from a sample counts as a
/// failure since its conditionals cannot be estimated.
pub fn theorem1_failure_rate(
    p: &ProfileDistribution,
    epsilon: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n == 0 || trials == 0 {
        return Err(Error::invalid("n and trials must be >= 1"));
    }
    let exact = exact_cooccurrence(p)?;
    let k = p.num_concepts();
    let names: Vec<String> = (1..=k).map(|j| format!("c{j}")).collect();
    let failures: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, t);
            let c = p.sample_concepts(n, &mut r);
            let estimate = if k >= 2 {
                ConceptBasis::new(names.clone(), c.t().mapv(f64::from))
                    .and_then(|b| estimate_cooccurrence(&b))
            } else {
                cooccurrence_from_concepts(c.view())
            };
            match estimate {
                Ok(m_hat) => exact.max_abs_diff(&m_hat) >= epsilon,
                Err(_) => true,
            }
        })
        .collect();
    let freq = failures.iter().filter(|&&f| f).count() as f64 / trials as f64;
    Ok((freq, (freq * (1.0 - freq) / trials as f64).sqrt()))
}

pub fn verify_theorem1(
    p: &ProfileDistribution,
    epsilon: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<TheoremReport> {
    let exact = exact_cooccurrence(p)?;
    if exact.theta() <= 0.0 {
        let (row, col) = exact.argmin();
        return Err(Error::ZeroTheta {
            row: row + 1,
            col: col + 1,
        });
    }
    let n_star = theorem1_threshold(epsilon, delta, p.num_concepts(), exact.theta())?;
    verify_theorem1_at(p, epsilon, delta, n_star, trials, seed).map(|mut r| {
        r.n_star = Some(n_star);
        r
    })
}

/// Estimation check at an explicit sample size.
pub fn verify_theorem1_at(
    p: &ProfileDistribution,
    epsilon: f64,
    delta: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<TheoremReport> {
    check_unit("epsilon", epsilon)?;
    check_unit("delta", delta)?;
    let (freq, se) = theorem1_failure_rate(p, epsilon, n, trials, seed)?;
    Ok(TheoremReport {
        theorem: "theorem1".into(),
        epsilon,
        delta: Some(delta),
        k: p.num_concepts(),
        n: Some(n),
        n_star: None,
        trials,
        empirical: freq,
        stderr: se,
        threshold: delta,
        pass: freq <= delta + 3.0 * se,
    })
}

/// `sum_i sum_{j != beta_i} Phi((M_ij - M_iβ) / eps) (M_iβ - M_ij)` over
/// `rows`, with `β_i` the best of `candidates` for row `i`.
pub fn theorem2_bound(
    m: ArrayView2<'_, f64>,
    rows: &[usize],
    candidates: &[usize],
    epsilon: f64,
) -> f64 {
    rows.iter()
        .map(|&i| {
            let beta = best(m, i, candidates);
            candidates
                .iter()
                .filter(|&&j| j != beta)
                .map(|&j| {
                    let gap = m[[i, beta]] - m[[i, j]];
                    std_normal_cdf(-gap / epsilon) * gap
                })
                .sum::<f64>()
        })
        .sum()
}

/// Regret check with unintervened rows imputed from the intervened
/// concepts (`intervened` is 0-based).
pub fn verify_theorem2(
    m: &CooccurrenceMatrix,
    intervened: &[usize],
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<TheoremReport> {
    let k = m.num_concepts();
    if let Some(&j) = intervened.iter().find(|&&j| j >= k) {
        return Err(Error::IndexOutOfRange { index: j, len: k });
    }
    let rows: Vec<usize> = (0..k).filter(|i| !intervened.contains(i)).collect();
    if rows.is_empty() {
        return Err(Error::invalid(
            "at least one concept must stay unintervened",
        ));
    }
    verify_theorem2_on(m, &rows, intervened, epsilon, trials, seed)
}

/// Regret check over explicit rows and candidate columns (0-based).
pub fn verify_theorem2_on(
    m: &CooccurrenceMatrix,
    rows: &[usize],
    candidates: &[usize],
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<TheoremReport> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon {epsilon} must be > 0")));
    }
    if rows.is_empty() || candidates.is_empty() || trials == 0 {
        return Err(Error::invalid(
            "rows, candidates and trials must be non-empty",
        ));
    }
    let k = m.num_concepts();
    if let Some(&j) = rows.iter().chain(candidates).find(|&&j| j >= k) {
        return Err(Error::IndexOutOfRange { index: j, len: k });
    }
    let mv = m.matrix().view();
    let regrets: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, t);
            rows.iter()
                .map(|&i| {
                    let beta = best(mv, i, candidates);
                    let noisy: Vec<f64> = candidates
                        .iter()
                        .map(|&j| {
                            let z: f64 = StandardNormal.sample(&mut r);
                            mv[[i, j]] + epsilon * z
                        })
                        .collect();
                    let pick = candidates[argmax_first(&noisy)];
                    mv[[i, beta]] - mv[[i, pick]]
                })
                .sum::<f64>()
        })
        .collect();
    let mean = regrets.iter().sum::<f64>() / trials as f64;
    let var = if trials > 1 {
        regrets.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (trials - 1) as f64
    } else {
        0.0
    };
    let se = (var / trials as f64).sqrt();
    let bound = theorem2_bound(mv, rows, candidates, epsilon);
    Ok(TheoremReport {
        theorem: "theorem2".into(),
        epsilon,
        delta: None,
        k,
        n: None,
        n_star: None,
        trials,
        empirical: mean,
        stderr: se,
        threshold: bound,
        pass: mean <= bound + 3.0 * se,
    })
}

fn best(m: ArrayView2<'_, f64>, i: usize, candidates: &[usize]) -> usize {
    let vals: Vec<f64> = candidates.iter().map(|&j| m[[i, j]]).collect();
    candidates[argmax_first(&vals)]
}

fn argmax_first(v: &[f64]) -> usize {
    let mut b = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[b] {
            b = i;
        }
    }
    b
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {v} must lie in (0, 1)")))
    }
}
