use nalgebra::DMatrix;
use ndarray::Array2;
use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::ConceptDataset;
use crate::error::{Error, Result};
use crate::rng;

/// Feature noise used by [`gen_weak_correlation`].
pub const WEAK_FEATURE_NOISE: f64 = 0.2;

/// Coloured-digit analogue: `n_digits` one-hot digit concepts followed by
/// `n_digits` one-hot colour concepts.
///
/// With probability `correlation_rate` the colour matches the digit;
/// otherwise it is drawn uniformly. Features are both one-hot blocks plus
/// Gaussian noise, declared on the range `[0, 1]`. The label is the digit
/// (1-based).
pub fn gen_correlated_pairs(
    n_digits: usize,
    n_samples: usize,
    correlation_rate: f64,
    feature_noise: f64,
    seed: u64,
) -> Result<ConceptDataset> {
    if n_digits < 2 {
        return Err(Error::invalid(format!(
            "n_digits must be >= 2, got {n_digits}"
        )));
    }
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be >= 1"));
    }
    if !(0.0..=1.0).contains(&correlation_rate) {
        return Err(Error::invalid(format!(
            "correlation_rate {correlation_rate} outside [0, 1]"
        )));
    }
    let noise = Normal::new(0.0, feature_noise)
        .map_err(|_| Error::invalid(format!("feature_noise {feature_noise} must be >= 0")))?;

    let k = 2 * n_digits;
    let mut rng = rng::seeded(seed);
    let mut concepts = Array2::<u8>::zeros((n_samples, k));
    let mut features = Array2::<f64>::zeros((n_samples, k));
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let digit = rng.random_range(0..n_digits);
        let colour = if rng.random_bool(correlation_rate) {
            digit
        } else {
            rng.random_range(0..n_digits)
        };
        concepts[[i, digit]] = 1;
        concepts[[i, n_digits + colour]] = 1;
        labels.push(digit + 1);
        for j in 0..k {
            features[[i, j]] = f64::from(concepts[[i, j]]) + noise.sample(&mut rng);
        }
    }

    let names = (0..n_digits)
        .map(|d| format!("digit_{d}"))
        .chain((0..n_digits).map(|c| format!("colour_{c}")))
        .collect();
    let groups = vec![(0..n_digits).collect(), (n_digits..k).collect()];
    ConceptDataset::new(
        features,
        (0.0, 1.0),
        concepts,
        labels,
        n_digits,
        names,
        Some(groups),
    )
}

/// Ground-truth digit/colour matching for a pairs dataset with `n_digits` digits.
pub fn pairs_pairing(n_digits: usize) -> Vec<(usize, usize)> {
    (0..n_digits).map(|d| (d, n_digits + d)).collect()
}

/// Binary concepts with requested pairwise (phi) correlations, realised
/// through a Gaussian copula thresholded at zero, so every concept has
/// marginal probability 1/2.
///
/// `pair_correlations` holds 0-based `(i, j, phi)` triples; unlisted pairs
/// are independent. The label is the base-2 encoding `1 + sum_j c_j 2^j`.
pub fn gen_weak_correlation(
    k: usize,
    n_samples: usize,
    pair_correlations: &[(usize, usize, f64)],
    seed: u64,
) -> Result<ConceptDataset> {
    if k == 0 || k > 20 {
        return Err(Error::invalid(format!("k must be in 1..=20, got {k}")));
    }
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be >= 1"));
    }

    // For latent correlation rho, thresholding at zero gives phi = (2/pi) asin(rho).
    let mut cov = DMatrix::<f64>::identity(k, k);
    for &(a, b, phi) in pair_correlations {
        if a >= k || b >= k {
            return Err(Error::IndexOutOfRange {
                index: a.max(b) + 1,
                len: k,
            });
        }
        if a == b {
            return Err(Error::invalid(format!(
                "pair ({}, {}) repeats a concept",
                a + 1,
                b + 1
            )));
        }
        if !(-1.0..=1.0).contains(&phi) {
            return Err(Error::invalid(format!("correlation {phi} outside [-1, 1]")));
        }
        let rho = (std::f64::consts::FRAC_PI_2 * phi).sin();
        cov[(a, b)] = rho;
        cov[(b, a)] = rho;
    }
    let chol = cholesky_or_offenders(&cov, pair_correlations)?;

    let mut rng = rng::seeded(seed);
    let noise = Normal::new(0.0, WEAK_FEATURE_NOISE).expect("constant noise is valid");
    let mut concepts = Array2::<u8>::zeros((n_samples, k));
    let mut features = Array2::<f64>::zeros((n_samples, k));
    let mut labels = Vec::with_capacity(n_samples);
    let mut z = vec![0.0; k];
    for i in 0..n_samples {
        for zj in z.iter_mut() {
            *zj = StandardNormal.sample(&mut rng);
        }
        let mut label = 1usize;
        for j in 0..k {
            let latent: f64 = (0..=j).map(|l| chol[(j, l)] * z[l]).sum();
            let c = u8::from(latent > 0.0);
            concepts[[i, j]] = c;
            label += usize::from(c) << j;
            features[[i, j]] = f64::from(c) + noise.sample(&mut rng);
        }
        labels.push(label);
    }

    let names = (1..=k).map(|j| format!("c{j}")).collect();
    ConceptDataset::new(features, (0.0, 1.0), concepts, labels, 1 << k, names, None)
}

/// Lower Cholesky factor of `cov`, with a small jitter so that singular
/// but PSD structures (e.g. phi = 1) still factor. On failure the error
/// names the requested pairs that involve the first concept whose leading
/// block is not positive semi-definite.
fn cholesky_or_offenders(
    cov: &DMatrix<f64>,
    pairs: &[(usize, usize, f64)],
) -> Result<DMatrix<f64>> {
    const JITTER: f64 = 1e-10;
    let k = cov.nrows();
    let jittered = cov + DMatrix::<f64>::identity(k, k) * JITTER;
    if let Some(chol) = jittered.clone().cholesky() {
        return Ok(chol.l());
    }
    let first_bad = (1..=k)
        .find(|&m| {
            jittered
                .view((0, 0), (m, m))
                .into_owned()
                .cholesky()
                .is_none()
        })
        .unwrap_or(k)
        - 1;
    let offenders: Vec<String> = pairs
        .iter()
        .filter(|&&(a, b, _)| {
            (a == first_bad && b < first_bad) || (b == first_bad && a < first_bad)
        })
        .map(|&(a, b, phi)| format!("({}, {}, {phi})", a + 1, b + 1))
        .collect();
    Err(Error::InfeasibleCorrelation(offenders.join(", ")))
}

/// Two-dimensional mixture scenario with four threshold concepts and two
/// tasks.
///
/// Cases (each w.p. 1/3): both coordinates in `[0, 1/4]`; both in
/// `[3/4, 1]`; one low and one high, the low side chosen uniformly.
/// Concepts are `[x1 <= 1/4, x1 >= 3/4, x2 <= 1/4, x2 >= 3/4]`. The tasks
/// `y1 = [min(x) <= 1/4]` and `y2 = [max(x) >= 3/4]` are packed into the
/// label `1 + y1 + 2 y2`; see [`appendix_i_tasks`].
pub fn gen_appendix_i(n_samples: usize, seed: u64) -> Result<ConceptDataset> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be >= 1"));
    }
    let mut rng = rng::seeded(seed);
    let mut features = Array2::<f64>::zeros((n_samples, 2));
    let mut concepts = Array2::<u8>::zeros((n_samples, 4));
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let (x1_low, x2_low) = match rng.random_range(0..3u8) {
            0 => (true, true),
            1 => (false, false),
            _ => {
                let first_low = rng.random_bool(0.5);
                (first_low, !first_low)
            }
        };
        let mut draw = |low: bool| {
            if low {
                rng.random_range(0.0..=0.25)
            } else {
                rng.random_range(0.75..=1.0)
            }
        };
        let x1: f64 = draw(x1_low);
        let x2: f64 = draw(x2_low);
        features[[i, 0]] = x1;
        features[[i, 1]] = x2;
        concepts[[i, 0]] = u8::from(x1 <= 0.25);
        concepts[[i, 1]] = u8::from(x1 >= 0.75);
        concepts[[i, 2]] = u8::from(x2 <= 0.25);
        concepts[[i, 3]] = u8::from(x2 >= 0.75);
        let y1 = usize::from(x1.min(x2) <= 0.25);
        let y2 = usize::from(x1.max(x2) >= 0.75);
        labels.push(1 + y1 + 2 * y2);
    }
    let names = ["x1_low", "x1_high", "x2_low", "x2_high"]
        .map(String::from)
        .to_vec();
    ConceptDataset::new(
        features,
        (0.0, 1.0),
        concepts,
        labels,
        4,
        names,
        Some(vec![vec![0, 1], vec![2, 3]]),
    )
}

/// Unpacks a mixture-scenario label into its two binary tasks `(y1, y2)`.
pub fn appendix_i_tasks(label: usize) -> (u8, u8) {
    let bits = label - 1;
    ((bits & 1) as u8, ((bits >> 1) & 1) as u8)
}
