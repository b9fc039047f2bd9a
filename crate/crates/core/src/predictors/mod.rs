//! Desk-scale concept predictor `g` (features -> concept probabilities)
//! and label predictor `f` (concepts -> label distribution), trained by
//! full-batch gradient descent, plus the two linear models of the
//! mixture scenario.
//!
//! Weight matrices carry the bias as their last row.

mod appendix_i;
mod file;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng as _;

use crate::datasets::ConceptDataset;
use crate::error::{Error, Result};
use crate::rng;

pub use appendix_i::{fit_appendix_i, AppendixIKind, AppendixIModel};
pub use file::{load_predictor, save_predictor, Predictor};

const INIT_SCALE: f64 = 0.1;

/// Loss trace of a gradient-descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    /// Loss before each epoch's update.
    pub losses: Vec<f64>,
    /// Loss after the last update.
    pub final_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptPredictor {
    weights: Array2<f64>,
}

impl ConceptPredictor {
    /// Wraps an `(m + 1) x k` weight matrix.
    pub fn from_weights(weights: Array2<f64>) -> Result<Self> {
        check_weights(&weights)?;
        Ok(ConceptPredictor { weights })
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn num_features(&self) -> usize {
        self.weights.nrows() - 1
    }

    pub fn num_concepts(&self) -> usize {
        self.weights.ncols()
    }

    /// Per-concept probabilities for each row of `x` (n x k).
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        affine(&self.weights, x).mapv(sigmoid)
    }

    pub fn predict_one(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.predict(x.insert_axis(Axis(0))).row(0).to_owned()
    }

    /// Mean binary cross-entropy over all samples and concepts.
    pub fn loss(&self, x: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>) -> f64 {
        let z = affine(&self.weights, x);
        let total: f64 = z
            .iter()
            .zip(targets.iter())
            .map(|(&z, &c)| softplus(z) - c * z)
            .sum();
        total / z.len() as f64
    }

    pub fn gradient(&self, x: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>) -> Array2<f64> {
        let residual = self.predict(x) - targets;
        augmented_gradient(x, &residual, residual.len() as f64)
    }

    /// Fraction of concept entries whose thresholded probability matches.
    pub fn accuracy(&self, x: ArrayView2<'_, f64>, concepts: ArrayView2<'_, u8>) -> f64 {
        let p = self.predict(x);
        let hits = p
            .iter()
            .zip(concepts.iter())
            .filter(|(&p, &c)| u8::from(p >= 0.5) == c)
            .count();
        hits as f64 / p.len().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelPredictor {
    weights: Array2<f64>,
}

impl LabelPredictor {
    /// Wraps a `(k + 1) x L` weight matrix.
    pub fn from_weights(weights: Array2<f64>) -> Result<Self> {
        check_weights(&weights)?;
        Ok(LabelPredictor { weights })
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn num_concepts(&self) -> usize {
        self.weights.nrows() - 1
    }

    pub fn num_labels(&self) -> usize {
        self.weights.ncols()
    }

    /// Label distribution for each row of `c` (n x L).
    pub fn predict(&self, c: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut z = affine(&self.weights, c);
        for mut row in z.rows_mut() {
            softmax_in_place(row.as_slice_mut().expect("standard layout"));
        }
        z
    }

    pub fn predict_one(&self, c: ArrayView1<'_, f64>) -> Array1<f64> {
        self.predict(c.insert_axis(Axis(0))).row(0).to_owned()
    }

    /// Most probable label (1-based); ties go to the lower label.
    pub fn predict_label(&self, c: ArrayView1<'_, f64>) -> usize {
        argmax(self.predict_one(c).view()) + 1
    }

    /// Mean softmax cross-entropy; `labels` are 1-based.
    pub fn loss(&self, c: ArrayView2<'_, f64>, labels: &[usize]) -> f64 {
        let z = affine(&self.weights, c);
        let total: f64 = z
            .rows()
            .into_iter()
            .zip(labels)
            .map(|(row, &y)| log_sum_exp(row) - row[y - 1])
            .sum();
        total / labels.len().max(1) as f64
    }

    pub fn gradient(&self, c: ArrayView2<'_, f64>, labels: &[usize]) -> Array2<f64> {
        let mut residual = self.predict(c);
        for (i, &y) in labels.iter().enumerate() {
            residual[[i, y - 1]] -= 1.0;
        }
        augmented_gradient(c, &residual, labels.len() as f64)
    }

    pub fn accuracy(&self, c: ArrayView2<'_, f64>, labels: &[usize]) -> f64 {
        let p = self.predict(c);
        let hits = p
            .rows()
            .into_iter()
            .zip(labels)
            .filter(|(row, &y)| argmax(row.view()) + 1 == y)
            .count();
        hits as f64 / labels.len().max(1) as f64
    }
}

/// Fits `g` on a dataset's features and concepts.
pub fn train_concept_predictor(
    d: &ConceptDataset,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<(ConceptPredictor, TrainingReport)> {
    let targets = d.concepts_f64();
    let x = d.features().view();
    let init = init_weights(x.ncols() + 1, targets.ncols(), seed);
    let mut model = ConceptPredictor { weights: init };
    let report = descend(epochs, lr, &mut model.weights, |w| {
        let m = ConceptPredictor { weights: w.clone() };
        (m.loss(x, targets.view()), m.gradient(x, targets.view()))
    })?;
    Ok((model, report))
}

/// Fits `f` on binary concepts and 1-based labels in `1..=num_labels`.
pub fn train_label_predictor(
    concepts: ArrayView2<'_, f64>,
    labels: &[usize],
    num_labels: usize,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<(LabelPredictor, TrainingReport)> {
    if concepts.nrows() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} concept rows for {} labels",
            concepts.nrows(),
            labels.len()
        )));
    }
    if let Some(&y) = labels.iter().find(|&&y| y == 0 || y > num_labels) {
        return Err(Error::invalid(format!(
            "label {y} outside 1..={num_labels}"
        )));
    }
    let init = init_weights(concepts.ncols() + 1, num_labels, seed);
    let mut model = LabelPredictor { weights: init };
    let report = descend(epochs, lr, &mut model.weights, |w| {
        let m = LabelPredictor { weights: w.clone() };
        (m.loss(concepts, labels), m.gradient(concepts, labels))
    })?;
    Ok((model, report))
}

fn descend(
    epochs: usize,
    lr: f64,
    weights: &mut Array2<f64>,
    mut loss_and_grad: impl FnMut(&Array2<f64>) -> (f64, Array2<f64>),
) -> Result<TrainingReport> {
    if epochs == 0 {
        return Err(Error::invalid("epochs must be >= 1"));
    }
    if !(lr.is_finite() && lr >= 0.0) {
        return Err(Error::invalid(format!("learning rate {lr} must be >= 0")));
    }
    let mut losses = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let (loss, grad) = loss_and_grad(weights);
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        losses.push(loss);
        weights.scaled_add(-lr, &grad);
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
    }
    let (final_loss, _) = loss_and_grad(weights);
    if !final_loss.is_finite() {
        return Err(Error::Divergence { epoch: epochs });
    }
    Ok(TrainingReport { losses, final_loss })
}

pub(crate) fn init_weights(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = rng::seeded(seed);
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-INIT_SCALE..=INIT_SCALE))
}

fn check_weights(w: &Array2<f64>) -> Result<()> {
    if w.nrows() < 2 || w.ncols() == 0 {
        return Err(Error::invalid(
            "weight matrix needs at least one input row plus bias",
        ));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("predictor weights".into()));
    }
    Ok(())
}

/// `x W[..m] + W[m]`.
fn affine(w: &Array2<f64>, x: ArrayView2<'_, f64>) -> Array2<f64> {
    let m = w.nrows() - 1;
    assert_eq!(x.ncols(), m, "input width does not match predictor");
    x.dot(&w.slice(s![..m, ..])) + w.row(m)
}

/// Gradient of a mean loss whose logit residuals are `residual`.
fn augmented_gradient(x: ArrayView2<'_, f64>, residual: &Array2<f64>, denom: f64) -> Array2<f64> {
    let m = x.ncols();
    let mut grad = Array2::zeros((m + 1, residual.ncols()));
    grad.slice_mut(s![..m, ..]).assign(&x.t().dot(residual));
    grad.row_mut(m).assign(&residual.sum_axis(Axis(0)));
    grad / denom
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn log_sum_exp(row: ArrayView1<'_, f64>) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Index of the largest entry; ties go to the lower index.
pub(crate) fn argmax(v: ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
