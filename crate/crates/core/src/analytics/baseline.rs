use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{manifest_features, FEATURE_DIM, FEATURE_SPEC};
use super::metrics::{metrics, ConfusionMatrix, MetricsReport};
use crate::dataset::{stream_rng, DatasetManifest, StreamPurpose};
use crate::{Error, Label, Result};

/// Optimizer settings for the logistic baseline (Adam on mini-batches).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Coefficient of `l2/2 · ‖w‖²` (bias excluded).
    pub l2: f64,
    /// 0 trains on the full set each step.
    pub batch_size: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            epochs: 150,
            learning_rate: 0.003,
            l2: 0.01,
            batch_size: 64,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::param("baseline.epochs", "must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param("baseline.learning_rate", "must be positive"));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::param("baseline.l2", "must be non-negative"));
        }
        Ok(())
    }
}

/// Logistic regression on standardized features:
/// `p = σ(w · (x − mean) / scale + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub feature_spec: String,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub feature_mean: Vec<f64>,
    pub feature_scale: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn target(label: Label) -> f64 {
    if label.is_positive() {
        1.0
    } else {
        0.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean logistic loss plus L2 penalty and its gradient, on already
/// standardized rows.
fn loss_grad(weights: &[f64], bias: f64, rows: &[&[f64]], ys: &[f64], l2: f64) -> (f64, Vec<f64>, f64) {
    let n = rows.len() as f64;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    let mut loss = 0.0;
    for (x, &y) in rows.iter().zip(ys) {
        let z = dot(weights, x) + bias;
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        gb += r;
        for (g, xi) in gw.iter_mut().zip(x.iter()) {
            *g += r * xi;
        }
    }
    let penalty = 0.5 * l2 * dot(weights, weights);
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (loss / n + penalty, gw, gb / n)
}

impl LinearModel {
    /// All-zero weights with identity standardization.
    pub fn zeros(dim: usize) -> Self {
        LinearModel {
            feature_spec: FEATURE_SPEC.into(),
            weights: vec![0.0; dim],
            bias: 0.0,
            feature_mean: vec![0.0; dim],
            feature_scale: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.feature_mean)
            .zip(&self.feature_scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, &self.standardize(x)) + self.bias)
    }

    /// Deformed above 0.5; an exact tie goes to non-deformed.
    pub fn predict(&self, x: &[f64]) -> Label {
        if self.probability(x) > 0.5 {
            Label::Deformed
        } else {
            Label::NonDeformed
        }
    }

    /// Objective and gradient with respect to `(weights, bias)` on raw
    /// feature rows.
    pub fn loss_and_grad(&self, xs: &[Vec<f64>], labels: &[Label], l2: f64) -> (f64, Vec<f64>, f64) {
        let std: Vec<Vec<f64>> = xs.iter().map(|x| self.standardize(x)).collect();
        let rows: Vec<&[f64]> = std.iter().map(Vec::as_slice).collect();
        let ys: Vec<f64> = labels.iter().map(|&l| target(l)).collect();
        loss_grad(&self.weights, self.bias, &rows, &ys, l2)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).expect("model serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: LinearModel = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            reason: e.to_string(),
        })?;
        let d = m.weights.len();
        if m.feature_mean.len() != d || m.feature_scale.len() != d {
            return Err(Error::Shape(format!("{}: standardization length differs from {d} weights", path.display())));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: LinearModel,
    pub curve: Vec<CurvePoint>,
}

/// Fits standardization on `xs`, then runs Adam over shuffled mini-batches.
/// Deterministic for a given seed.
pub fn train(xs: &[Vec<f64>], labels: &[Label], config: &BaselineConfig, seed: u64) -> Result<Trained> {
    config.validate()?;
    if xs.len() != labels.len() {
        return Err(Error::Shape(format!("{} rows vs {} labels", xs.len(), labels.len())));
    }
    let positives = labels.iter().filter(|l| l.is_positive()).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::Data("training set needs both classes".into()));
    }
    let d = xs[0].len();
    if let Some(bad) = xs.iter().find(|x| x.len() != d) {
        return Err(Error::Shape(format!("feature rows of length {d} and {}", bad.len())));
    }
    let n = xs.len() as f64;
    let mut model = LinearModel::zeros(d);
    for j in 0..d {
        let mean = xs.iter().map(|x| x[j]).sum::<f64>() / n;
        let var = xs.iter().map(|x| (x[j] - mean).powi(2)).sum::<f64>() / n;
        model.feature_mean[j] = mean;
        model.feature_scale[j] = if var.sqrt() > 1e-9 { var.sqrt() } else { 1.0 };
    }
    let std: Vec<Vec<f64>> = xs.iter().map(|x| model.standardize(x)).collect();
    let ys: Vec<f64> = labels.iter().map(|&l| target(l)).collect();

    let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
    let mut m = vec![0.0; d + 1];
    let mut v = vec![0.0; d + 1];
    let mut step = 0i32;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let batch = if config.batch_size == 0 { xs.len() } else { config.batch_size };
    let mut rng = stream_rng(seed, 0, StreamPurpose::Training);
    let mut curve = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let rows: Vec<&[f64]> = chunk.iter().map(|&i| std[i].as_slice()).collect();
            let yb: Vec<f64> = chunk.iter().map(|&i| ys[i]).collect();
            let (_, gw, gb) = loss_grad(&model.weights, model.bias, &rows, &yb, config.l2);
            step += 1;
            let (c1, c2) = (1.0 - b1.powi(step), 1.0 - b2.powi(step));
            for (j, g) in gw.iter().copied().chain(std::iter::once(gb)).enumerate() {
                m[j] = b1 * m[j] + (1.0 - b1) * g;
                v[j] = b2 * v[j] + (1.0 - b2) * g * g;
                let delta = config.learning_rate * (m[j] / c1) / ((v[j] / c2).sqrt() + eps);
                if j < d {
                    model.weights[j] -= delta;
                } else {
                    model.bias -= delta;
                }
            }
        }
        let rows: Vec<&[f64]> = std.iter().map(Vec::as_slice).collect();
        let (loss, _, _) = loss_grad(&model.weights, model.bias, &rows, &ys, config.l2);
        let correct = rows
            .iter()
            .zip(&ys)
            .filter(|(x, &y)| (sigmoid(dot(&model.weights, x) + model.bias) > 0.5) == (y == 1.0))
            .count();
        curve.push(CurvePoint {
            epoch,
            loss,
            accuracy: correct as f64 / n,
        });
    }
    Ok(Trained { model, curve })
}

/// Confusion counts and metrics of `model` on `xs`.
pub fn evaluate(model: &LinearModel, xs: &[Vec<f64>], labels: &[Label]) -> Result<(ConfusionMatrix, MetricsReport)> {
    if xs.is_empty() {
        return Err(Error::Data("evaluation set is empty".into()));
    }
    if xs.len() != labels.len() {
        return Err(Error::Shape(format!("{} rows vs {} labels", xs.len(), labels.len())));
    }
    if let Some(bad) = xs.iter().find(|x| x.len() != model.dim()) {
        return Err(Error::Shape(format!("model expects {} features, row has {}", model.dim(), bad.len())));
    }
    let cm = xs
        .par_iter()
        .zip(labels)
        .map(|(x, &l)| {
            let mut cm = ConfusionMatrix::default();
            cm.record(l, model.predict(x));
            cm
        })
        .reduce(ConfusionMatrix::default, ConfusionMatrix::merge);
    let report = metrics(&cm)?;
    Ok((cm, report))
}

fn check_spec(model: &LinearModel) -> Result<()> {
    if model.feature_spec != FEATURE_SPEC || model.dim() != FEATURE_DIM {
        return Err(Error::Shape(format!(
            "model features `{}` ({}) do not match `{FEATURE_SPEC}` ({FEATURE_DIM})",
            model.feature_spec,
            model.dim()
        )));
    }
    Ok(())
}

pub fn train_baseline(manifest: &DatasetManifest, config: &BaselineConfig, seed: u64) -> Result<Trained> {
    if manifest.is_empty() {
        return Err(Error::Data("training manifest is empty".into()));
    }
    let (xs, labels) = manifest_features(manifest)?;
    train(&xs, &labels, config, seed)
}

pub fn evaluate_manifest(model: &LinearModel, manifest: &DatasetManifest) -> Result<(ConfusionMatrix, MetricsReport)> {
    check_spec(model)?;
    if manifest.is_empty() {
        return Err(Error::Data("evaluation manifest is empty".into()));
    }
    let (xs, labels) = manifest_features(manifest)?;
    evaluate(model, &xs, &labels)
}
