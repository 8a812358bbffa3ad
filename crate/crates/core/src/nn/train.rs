//! Seeded mini-batch training with a held-out validation split.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamParams, AdamState};
use super::MlpModel;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Examples per mini-batch.
    pub batch_size: usize,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 50,
            epochs: 40,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            validation_fraction: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.learning_rate > 0.0
            && self.batch_size > 0
            && self.epochs > 0
            && (0.0..1.0).contains(&self.adam_beta1)
            && (0.0..1.0).contains(&self.adam_beta2)
            && self.adam_eps > 0.0;
        if !positive {
            return Err(Error::Config(format!("invalid training config {self:?}")));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::field(
                "validation_fraction",
                format!("{} not in (0, 1)", self.validation_fraction),
            ));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamParams {
        AdamParams {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }
}

/// Training rows grouped into examples of `rows_per_example` consecutive rows.
/// Splitting, shuffling and batching operate on whole examples.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainData {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub rows_per_example: usize,
}

impl TrainData {
    pub fn new(x: Array2<f64>, y: Array2<f64>, rows_per_example: usize) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(Error::Dimension(format!(
                "{} input rows vs {} target rows",
                x.nrows(),
                y.nrows()
            )));
        }
        if rows_per_example == 0 || !x.nrows().is_multiple_of(rows_per_example) {
            return Err(Error::Dimension(format!(
                "{} rows do not split into examples of {rows_per_example}",
                x.nrows()
            )));
        }
        Ok(Self {
            x,
            y,
            rows_per_example,
        })
    }

    pub fn num_examples(&self) -> usize {
        self.x.nrows() / self.rows_per_example
    }

    fn rows(&self, examples: &[usize]) -> Vec<usize> {
        examples
            .iter()
            .flat_map(|&e| e * self.rows_per_example..(e + 1) * self.rows_per_example)
            .collect()
    }

    /// Input and target rows of the given examples.
    pub fn select(&self, examples: &[usize]) -> (Array2<f64>, Array2<f64>) {
        let rows = self.rows(examples);
        (self.x.select(Axis(0), &rows), self.y.select(Axis(0), &rows))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LearningCurve {
    /// Training-set MSE before the first update.
    pub initial_train_mse: f64,
    /// Mean of the mini-batch MSEs seen during each epoch.
    pub train_mse: Vec<f64>,
    /// Validation MSE after each epoch.
    pub validation_mse: Vec<f64>,
}

impl LearningCurve {
    pub fn final_train_mse(&self) -> Option<f64> {
        self.train_mse.last().copied()
    }

    pub fn final_validation_mse(&self) -> Option<f64> {
        self.validation_mse.last().copied()
    }
}

const EVAL_CHUNK: usize = 50;

fn mse_over(model: &MlpModel, data: &TrainData, examples: &[usize]) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for chunk in examples.chunks(EVAL_CHUNK) {
        let (x, y) = data.select(chunk);
        let out = model.forward_batch(x.view())?;
        sum += (&out - &y).iter().map(|d| d * d).sum::<f64>();
        count += out.len();
    }
    Ok(sum / count.max(1) as f64)
}

/// Trains in place and returns the learning curve.
pub fn train(model: &mut MlpModel, data: &TrainData, cfg: &TrainConfig) -> Result<LearningCurve> {
    cfg.validate()?;
    model.validate()?;
    let n = data.num_examples();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if n < 2 {
        return Err(Error::Dimension("need at least 2 examples for a validation split".into()));
    }
    if data.x.ncols() != model.d_in() || data.y.ncols() != model.d_out() {
        return Err(Error::Dimension(format!(
            "data is {}->{}, model is {}->{}",
            data.x.ncols(),
            data.y.ncols(),
            model.d_in(),
            model.d_out()
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(cfg.seed, 1));
    let n_val = ((n as f64 * cfg.validation_fraction).round() as usize).clamp(1, n - 1);
    let (val, train_set) = order.split_at(n_val);
    let mut train_set = train_set.to_vec();
    let mut shuffle_rng = stream_rng(cfg.seed, 2);
    let hp = cfg.adam();
    let mut state = AdamState::new(model);
    let mut curve = LearningCurve {
        initial_train_mse: mse_over(model, data, &train_set)?,
        ..LearningCurve::default()
    };
    for epoch in 0..cfg.epochs {
        train_set.shuffle(&mut shuffle_rng);
        let mut batch_sum = 0.0;
        let mut batches = 0usize;
        for batch in train_set.chunks(cfg.batch_size) {
            let (x, y) = data.select(batch);
            let g = model.backward(x.view(), y.view())?;
            adam_step(model, &g, &mut state, &hp)?;
            batch_sum += g.mse;
            batches += 1;
        }
        if !model.is_finite() {
            return Err(Error::NonFinite("parameters after training epoch"));
        }
        curve.train_mse.push(batch_sum / batches as f64);
        curve.validation_mse.push(mse_over(model, data, val)?);
        log_epoch(epoch, &curve);
    }
    Ok(curve)
}

fn log_epoch(epoch: usize, curve: &LearningCurve) {
    if std::env::var_os("NTN_PBCH_VERBOSE").is_some() {
        eprintln!(
            "epoch {:>3}  train {:.6e}  validation {:.6e}",
            epoch + 1,
            curve.train_mse[epoch],
            curve.validation_mse[epoch]
        );
    }
}
