//! Evaluation on fresh bursts: symbol MSE and coded-bit BER before and after
//! the network, plus constellation dumps.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::dataset::{build_synthetic_dataset, mean_sq_diff, ChannelSpec, DatasetConfig, SnrSpec, SymbolDataset};
use super::scheme::TrainedModel;
use crate::error::{Error, Result};
use crate::nn::LearningCurve;
use crate::rng::sub_seed;
use crate::rx::Stage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub test_snr_grid: Vec<f64>,
    pub n_test_bursts: usize,
    pub seed: u64,
    pub channel: ChannelSpec,
    /// Bursts per SNR point whose symbols go to the constellation dump.
    pub constellation_bursts: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            test_snr_grid: super::DEFAULT_SNR_GRID.to_vec(),
            n_test_bursts: 300,
            seed: 0xE7A1,
            channel: ChannelSpec::default(),
            constellation_bursts: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    pub snr_db: f64,
    /// Network output vs transmitted symbols.
    pub mse: f64,
    pub ber_pre: f64,
    pub ber_post: f64,
    /// MMSE output vs transmitted symbols.
    pub mse_pre: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationPoint {
    pub re: f64,
    pub im: f64,
    pub stage: Stage,
    pub snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub points: Vec<SnrPoint>,
    pub constellation: Vec<ConstellationPoint>,
    pub learning_curve: Option<LearningCurve>,
}

/// Network outputs as `n x 864` examples.
pub fn predict(tm: &TrainedModel, inputs: &Array2<f64>) -> Result<Array2<f64>> {
    let rows = tm.meta.layout.input_rows(inputs)?;
    let out = tm.model.forward_batch(rows.view())?;
    tm.meta.layout.merge_rows(out)
}

fn hard_bits(v: &Array2<f64>) -> impl Iterator<Item = bool> + '_ {
    v.iter().map(|&x| x < 0.0)
}

fn ber(reference: &Array2<f64>, est: &Array2<f64>) -> f64 {
    let errors = hard_bits(reference)
        .zip(hard_bits(est))
        .filter(|(a, b)| a != b)
        .count();
    errors as f64 / reference.len().max(1) as f64
}

/// Scores a trained model on a prepared test set.
pub fn evaluate_on(tm: &TrainedModel, ds: &SymbolDataset) -> Result<(SnrPoint, Array2<f64>)> {
    if ds.stage != tm.meta.stage || ds.eq_input != tm.meta.eq_input {
        return Err(Error::Dimension(format!(
            "model is for {:?}/{:?}, dataset is {:?}/{:?}",
            tm.meta.stage, tm.meta.eq_input, ds.stage, ds.eq_input
        )));
    }
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let pred = predict(tm, &ds.inputs)?;
    let snr_db = ds.snr_tags.first().copied().unwrap_or(f64::NAN);
    Ok((
        SnrPoint {
            snr_db,
            mse: mean_sq_diff(&pred, &ds.targets),
            ber_pre: ber(&ds.targets, &ds.mmse),
            ber_post: ber(&ds.targets, &pred),
            mse_pre: mean_sq_diff(&ds.mmse, &ds.targets),
        },
        pred,
    ))
}

/// Test set for one SNR point of an evaluation.
pub fn test_dataset(tm: &TrainedModel, cfg: &EvalConfig, index: usize) -> Result<SymbolDataset> {
    let snr = *cfg
        .test_snr_grid
        .get(index)
        .ok_or_else(|| Error::Config(format!("no SNR point {index}")))?;
    let dc = DatasetConfig {
        channel: cfg.channel,
        eq_input: tm.meta.eq_input,
        ..DatasetConfig::new(
            tm.meta.stage,
            SnrSpec::Fixed(snr),
            cfg.n_test_bursts,
            sub_seed(cfg.seed, index as u64),
        )
    };
    build_synthetic_dataset(&dc)
}

fn dump(points: &mut Vec<ConstellationPoint>, m: &Array2<f64>, n: usize, stage: Stage, snr_db: f64) {
    for row in m.outer_iter().take(n) {
        let v = row.to_vec();
        for p in v.chunks_exact(2).take(432) {
            points.push(ConstellationPoint {
                re: p[0],
                im: p[1],
                stage,
                snr_db,
            });
        }
    }
}

/// Generates fresh bursts at every test SNR and scores the model.
pub fn evaluate(tm: &TrainedModel, cfg: &EvalConfig) -> Result<EvalReport> {
    if cfg.n_test_bursts == 0 {
        return Err(Error::Config("n_test_bursts must be > 0".into()));
    }
    let mut report = EvalReport {
        learning_curve: Some(tm.meta.curve.clone()),
        ..EvalReport::default()
    };
    for i in 0..cfg.test_snr_grid.len() {
        let ds = test_dataset(tm, cfg, i)?;
        let (point, pred) = evaluate_on(tm, &ds)?;
        let n = cfg.constellation_bursts;
        if tm.meta.stage == Stage::PostSync {
            let data = ds.inputs.slice(ndarray::s![.., ..864]).to_owned();
            dump(&mut report.constellation, &data, n, Stage::PostSync, point.snr_db);
        }
        dump(&mut report.constellation, &ds.mmse, n, Stage::PostMmse, point.snr_db);
        dump(&mut report.constellation, &pred, n, Stage::PostNn, point.snr_db);
        report.points.push(point);
    }
    Ok(report)
}
