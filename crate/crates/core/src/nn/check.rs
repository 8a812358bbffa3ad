//! Finite-difference verification of backpropagation.

use ndarray::Array2;
use rand::Rng;

use super::{init_mlp, MlpModel};
use crate::error::Result;
use crate::rng::stream_rng;

const STEP: f64 = 1e-5;

fn half_mse(m: &MlpModel, x: &Array2<f64>, y: &Array2<f64>) -> Result<f64> {
    Ok(0.5 * m.mse(x.view(), y.view())?)
}

/// Builds a random small network and batch from `seed` and returns the maximum
/// relative error between backprop and central differences over all parameters.
pub fn gradient_check(seed: u64) -> Result<f64> {
    let mut rng = stream_rng(seed, 7);
    let d_in = rng.random_range(1..6);
    let k = rng.random_range(1..8);
    let d_out = rng.random_range(1..5);
    let batch = rng.random_range(1..5);
    let mut m = init_mlp(d_in, k, d_out, seed)?;
    for b in m.biases.iter_mut() {
        b.mapv_inplace(|_| rng.random_range(-0.5..0.5));
    }
    let x = Array2::from_shape_simple_fn((batch, d_in), || rng.random_range(-1.0..1.0));
    let y = Array2::from_shape_simple_fn((batch, d_out), || rng.random_range(-1.0..1.0));
    let g = m.backward(x.view(), y.view())?;
    let mut worst: f64 = 0.0;
    let mut record = |analytic: f64, numeric: f64| {
        let denom = analytic.abs().max(numeric.abs()).max(1e-7);
        worst = worst.max((analytic - numeric).abs() / denom);
    };
    for l in 0..m.weights.len() {
        let cols = m.weights[l].ncols();
        for idx in 0..m.weights[l].len() {
            let at = [idx / cols, idx % cols];
            let orig = m.weights[l][at];
            m.weights[l][at] = orig + STEP;
            let up = half_mse(&m, &x, &y)?;
            m.weights[l][at] = orig - STEP;
            let down = half_mse(&m, &x, &y)?;
            m.weights[l][at] = orig;
            record(g.weights[l][at], (up - down) / (2.0 * STEP));
        }
        for j in 0..m.biases[l].len() {
            let orig = m.biases[l][j];
            m.biases[l][j] = orig + STEP;
            let up = half_mse(&m, &x, &y)?;
            m.biases[l][j] = orig - STEP;
            let down = half_mse(&m, &x, &y)?;
            m.biases[l][j] = orig;
            record(g.biases[l][j], (up - down) / (2.0 * STEP));
        }
    }
    Ok(worst)
}
