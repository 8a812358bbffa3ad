//! Fully connected network with three tanh hidden layers and a linear
//! output, trained on half mean squared error with Adam.

pub mod adam;
pub mod check;
pub mod train;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

pub use adam::{adam_step, AdamState};
pub use train::{train, LearningCurve, TrainConfig, TrainData};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

pub const HIDDEN_LAYERS: usize = 3;
pub const DEFAULT_HIDDEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// `[d_in, K, K, K, d_out]`.
    pub layer_dims: Vec<usize>,
    /// Layer `i` maps `layer_dims[i]` to `layer_dims[i + 1]`, shape `(in, out)`.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Parameter gradients, shaped like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    /// Plain mean squared error of the batch, `mean((f(x) - y)^2)`.
    pub mse: f64,
}

/// Xavier-uniform weights, zero biases.
pub fn init_mlp(d_in: usize, hidden: usize, d_out: usize, seed: u64) -> Result<MlpModel> {
    init_with_dims(&[d_in, hidden, hidden, hidden, d_out], seed)
}

/// `tanh` through `expm1`, about three times faster than `f64::tanh` here.
#[inline]
fn tanh(x: f64) -> f64 {
    if x.abs() > 20.0 {
        return x.signum();
    }
    let e = (2.0 * x).exp_m1();
    e / (e + 2.0)
}

/// Initializes an arbitrary stack of dense layers (tanh between, linear last).
pub fn init_with_dims(dims: &[usize], seed: u64) -> Result<MlpModel> {
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Error::Dimension(format!("layer dims {dims:?} must be positive")));
    }
    let mut rng = stream_rng(seed, 0);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for w in dims.windows(2) {
        let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
        weights.push(Array2::from_shape_simple_fn((w[0], w[1]), || {
            rng.random_range(-limit..limit)
        }));
        biases.push(Array1::zeros(w[1]));
    }
    Ok(MlpModel {
        layer_dims: dims.to_vec(),
        weights,
        biases,
    })
}

impl MlpModel {
    pub fn d_in(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn d_out(&self) -> usize {
        *self.layer_dims.last().expect("non-empty dims")
    }

    pub fn hidden_width(&self) -> usize {
        self.layer_dims.get(1).copied().unwrap_or(0)
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.layer_dims.len();
        if n < 2 || self.weights.len() != n - 1 || self.biases.len() != n - 1 {
            return Err(Error::Dimension("layer count mismatch".into()));
        }
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let (din, dout) = (self.layer_dims[i], self.layer_dims[i + 1]);
            if w.dim() != (din, dout) || b.len() != dout {
                return Err(Error::Dimension(format!("layer {i} shape mismatch")));
            }
        }
        if !self.is_finite() {
            return Err(Error::NonFinite("model parameters"));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.d_in() {
            return Err(Error::Dimension(format!(
                "input has {} columns, model expects {}",
                x.ncols(),
                self.d_in()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network input"));
        }
        Ok(())
    }

    /// Activations of every layer; entry 0 is the input, the last is the output.
    fn activations(&self, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let last = self.weights.len() - 1;
        let mut acts = vec![x.to_owned()];
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = acts[i].dot(w);
            let hidden = i < last;
            for mut row in z.rows_mut() {
                for (v, &bias) in row.iter_mut().zip(b) {
                    *v += bias;
                    if hidden {
                        *v = tanh(*v);
                    }
                }
            }
            acts.push(z);
        }
        acts
    }

    /// Batch forward pass, one example per row.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        Ok(self.activations(x).pop().expect("output layer"))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let view = ArrayView2::from_shape((1, x.len()), x)
            .map_err(|e| Error::Dimension(e.to_string()))?;
        Ok(self.forward_batch(view)?.into_raw_vec_and_offset().0)
    }

    /// Gradients of `0.5 * mean((f(x) - y)^2)` over batch rows and output dims.
    pub fn backward(&self, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<Gradients> {
        self.check_input(&x)?;
        if y.dim() != (x.nrows(), self.d_out()) {
            return Err(Error::Dimension(format!(
                "target shape {:?}, expected ({}, {})",
                y.dim(),
                x.nrows(),
                self.d_out()
            )));
        }
        let acts = self.activations(x);
        let out = acts.last().expect("output layer");
        let diff = out - &y;
        let count = diff.len() as f64;
        let mse = diff.iter().map(|d| d * d).sum::<f64>() / count;
        let mut delta = diff / count;
        let layers = self.weights.len();
        let mut gw = vec![Array2::zeros((0, 0)); layers];
        let mut gb = vec![Array1::zeros(0); layers];
        for i in (0..layers).rev() {
            gw[i] = acts[i].t().dot(&delta);
            gb[i] = delta.sum_axis(Axis(0));
            if i > 0 {
                let mut back = delta.dot(&self.weights[i].t());
                back.zip_mut_with(&acts[i], |d, &a| *d *= 1.0 - a * a);
                delta = back;
            }
        }
        Ok(Gradients {
            weights: gw,
            biases: gb,
            mse,
        })
    }

    /// Plain MSE of the model over a batch.
    pub fn mse(&self, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64> {
        let out = self.forward_batch(x)?;
        if out.dim() != y.dim() {
            return Err(Error::Dimension("target shape mismatch".into()));
        }
        Ok((&out - &y).iter().map(|d| d * d).sum::<f64>() / out.len().max(1) as f64)
    }
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    #[test]
    fn fast_tanh_matches_std() {
        for i in -4000..=4000 {
            let x = i as f64 * 0.01;
            let t = tanh(x);
            assert!((t - x.tanh()).abs() <= 4.0 * f64::EPSILON * x.tanh().abs().max(1e-300), "{x}");
        }
        assert_eq!(tanh(1e300), 1.0);
        assert_eq!(tanh(-1e300), -1.0);
        assert_eq!(tanh(0.0), 0.0);
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..20 {
            let e = check::gradient_check(seed).unwrap();
            assert!(e < 1e-4, "seed {seed}: {e}");
        }
    }

    #[test]
    fn init_is_seeded_and_xavier() {
        let a = init_mlp(864, 128, 864, 3).unwrap();
        assert_eq!(a, init_mlp(864, 128, 864, 3).unwrap());
        assert_ne!(a, init_mlp(864, 128, 864, 4).unwrap());
        assert_eq!(a.layer_dims, vec![864, 128, 128, 128, 864]);
        for w in &a.weights {
            let (fi, fo) = w.dim();
            let var = w.iter().map(|v| v * v).sum::<f64>() / w.len() as f64;
            let expect = 2.0 / (fi + fo) as f64;
            assert!((var / expect - 1.0).abs() < 0.2);
        }
        assert!(a.biases.iter().all(|b| b.iter().all(|&v| v == 0.0)));
        assert!(init_mlp(0, 4, 4, 1).is_err());
    }

    #[test]
    fn forward_edge_cases() {
        let mut m = init_mlp(3, 4, 2, 1).unwrap();
        for w in m.weights.iter_mut() {
            w.fill(0.0);
        }
        m.biases[3] = array![0.25, -1.5];
        assert_eq!(m.forward(&[1.0, 2.0, 3.0]).unwrap(), vec![0.25, -1.5]);
        let mut unit = init_mlp(1, 1, 1, 1).unwrap();
        for w in unit.weights.iter_mut() {
            w.fill(1.0);
        }
        assert_eq!(unit.forward(&[0.0]).unwrap(), vec![0.0]);
        assert!(m.forward(&[f64::NAN, 0.0, 0.0]).is_err());
        assert!(m.forward(&[0.0]).is_err());
    }

    #[test]
    fn hidden_activations_are_bounded() {
        let m = init_mlp(4, 6, 2, 9).unwrap();
        let x = array![[1e6, -1e6, 3.0, 0.0], [-50.0, 50.0, 1e3, -1e3]];
        for a in &m.activations(x.view())[1..4] {
            assert!(a.iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn zero_residual_gives_zero_gradient() {
        let m = init_mlp(3, 5, 2, 2).unwrap();
        let x = array![[0.1, -0.2, 0.3]];
        let y = m.forward_batch(x.view()).unwrap();
        let g = m.backward(x.view(), y.view()).unwrap();
        assert!(g.weights.iter().all(|w| w.iter().all(|&v| v == 0.0)));
        assert!(g.biases.iter().all(|b| b.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn duplicated_batch_has_same_gradient() {
        let m = init_mlp(3, 5, 2, 2).unwrap();
        let x = array![[0.1, -0.2, 0.3]];
        let y = array![[1.0, -1.0]];
        let x2 = ndarray::concatenate![Axis(0), x, x];
        let y2 = ndarray::concatenate![Axis(0), y, y];
        let a = m.backward(x.view(), y.view()).unwrap();
        let b = m.backward(x2.view(), y2.view()).unwrap();
        for (wa, wb) in a.weights.iter().zip(&b.weights) {
            assert!(wa.iter().zip(wb).all(|(p, q)| (p - q).abs() < 1e-15));
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let m = init_mlp(3, 5, 2, 2).unwrap();
        let x = array![[0.1, -0.2, 0.3]];
        assert!(m.backward(x.view(), array![[1.0]].view()).is_err());
    }
}
