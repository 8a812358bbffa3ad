//! Adam with bias-corrected moments.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Gradients, MlpModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m_w: Vec<Array2<f64>>,
    pub v_w: Vec<Array2<f64>>,
    pub m_b: Vec<Array1<f64>>,
    pub v_b: Vec<Array1<f64>>,
    pub t: u64,
}

impl AdamState {
    pub fn new(model: &MlpModel) -> Self {
        let zw: Vec<Array2<f64>> = model.weights.iter().map(|w| Array2::zeros(w.dim())).collect();
        let zb: Vec<Array1<f64>> = model.biases.iter().map(|b| Array1::zeros(b.len())).collect();
        Self {
            m_w: zw.clone(),
            v_w: zw,
            m_b: zb.clone(),
            v_b: zb,
            t: 0,
        }
    }
}

fn update<D: ndarray::Dimension>(
    p: &mut ndarray::Array<f64, D>,
    g: &ndarray::Array<f64, D>,
    m: &mut ndarray::Array<f64, D>,
    v: &mut ndarray::Array<f64, D>,
    hp: &AdamParams,
    c1: f64,
    c2: f64,
) {
    ndarray::Zip::from(p)
        .and(g)
        .and(m)
        .and(v)
        .for_each(|p, &g, m, v| {
            *m = hp.beta1 * *m + (1.0 - hp.beta1) * g;
            *v = hp.beta2 * *v + (1.0 - hp.beta2) * g * g;
            *p -= hp.learning_rate * (*m / c1) / ((*v / c2).sqrt() + hp.eps);
        });
}

/// One Adam step in place.
pub fn adam_step(
    model: &mut MlpModel,
    grads: &Gradients,
    state: &mut AdamState,
    hp: &AdamParams,
) -> Result<()> {
    if grads.weights.len() != model.weights.len()
        || state.m_w.len() != model.weights.len()
        || grads.weights.iter().zip(&model.weights).any(|(g, w)| g.dim() != w.dim())
        || grads.biases.iter().zip(&model.biases).any(|(g, b)| g.len() != b.len())
    {
        return Err(Error::Dimension("gradient shape does not match model".into()));
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - hp.beta1.powi(t);
    let c2 = 1.0 - hp.beta2.powi(t);
    for l in 0..model.weights.len() {
        update(
            &mut model.weights[l],
            &grads.weights[l],
            &mut state.m_w[l],
            &mut state.v_w[l],
            hp,
            c1,
            c2,
        );
        update(
            &mut model.biases[l],
            &grads.biases[l],
            &mut state.m_b[l],
            &mut state.v_b[l],
            hp,
            c1,
            c2,
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;
    use crate::nn::init_mlp;

    fn grads_like(m: &MlpModel, v: f64) -> Gradients {
        Gradients {
            weights: m.weights.iter().map(|w| Array2::from_elem(w.dim(), v)).collect(),
            biases: m.biases.iter().map(|b| Array1::from_elem(b.len(), v)).collect(),
            mse: 0.0,
        }
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut m = init_mlp(3, 4, 2, 1).unwrap();
        let before = m.clone();
        let mut s = AdamState::new(&m);
        let g = grads_like(&m, 0.0);
        adam_step(&mut m, &g, &mut s, &AdamParams::default()).unwrap();
        assert_eq!(m, before);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut m = init_mlp(3, 4, 2, 1).unwrap();
        let before = m.clone();
        let mut s = AdamState::new(&m);
        let mut g = grads_like(&m, 0.3);
        g.weights[0][[0, 0]] = -2.0;
        let hp = AdamParams::default();
        adam_step(&mut m, &g, &mut s, &hp).unwrap();
        for (a, b) in m.weights.iter().zip(&before.weights) {
            for (p, q) in a.iter().zip(b) {
                assert!((p - q).abs() <= hp.learning_rate * (1.0 + 1e-6));
            }
        }
        assert!(m.weights[0][[0, 0]] > before.weights[0][[0, 0]]);
        assert!(m.weights[0][[0, 1]] < before.weights[0][[0, 1]]);
    }

    #[test]
    fn trajectories_repeat() {
        let run = || {
            let mut m = init_mlp(2, 3, 1, 5).unwrap();
            let mut s = AdamState::new(&m);
            let x = array![[0.5, -0.5], [0.1, 0.9]];
            let y = array![[1.0], [0.0]];
            for _ in 0..20 {
                let g = m.backward(x.view(), y.view()).unwrap();
                adam_step(&mut m, &g, &mut s, &AdamParams::default()).unwrap();
            }
            m
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn mismatched_gradients_are_rejected() {
        let mut m = init_mlp(3, 4, 2, 1).unwrap();
        let other = init_mlp(3, 5, 2, 1).unwrap();
        let mut s = AdamState::new(&m);
        assert!(adam_step(&mut m, &grads_like(&other, 1.0), &mut s, &AdamParams::default()).is_err());
    }
}
