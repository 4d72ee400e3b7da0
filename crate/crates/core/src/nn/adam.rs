use serde::{Deserialize, Serialize};

use super::graph::ParamStore;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One bias-corrected update of every parameter, then clears the gradients.
    pub fn step(&self, store: &mut ParamStore) {
        store.step += 1;
        let t = store.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for p in store.iter_mut() {
            for i in 0..p.value.len() {
                let g = p.grad[i];
                p.m[i] = self.beta1 * p.m[i] + (1.0 - self.beta1) * g;
                p.v[i] = self.beta2 * p.v[i] + (1.0 - self.beta2) * g * g;
                let m_hat = p.m[i] / bc1;
                let v_hat = p.v[i] / bc2;
                p.value[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
                p.grad[i] = 0.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::graph::{LayerParams, ParamTensor};

    fn store(w: f64) -> ParamStore {
        ParamStore {
            layers: vec![Some(LayerParams {
                weight: ParamTensor::new(vec![w]),
                bias: ParamTensor::new(vec![0.0]),
            })],
            step: 0,
        }
    }

    fn weight(s: &ParamStore) -> f64 {
        s.layers[0].as_ref().unwrap().weight.value[0]
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut s = store(0.7);
        Adam::new(0.001).step(&mut s);
        assert_eq!(weight(&s), 0.7);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut s = store(0.0);
        s.layers[0].as_mut().unwrap().weight.grad[0] = 3.0;
        Adam::new(0.001).step(&mut s);
        let moved = -weight(&s);
        assert!((moved / 0.001 - 1.0).abs() <= 1e-6);
        assert_eq!(s.layers[0].as_ref().unwrap().weight.grad[0], 0.0);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut s = store(1.0);
        let adam = Adam::new(0.05);
        for _ in 0..200 {
            let w = weight(&s);
            s.layers[0].as_mut().unwrap().weight.grad[0] = 2.0 * w;
            adam.step(&mut s);
        }
        assert!(weight(&s).abs() < 0.1, "w = {}", weight(&s));
        assert_eq!(s.step, 200);
    }
}
