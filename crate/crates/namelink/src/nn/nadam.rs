use serde::{Deserialize, Serialize};

use super::params::ParamStore;
use super::tensor::Tensor;

/// Nesterov-accelerated Adam with the momentum-cache schedule of the common Keras implementation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NadamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Exponent rate of the momentum warm-up `β1·(1 − ½·0.96^(decay·t))`.
    pub momentum_decay: f64,
    pub step: u64,
    /// Running product of the momentum schedule.
    pub m_schedule: f64,
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
}

impl NadamState {
    pub fn new(params: &ParamStore, lr: f64, beta1: f64, beta2: f64) -> Self {
        let shapes: Vec<Tensor> = params.trainable().iter().map(|(_, t)| Tensor::zeros_like(t)).collect();
        Self {
            lr,
            beta1,
            beta2,
            epsilon: 1e-7,
            momentum_decay: 0.004,
            step: 0,
            m_schedule: 1.0,
            m: shapes.clone(),
            v: shapes,
        }
    }

    fn momentum(&self, t: f64) -> f64 {
        self.beta1 * (1.0 - 0.5 * 0.96_f64.powf(self.momentum_decay * t))
    }

    /// Applies one update and advances the step counter.
    pub fn update(&mut self, params: &mut ParamStore, grads: &ParamStore) {
        let t = (self.step + 1) as f64;
        let mu_t = self.momentum(t);
        let mu_next = self.momentum(t + 1.0);
        let schedule_new = self.m_schedule * mu_t;
        let schedule_next = schedule_new * mu_next;
        let v_corr = 1.0 - self.beta2.powf(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.epsilon);
        let grads = grads.trainable();
        for (((p, (_, g)), m), v) in params
            .trainable_mut()
            .into_iter()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            for q in 0..p.data.len() {
                let gq = g.data[q];
                m.data[q] = b1 * m.data[q] + (1.0 - b1) * gq;
                v.data[q] = b2 * v.data[q] + (1.0 - b2) * gq * gq;
                let m_hat = mu_next * m.data[q] / (1.0 - schedule_next) + (1.0 - mu_t) * gq / (1.0 - schedule_new);
                let v_hat = v.data[q] / v_corr;
                p.data[q] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        self.m_schedule = schedule_new;
        self.step += 1;
    }
}
