use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::text::{ALPHABET_SIZE, MAX_LEN};

/// Layer sizes of the encoder and classification head.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub alphabet_size: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    pub head_widths: Vec<usize>,
    pub max_len: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Self {
            alphabet_size: ALPHABET_SIZE,
            embed_dim: ALPHABET_SIZE,
            hidden: 16,
            head_widths: vec![32, 16],
            max_len: MAX_LEN,
        }
    }
}

impl Architecture {
    /// L1, L2, L-inf, cosine distance, then `hidden` absolute differences.
    pub fn distance_dim(&self) -> usize {
        4 + self.hidden
    }

    pub fn gates(&self) -> usize {
        4 * self.hidden
    }
}

/// Dense layer followed by ReLU and batch normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseBlock {
    pub kernel: Tensor,
    pub bias: Tensor,
    pub gamma: Tensor,
    pub beta: Tensor,
    /// Running statistics; not trained by the optimizer.
    pub running_mean: Tensor,
    pub running_var: Tensor,
}

/// Every parameter of the Siamese model. Also used as the gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    /// `[alphabet, embed_dim]` lookup table.
    pub embedding: Tensor,
    /// `[embed_dim, 4 * hidden]`, gate order input, forget, cell, output.
    pub lstm_kernel: Tensor,
    /// `[hidden, 4 * hidden]`.
    pub lstm_recurrent: Tensor,
    pub lstm_bias: Tensor,
    pub blocks: Vec<DenseBlock>,
    pub out_kernel: Tensor,
    pub out_bias: Tensor,
}

fn glorot(rng: &mut impl Rng, fan_in: usize, fan_out: usize) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
    Tensor::from_fn(&[fan_in, fan_out], || dist.sample(rng))
}

/// `[rows, cols]` matrix with orthonormal rows (rows <= cols) or columns.
fn orthogonal(rng: &mut impl Rng, rows: usize, cols: usize) -> Tensor {
    let (n, m) = (rows.max(cols), rows.min(cols));
    // m orthonormal vectors of length n via Gram-Schmidt on Gaussian draws
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    while basis.len() < m {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    let mut t = Tensor::zeros(&[rows, cols]);
    for (k, b) in basis.iter().enumerate() {
        for (i, &x) in b.iter().enumerate() {
            if rows <= cols {
                t.data[k * cols + i] = x;
            } else {
                t.data[i * cols + k] = x;
            }
        }
    }
    t
}

impl ParamStore {
    /// Random initialization: uniform(-0.05, 0.05) embedding, Glorot-uniform
    /// kernels, orthogonal recurrent weights, forget-gate bias 1.
    pub fn init(arch: &Architecture, rng: &mut impl Rng) -> Self {
        let emb_dist = Uniform::new_inclusive(-0.05, 0.05).expect("finite bounds");
        let embedding = Tensor::from_fn(&[arch.alphabet_size, arch.embed_dim], || {
            emb_dist.sample(rng)
        });
        let g = arch.gates();
        let lstm_kernel = glorot(rng, arch.embed_dim, g);
        let lstm_recurrent = orthogonal(rng, arch.hidden, g);
        let mut lstm_bias = Tensor::zeros(&[g]);
        lstm_bias.data[arch.hidden..2 * arch.hidden].fill(1.0);
        let mut blocks = Vec::new();
        let mut fan_in = arch.distance_dim();
        for &w in &arch.head_widths {
            blocks.push(DenseBlock {
                kernel: glorot(rng, fan_in, w),
                bias: Tensor::zeros(&[w]),
                gamma: Tensor::filled(&[w], 1.0),
                beta: Tensor::zeros(&[w]),
                running_mean: Tensor::zeros(&[w]),
                running_var: Tensor::filled(&[w], 1.0),
            });
            fan_in = w;
        }
        let out_kernel = glorot(rng, fan_in, 1);
        Self {
            embedding,
            lstm_kernel,
            lstm_recurrent,
            lstm_bias,
            blocks,
            out_kernel,
            out_bias: Tensor::zeros(&[1]),
        }
    }

    /// All-zero weights; batch-norm scale and running variance stay at 1.
    pub fn zeros(arch: &Architecture) -> Self {
        let g = arch.gates();
        let mut blocks = Vec::new();
        let mut fan_in = arch.distance_dim();
        for &w in &arch.head_widths {
            blocks.push(DenseBlock {
                kernel: Tensor::zeros(&[fan_in, w]),
                bias: Tensor::zeros(&[w]),
                gamma: Tensor::filled(&[w], 1.0),
                beta: Tensor::zeros(&[w]),
                running_mean: Tensor::zeros(&[w]),
                running_var: Tensor::filled(&[w], 1.0),
            });
            fan_in = w;
        }
        Self {
            embedding: Tensor::zeros(&[arch.alphabet_size, arch.embed_dim]),
            lstm_kernel: Tensor::zeros(&[arch.embed_dim, g]),
            lstm_recurrent: Tensor::zeros(&[arch.hidden, g]),
            lstm_bias: Tensor::zeros(&[g]),
            blocks,
            out_kernel: Tensor::zeros(&[fan_in, 1]),
            out_bias: Tensor::zeros(&[1]),
        }
    }

    /// A zero-filled store with the same shapes, for gradient accumulation.
    pub fn zeros_like(&self) -> Self {
        let z = Tensor::zeros_like;
        Self {
            embedding: z(&self.embedding),
            lstm_kernel: z(&self.lstm_kernel),
            lstm_recurrent: z(&self.lstm_recurrent),
            lstm_bias: z(&self.lstm_bias),
            blocks: self
                .blocks
                .iter()
                .map(|b| DenseBlock {
                    kernel: z(&b.kernel),
                    bias: z(&b.bias),
                    gamma: z(&b.gamma),
                    beta: z(&b.beta),
                    running_mean: z(&b.running_mean),
                    running_var: z(&b.running_var),
                })
                .collect(),
            out_kernel: z(&self.out_kernel),
            out_bias: z(&self.out_bias),
        }
    }

    /// Trainable tensors with stable names, in a fixed order.
    pub fn trainable(&self) -> Vec<(String, &Tensor)> {
        let mut out = vec![
            ("embedding".to_string(), &self.embedding),
            ("lstm.kernel".to_string(), &self.lstm_kernel),
            ("lstm.recurrent".to_string(), &self.lstm_recurrent),
            ("lstm.bias".to_string(), &self.lstm_bias),
        ];
        for (i, b) in self.blocks.iter().enumerate() {
            out.push((format!("dense{i}.kernel"), &b.kernel));
            out.push((format!("dense{i}.bias"), &b.bias));
            out.push((format!("bn{i}.gamma"), &b.gamma));
            out.push((format!("bn{i}.beta"), &b.beta));
        }
        out.push(("out.kernel".to_string(), &self.out_kernel));
        out.push(("out.bias".to_string(), &self.out_bias));
        out
    }

    pub fn trainable_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![
            &mut self.embedding,
            &mut self.lstm_kernel,
            &mut self.lstm_recurrent,
            &mut self.lstm_bias,
        ];
        for b in self.blocks.iter_mut() {
            out.push(&mut b.kernel);
            out.push(&mut b.bias);
            out.push(&mut b.gamma);
            out.push(&mut b.beta);
        }
        out.push(&mut self.out_kernel);
        out.push(&mut self.out_bias);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.trainable().iter().all(|(_, t)| t.is_finite())
            && self
                .blocks
                .iter()
                .all(|b| b.running_mean.is_finite() && b.running_var.is_finite())
    }

    pub fn add_assign(&mut self, other: &ParamStore) {
        for (a, b) in self.trainable_mut().into_iter().zip(other.trainable()) {
            a.add_assign(b.1);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.trainable_mut() {
            t.data.iter_mut().for_each(|v| *v *= factor);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shapes_follow_architecture() {
        let arch = Architecture::default();
        let p = ParamStore::init(&arch, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(p.embedding.shape, vec![63, 63]);
        assert_eq!(p.lstm_kernel.shape, vec![63, 64]);
        assert_eq!(p.lstm_recurrent.shape, vec![16, 64]);
        assert_eq!(p.blocks[0].kernel.shape, vec![20, 32]);
        assert_eq!(p.blocks[1].kernel.shape, vec![32, 16]);
        assert_eq!(p.out_kernel.shape, vec![16, 1]);
        assert_eq!(&p.lstm_bias.data[16..32], &[1.0; 16]);
        assert_eq!(p.lstm_bias.data[0], 0.0);
        assert!(p.is_finite());
    }

    #[test]
    fn recurrent_rows_are_orthonormal() {
        let t = orthogonal(&mut ChaCha8Rng::seed_from_u64(3), 16, 64);
        for i in 0..16 {
            for j in 0..16 {
                let dot: f64 = t.row(i).iter().zip(t.row(j)).map(|(a, b)| a * b).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-10);
            }
        }
    }
}
