use rand::Rng;

use super::params::ParamStore;
use super::tensor::Tensor;

pub const BN_MOMENTUM: f64 = 0.99;
pub const BN_EPSILON: f64 = 1e-3;

/// Inverted-dropout masks, one `[B, width]` tensor per block; entries are 0 or `1/(1-rate)`.
pub fn dropout_masks(rng: &mut impl Rng, batch: usize, widths: &[usize], rate: f64) -> Vec<Tensor> {
    let keep = 1.0 - rate;
    widths
        .iter()
        .map(|&w| {
            if rate <= 0.0 {
                Tensor::filled(&[batch, w], 1.0)
            } else {
                Tensor::from_fn(&[batch, w], || {
                    if rng.random::<f64>() < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                })
            }
        })
        .collect()
}

struct BlockCache {
    input: Tensor,
    pre: Tensor,
    xhat: Tensor,
    inv_std: Vec<f64>,
    mean: Vec<f64>,
    var: Vec<f64>,
}

/// Activations of a training-mode forward pass over one batch.
pub struct HeadCache {
    blocks: Vec<BlockCache>,
    masks: Vec<Tensor>,
    last: Tensor,
    pub yhat: Vec<f64>,
}

impl HeadCache {
    /// Per-block batch mean and biased variance, for running-statistics updates.
    pub fn batch_stats(&self) -> Vec<(&[f64], &[f64])> {
        self.blocks.iter().map(|b| (&b.mean[..], &b.var[..])).collect()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `x · kernel + bias` for a `[B, in]` input.
fn dense(x: &Tensor, kernel: &Tensor, bias: &Tensor) -> Tensor {
    let (b, n_in) = (x.shape[0], x.shape[1]);
    let n_out = kernel.cols();
    let mut out = Tensor::zeros(&[b, n_out]);
    for r in 0..b {
        let o = &mut out.data[r * n_out..(r + 1) * n_out];
        o.copy_from_slice(&bias.data);
        for k in 0..n_in {
            let xv = x.data[r * n_in + k];
            for (ov, w) in o.iter_mut().zip(kernel.row(k)) {
                *ov += xv * w;
            }
        }
    }
    out
}

/// Training-mode forward: batch statistics in batch norm, dropout from `masks`.
pub fn head_forward_train(params: &ParamStore, x: &Tensor, masks: &[Tensor]) -> HeadCache {
    let b = x.shape[0];
    let mut input = x.clone();
    let mut blocks = Vec::with_capacity(params.blocks.len());
    for (blk, mask) in params.blocks.iter().zip(masks) {
        let pre = dense(&input, &blk.kernel, &blk.bias);
        let w = pre.cols();
        let relu: Vec<f64> = pre.data.iter().map(|&v| v.max(0.0)).collect();
        let mut mean = vec![0.0; w];
        let mut var = vec![0.0; w];
        for r in 0..b {
            for j in 0..w {
                mean[j] += relu[r * w + j];
            }
        }
        mean.iter_mut().for_each(|m| *m /= b as f64);
        for r in 0..b {
            for j in 0..w {
                let d = relu[r * w + j] - mean[j];
                var[j] += d * d;
            }
        }
        var.iter_mut().for_each(|v| *v /= b as f64);
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPSILON).sqrt()).collect();
        let mut xhat = Tensor::zeros(&[b, w]);
        let mut out = Tensor::zeros(&[b, w]);
        for r in 0..b {
            for j in 0..w {
                let idx = r * w + j;
                xhat.data[idx] = (relu[idx] - mean[j]) * inv_std[j];
                out.data[idx] = (blk.gamma.data[j] * xhat.data[idx] + blk.beta.data[j]) * mask.data[idx];
            }
        }
        blocks.push(BlockCache { input, pre, xhat, inv_std, mean, var });
        input = out;
    }
    let logits = dense(&input, &params.out_kernel, &params.out_bias);
    HeadCache {
        blocks,
        masks: masks.to_vec(),
        last: input,
        yhat: logits.data.iter().map(|&z| sigmoid(z)).collect(),
    }
}

/// Inference-mode forward for a single feature row: running statistics, no dropout.
pub fn head_forward_infer(params: &ParamStore, x: &[f64]) -> f64 {
    let mut input = x.to_vec();
    for blk in &params.blocks {
        let w = blk.bias.len();
        let mut out = blk.bias.data.clone();
        for (k, &xv) in input.iter().enumerate() {
            for (o, wt) in out.iter_mut().zip(blk.kernel.row(k)) {
                *o += xv * wt;
            }
        }
        for j in 0..w {
            let r = out[j].max(0.0);
            let xhat = (r - blk.running_mean.data[j]) / (blk.running_var.data[j] + BN_EPSILON).sqrt();
            out[j] = blk.gamma.data[j] * xhat + blk.beta.data[j];
        }
        input = out;
    }
    let mut z = params.out_bias.data[0];
    for (k, &xv) in input.iter().enumerate() {
        z += xv * params.out_kernel.data[k];
    }
    sigmoid(z)
}

/// Backward pass from per-sample `dlogit`; accumulates into `grads` and returns `d x`.
pub fn head_backward(params: &ParamStore, cache: &HeadCache, dlogit: &[f64], grads: &mut ParamStore) -> Tensor {
    let b = dlogit.len();
    let n_last = cache.last.cols();
    let mut d = Tensor::zeros(&[b, n_last]);
    for r in 0..b {
        grads.out_bias.data[0] += dlogit[r];
        for k in 0..n_last {
            grads.out_kernel.data[k] += cache.last.data[r * n_last + k] * dlogit[r];
            d.data[r * n_last + k] = params.out_kernel.data[k] * dlogit[r];
        }
    }
    for (idx, blk) in params.blocks.iter().enumerate().rev() {
        let c = &cache.blocks[idx];
        let g = &mut grads.blocks[idx];
        let mask = &cache.masks[idx];
        let w = blk.bias.len();
        let n_in = c.input.cols();
        let mut dxhat = Tensor::zeros(&[b, w]);
        let mut sum_dxhat = vec![0.0; w];
        let mut sum_dxhat_xhat = vec![0.0; w];
        for r in 0..b {
            for j in 0..w {
                let i = r * w + j;
                let dy = d.data[i] * mask.data[i];
                g.gamma.data[j] += dy * c.xhat.data[i];
                g.beta.data[j] += dy;
                let dx = dy * blk.gamma.data[j];
                dxhat.data[i] = dx;
                sum_dxhat[j] += dx;
                sum_dxhat_xhat[j] += dx * c.xhat.data[i];
            }
        }
        let bf = b as f64;
        let mut dpre = Tensor::zeros(&[b, w]);
        for r in 0..b {
            for j in 0..w {
                let i = r * w + j;
                if c.pre.data[i] > 0.0 {
                    dpre.data[i] = c.inv_std[j] / bf
                        * (bf * dxhat.data[i] - sum_dxhat[j] - c.xhat.data[i] * sum_dxhat_xhat[j]);
                }
            }
        }
        let mut dinput = Tensor::zeros(&[b, n_in]);
        for r in 0..b {
            let dp = dpre.row(r);
            for (bias, v) in g.bias.data.iter_mut().zip(dp) {
                *bias += v;
            }
            for k in 0..n_in {
                let xv = c.input.data[r * n_in + k];
                let krow = blk.kernel.row(k);
                let grow = &mut g.kernel.data[k * w..(k + 1) * w];
                let mut acc = 0.0;
                for j in 0..w {
                    grow[j] += xv * dp[j];
                    acc += krow[j] * dp[j];
                }
                dinput.data[r * n_in + k] = acc;
            }
        }
        d = dinput;
    }
    d
}

/// Exponential moving average of the batch statistics into the running ones.
pub fn update_running_stats(params: &mut ParamStore, cache: &HeadCache) {
    for (blk, c) in params.blocks.iter_mut().zip(&cache.blocks) {
        for j in 0..c.mean.len() {
            blk.running_mean.data[j] = BN_MOMENTUM * blk.running_mean.data[j] + (1.0 - BN_MOMENTUM) * c.mean[j];
            blk.running_var.data[j] = BN_MOMENTUM * blk.running_var.data[j] + (1.0 - BN_MOMENTUM) * c.var[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::params::Architecture;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_model_predicts_half() {
        let arch = Architecture::default();
        let p = ParamStore::zeros(&arch);
        assert_eq!(head_forward_infer(&p, &[0.3; 20]), 0.5);
        let x = Tensor::filled(&[4, 20], 0.7);
        let masks = dropout_masks(&mut ChaCha8Rng::seed_from_u64(0), 4, &arch.head_widths, 0.2);
        assert_eq!(head_forward_train(&p, &x, &masks).yhat, vec![0.5; 4]);
    }

    #[test]
    fn inference_is_deterministic_and_in_range() {
        let arch = Architecture::default();
        let p = ParamStore::init(&arch, &mut ChaCha8Rng::seed_from_u64(9));
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.37 - 3.0).collect();
        let a = head_forward_infer(&p, &x);
        assert_eq!(a, head_forward_infer(&p, &x));
        assert!(a > 0.0 && a < 1.0);
    }

    #[test]
    fn masks_have_expected_values() {
        let masks = dropout_masks(&mut ChaCha8Rng::seed_from_u64(2), 50, &[32, 16], 0.2);
        for m in &masks {
            assert!(m.data.iter().all(|&v| v == 0.0 || v == 1.25));
        }
        let zeros = masks[0].data.iter().filter(|&&v| v == 0.0).count();
        assert!(zeros > 200 && zeros < 440);
    }

    #[test]
    fn bn_inference_is_affine_per_channel() {
        let arch = Architecture { head_widths: vec![3], ..Architecture::default() };
        let mut p = ParamStore::init(&arch, &mut ChaCha8Rng::seed_from_u64(4));
        p.blocks[0].running_mean.data = vec![0.2, -0.1, 0.5];
        p.blocks[0].running_var.data = vec![2.0, 0.5, 1.5];
        // With identity-like dense kernels positive inputs pass ReLU; the logit is then affine.
        p.blocks[0].kernel = Tensor::zeros(&[20, 3]);
        for j in 0..3 {
            p.blocks[0].kernel.data[j * 3 + j] = 1.0;
        }
        let logit = |x0: f64| {
            let mut x = vec![1.0; 20];
            x[0] = x0;
            let y = head_forward_infer(&p, &x);
            (y / (1.0 - y)).ln()
        };
        let (a, b, c) = (logit(1.0), logit(2.0), logit(3.0));
        assert!(((b - a) - (c - b)).abs() < 1e-9);
    }
}
