//! Analytic gradients of the full Siamese network against central finite differences.

use namelink::nn::{dropout_masks, forward_backward, Architecture, ParamStore, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-5;

/// Sequence length 6, three LSTM units, full-size head.
pub fn tiny_arch() -> Architecture {
    Architecture { alphabet_size: 63, embed_dim: 63, hidden: 3, head_widths: vec![32, 16], max_len: 6 }
}

struct Problem {
    left: Vec<Vec<u8>>,
    right: Vec<Vec<u8>>,
    labels: Vec<u8>,
    masks: Vec<Tensor>,
}

impl Problem {
    fn pass(&self, p: &ParamStore) -> namelink::nn::BatchPass {
        let l: Vec<&[u8]> = self.left.iter().map(|s| &s[..]).collect();
        let r: Vec<&[u8]> = self.right.iter().map(|s| &s[..]).collect();
        forward_backward(p, &l, &r, &self.labels, &self.masks).unwrap()
    }
}

fn setup(seed: u64) -> (ParamStore, Problem) {
    let arch = tiny_arch();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ParamStore::init(&arch, &mut rng);
    // move batch-norm affine parameters off their identity start
    for b in params.blocks.iter_mut() {
        b.gamma.data.iter_mut().for_each(|g| *g = rng.random_range(0.5..1.5));
        b.beta.data.iter_mut().for_each(|g| *g = rng.random_range(-0.3..0.3));
    }
    let batch = 6;
    let seq = |rng: &mut ChaCha8Rng| (0..6).map(|_| rng.random_range(1..63u8)).collect::<Vec<u8>>();
    let left: Vec<Vec<u8>> = (0..batch).map(|_| seq(&mut rng)).collect();
    let right: Vec<Vec<u8>> = (0..batch).map(|_| seq(&mut rng)).collect();
    let labels = (0..batch).map(|i| (i % 2) as u8).collect();
    let masks = dropout_masks(&mut rng, batch, &arch.head_widths, 0.2);
    (params, Problem { left, right, labels, masks })
}

pub struct GroupError {
    pub name: String,
    pub analytic_norm: f64,
    pub relative_error: f64,
}

/// Relative error `|g_a - g_n| / max(|g_a|, |g_n|)` per parameter group.
pub fn check(seed: u64) -> Vec<GroupError> {
    let (params, problem) = setup(seed);
    let analytic = problem.pass(&params).grads;
    let groups: Vec<(String, Tensor)> = analytic.trainable().into_iter().map(|(n, t)| (n, t.clone())).collect();
    let mut out = Vec::new();
    for (gi, (name, a)) in groups.iter().enumerate() {
        let numeric: Vec<f64> = (0..a.len())
            .map(|q| {
                let mut plus = params.clone();
                plus.trainable_mut()[gi].data[q] += STEP;
                let mut minus = params.clone();
                minus.trainable_mut()[gi].data[q] -= STEP;
                (problem.pass(&plus).loss - problem.pass(&minus).loss) / (2.0 * STEP)
            })
            .collect();
        let diff = a.data.iter().zip(&numeric).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let na = a.data.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nn = numeric.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.push(GroupError { name: name.clone(), analytic_norm: na, relative_error: diff / na.max(nn).max(1e-12) });
    }
    out
}
