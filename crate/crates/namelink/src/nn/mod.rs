//! Neural building blocks with hand-written gradients.

pub mod distance;
pub mod head;
pub mod loss;
pub mod lstm;
pub mod nadam;
pub mod params;
pub mod tensor;

use rayon::prelude::*;

use crate::error::Result;
pub use distance::{cosine_distance, distance_backward, distance_vector};
pub use head::{dropout_masks, head_backward, head_forward_infer, head_forward_train, update_running_stats, HeadCache};
pub use loss::{bce, bce_with_grad};
pub use lstm::{input_table_backward, lstm_backward, lstm_encode, lstm_forward, InputTable, LstmTrace, Readout};
pub use nadam::NadamState;
pub use params::{Architecture, DenseBlock, ParamStore};
pub use tensor::Tensor;

/// Outcome of a training-mode pass over one batch of pairs.
pub struct BatchPass {
    pub loss: f64,
    pub grads: ParamStore,
    pub cache: HeadCache,
}

/// Forward and backward pass of the Siamese network over one batch.
///
/// `left[r]` and `right[r]` are the symbol sequences fed to the shared encoder,
/// `masks` the dropout masks (see [`dropout_masks`]).
pub fn forward_backward(
    params: &ParamStore,
    left: &[&[u8]],
    right: &[&[u8]],
    labels: &[u8],
    masks: &[Tensor],
) -> Result<BatchPass> {
    let b = labels.len();
    let table = InputTable::new(params);
    let names: Vec<&[u8]> = left.iter().chain(right).copied().collect();
    let traced: Vec<(Vec<f64>, LstmTrace)> = names.par_iter().map(|s| lstm_forward(params, &table, s)).collect();
    let dim = 4 + params.lstm_recurrent.shape[0];
    let mut x = Tensor::zeros(&[b, dim]);
    for r in 0..b {
        x.row_mut(r).copy_from_slice(&distance_vector(&traced[r].0, &traced[b + r].0));
    }
    let cache = head_forward_train(params, &x, masks);
    let (loss, dlogit) = bce_with_grad(&cache.yhat, labels)?;
    let mut grads = params.zeros_like();
    let dx = head_backward(params, &cache, &dlogit, &mut grads);
    let mut dh: Vec<Vec<f64>> = vec![Vec::new(); 2 * b];
    for r in 0..b {
        let (du, dv) = distance_backward(&traced[r].0, &traced[b + r].0, dx.row(r));
        dh[r] = du;
        dh[b + r] = dv;
    }
    let partials: Vec<(Tensor, Tensor)> = traced
        .par_iter()
        .zip(dh.par_iter())
        .map(|((_, trace), d)| {
            let mut dt = Tensor::zeros_like(&table.data);
            let mut dr = Tensor::zeros_like(&params.lstm_recurrent);
            lstm_backward(params, trace, d, &mut dt, &mut dr);
            (dt, dr)
        })
        .collect();
    let mut d_table = Tensor::zeros_like(&table.data);
    for (dt, dr) in &partials {
        d_table.add_assign(dt);
        grads.lstm_recurrent.add_assign(dr);
    }
    input_table_backward(params, &d_table, &mut grads);
    Ok(BatchPass { loss, grads, cache })
}

/// Inference-mode match probability for two symbol sequences.
pub fn predict_sequences(params: &ParamStore, table: &InputTable, a: &[u8], b: &[u8]) -> f64 {
    let u = lstm_encode(params, table, a);
    let v = lstm_encode(params, table, b);
    head_forward_infer(params, &distance_vector(&u, &v))
}
