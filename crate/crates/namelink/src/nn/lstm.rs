use serde::{Deserialize, Serialize};

use super::params::ParamStore;
use super::tensor::Tensor;
use crate::text::EncodedName;

/// Which hidden state of the encoder represents the name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// Hidden state after the last real character; pad positions are not fed.
    #[default]
    LastToken,
    /// Hidden state after all padded positions, pad fed as an ordinary symbol.
    Padded,
}

impl Readout {
    /// The index sequence the encoder consumes for `name`.
    pub fn steps<'a>(&self, name: &'a EncodedName) -> &'a [u8] {
        match self {
            Readout::LastToken => &name.indices()[..name.true_length()],
            Readout::Padded => name.indices(),
        }
    }
}

/// Embedding rows pushed through the LSTM input kernel plus bias: `[alphabet, 4H]`.
///
/// Every step's input contribution is a row lookup into this table.
#[derive(Debug, Clone)]
pub struct InputTable {
    pub data: Tensor,
}

impl InputTable {
    pub fn new(params: &ParamStore) -> Self {
        let (v, e) = (params.embedding.shape[0], params.embedding.shape[1]);
        let g = params.lstm_bias.len();
        let mut data = Tensor::zeros(&[v, g]);
        for r in 0..v {
            let out = &mut data.data[r * g..(r + 1) * g];
            out.copy_from_slice(&params.lstm_bias.data);
            for k in 0..e {
                let x = params.embedding.data[r * e + k];
                let w = params.lstm_kernel.row(k);
                for (o, wk) in out.iter_mut().zip(w) {
                    *o += x * wk;
                }
            }
        }
        Self { data }
    }
}

/// Per-step activations kept for backpropagation through time.
#[derive(Debug, Clone, Default)]
pub struct LstmTrace {
    steps: Vec<u8>,
    /// `[T, 4H]` post-activation gates (i, f, g, o).
    gates: Vec<f64>,
    /// `[T, H]` cell states.
    cells: Vec<f64>,
    /// `[T, H]` hidden states.
    hidden: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One LSTM step; writes activated gates into `gates` and updates `c`, `h`.
fn step(
    table: &InputTable,
    recurrent: &Tensor,
    symbol: u8,
    h: &mut [f64],
    c: &mut [f64],
    gates: &mut [f64],
) {
    let hdim = h.len();
    let g = 4 * hdim;
    gates.copy_from_slice(table.data.row(symbol as usize));
    for (k, &hk) in h.iter().enumerate() {
        if hk != 0.0 {
            let u = &recurrent.data[k * g..(k + 1) * g];
            for (z, w) in gates.iter_mut().zip(u) {
                *z += hk * w;
            }
        }
    }
    let (i, rest) = gates.split_at_mut(hdim);
    let (f, rest) = rest.split_at_mut(hdim);
    let (cand, o) = rest.split_at_mut(hdim);
    for j in 0..hdim {
        i[j] = sigmoid(i[j]);
        f[j] = sigmoid(f[j]);
        cand[j] = cand[j].tanh();
        o[j] = sigmoid(o[j]);
        c[j] = f[j] * c[j] + i[j] * cand[j];
        h[j] = o[j] * c[j].tanh();
    }
}

/// Final hidden state for `steps`; an empty sequence yields the zero vector.
pub fn lstm_encode(params: &ParamStore, table: &InputTable, steps: &[u8]) -> Vec<f64> {
    let hdim = params.lstm_recurrent.shape[0];
    let mut h = vec![0.0; hdim];
    let mut c = vec![0.0; hdim];
    let mut gates = vec![0.0; 4 * hdim];
    for &s in steps {
        step(table, &params.lstm_recurrent, s, &mut h, &mut c, &mut gates);
    }
    h
}

/// Same result as [`lstm_encode`], keeping the activations needed for [`lstm_backward`].
pub fn lstm_forward(params: &ParamStore, table: &InputTable, steps: &[u8]) -> (Vec<f64>, LstmTrace) {
    let hdim = params.lstm_recurrent.shape[0];
    let t = steps.len();
    let mut trace = LstmTrace {
        steps: steps.to_vec(),
        gates: vec![0.0; t * 4 * hdim],
        cells: vec![0.0; t * hdim],
        hidden: vec![0.0; t * hdim],
    };
    let mut h = vec![0.0; hdim];
    let mut c = vec![0.0; hdim];
    for (n, &s) in steps.iter().enumerate() {
        let gates = &mut trace.gates[n * 4 * hdim..(n + 1) * 4 * hdim];
        step(table, &params.lstm_recurrent, s, &mut h, &mut c, gates);
        trace.cells[n * hdim..(n + 1) * hdim].copy_from_slice(&c);
        trace.hidden[n * hdim..(n + 1) * hdim].copy_from_slice(&h);
    }
    (h, trace)
}

/// Backpropagation through time from `dh_out` (gradient w.r.t. the final hidden state).
///
/// Accumulates into `d_table` (`[alphabet, 4H]`) and `d_recurrent` (`[H, 4H]`).
pub fn lstm_backward(
    params: &ParamStore,
    trace: &LstmTrace,
    dh_out: &[f64],
    d_table: &mut Tensor,
    d_recurrent: &mut Tensor,
) {
    let hdim = dh_out.len();
    let g = 4 * hdim;
    let u = &params.lstm_recurrent;
    let mut dh = dh_out.to_vec();
    let mut dc = vec![0.0; hdim];
    let mut dz = vec![0.0; g];
    let zeros = vec![0.0; hdim];
    for n in (0..trace.steps.len()).rev() {
        let gates = &trace.gates[n * g..(n + 1) * g];
        let c = &trace.cells[n * hdim..(n + 1) * hdim];
        let (c_prev, h_prev) = if n == 0 {
            (&zeros[..], &zeros[..])
        } else {
            (
                &trace.cells[(n - 1) * hdim..n * hdim],
                &trace.hidden[(n - 1) * hdim..n * hdim],
            )
        };
        for j in 0..hdim {
            let (i, f, cand, o) = (gates[j], gates[hdim + j], gates[2 * hdim + j], gates[3 * hdim + j]);
            let tc = c[j].tanh();
            let d_o = dh[j] * tc;
            dc[j] += dh[j] * o * (1.0 - tc * tc);
            let di = dc[j] * cand;
            let dcand = dc[j] * i;
            let df = dc[j] * c_prev[j];
            dz[j] = di * i * (1.0 - i);
            dz[hdim + j] = df * f * (1.0 - f);
            dz[2 * hdim + j] = dcand * (1.0 - cand * cand);
            dz[3 * hdim + j] = d_o * o * (1.0 - o);
            dc[j] *= f;
        }
        for (a, b) in d_table.row_mut(trace.steps[n] as usize).iter_mut().zip(&dz) {
            *a += b;
        }
        for k in 0..hdim {
            let hk = h_prev[k];
            let urow = &u.data[k * g..(k + 1) * g];
            let drow = &mut d_recurrent.data[k * g..(k + 1) * g];
            let mut acc = 0.0;
            for q in 0..g {
                drow[q] += hk * dz[q];
                acc += urow[q] * dz[q];
            }
            dh[k] = acc;
        }
    }
}

/// Chain `d_table` back to the embedding, input kernel and LSTM bias.
pub fn input_table_backward(params: &ParamStore, d_table: &Tensor, grads: &mut ParamStore) {
    let (v, e) = (params.embedding.shape[0], params.embedding.shape[1]);
    let g = d_table.cols();
    for r in 0..v {
        let dp = d_table.row(r);
        if dp.iter().all(|&x| x == 0.0) {
            continue;
        }
        for (b, d) in grads.lstm_bias.data.iter_mut().zip(dp) {
            *b += d;
        }
        for k in 0..e {
            let w = &params.lstm_kernel.data[k * g..(k + 1) * g];
            let emb = params.embedding.data[r * e + k];
            let dw = &mut grads.lstm_kernel.data[k * g..(k + 1) * g];
            let mut acc = 0.0;
            for q in 0..g {
                acc += dp[q] * w[q];
                dw[q] += emb * dp[q];
            }
            grads.embedding.data[r * e + k] += acc;
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
    fn zero_weights_give_zero_state() {
        let arch = Architecture::default();
        let p = ParamStore::zeros(&arch);
        let table = InputTable::new(&p);
        let h = lstm_encode(&p, &table, &[5, 6, 7, 0, 0]);
        assert_eq!(h, vec![0.0; 16]);
    }

    #[test]
    fn single_step_matches_hand_computation() {
        let arch = Architecture { hidden: 1, ..Architecture::default() };
        let mut p = ParamStore::zeros(&arch);
        let large = 5.0;
        p.lstm_bias.data[2] = large;
        let table = InputTable::new(&p);
        let h = lstm_encode(&p, &table, &[3]);
        // c = σ(0)·tanh(large); h = σ(0)·tanh(c)
        let expected = 0.5 * (0.5 * large.tanh()).tanh();
        assert!((h[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn traced_and_plain_forward_agree() {
        let arch = Architecture::default();
        let p = ParamStore::init(&arch, &mut ChaCha8Rng::seed_from_u64(1));
        let table = InputTable::new(&p);
        let seq = [1u8, 2, 3, 37, 4, 5];
        let (h, _) = lstm_forward(&p, &table, &seq);
        assert_eq!(h, lstm_encode(&p, &table, &seq));
    }

    #[test]
    fn empty_sequence_is_zero() {
        let arch = Architecture::default();
        let p = ParamStore::init(&arch, &mut ChaCha8Rng::seed_from_u64(1));
        let table = InputTable::new(&p);
        assert_eq!(lstm_encode(&p, &table, &[]), vec![0.0; 16]);
    }
}
