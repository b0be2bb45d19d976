use crate::error::{Error, Result};

pub const PROB_CLAMP: f64 = 1e-7;

/// Mean binary cross-entropy and its gradient with respect to each pre-sigmoid logit.
///
/// Predictions are clamped to `[1e-7, 1 − 1e-7]`; a clamped sample contributes no gradient.
pub fn bce_with_grad(yhat: &[f64], y: &[u8]) -> Result<(f64, Vec<f64>)> {
    let b = yhat.len() as f64;
    let mut loss = 0.0;
    let mut dlogit = Vec::with_capacity(yhat.len());
    for (&p, &t) in yhat.iter().zip(y) {
        let pc = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        let t = t as f64;
        loss -= t * pc.ln() + (1.0 - t) * (1.0 - pc).ln();
        dlogit.push(if pc == p { (p - t) / b } else { 0.0 });
    }
    let loss = loss / b;
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("binary cross-entropy is {loss}")));
    }
    Ok((loss, dlogit))
}

/// Mean binary cross-entropy only.
pub fn bce(yhat: &[f64], y: &[u8]) -> Result<f64> {
    bce_with_grad(yhat, y).map(|(l, _)| l)
}
