//! Binary cross-entropy with logits and the scalar activations shared by the
//! sequence models.

use crate::error::{Error, Result};

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Batch loss value with the gradient w.r.t. each logit.
#[derive(Debug, Clone)]
pub struct LossValue {
    pub value: f64,
    /// d loss / d logit_j = (sigmoid(logit_j) − label_j) / m.
    pub grad: Vec<f64>,
}

/// Mean binary cross-entropy of sigmoid(logit) against 0/1 labels, evaluated
/// in log-sum-exp form so extreme logits stay finite.
pub fn bce_with_logits(logits: &[f64], labels: &[u8]) -> Result<LossValue> {
    if logits.is_empty() {
        return Err(Error::config("bce_with_logits on an empty batch"));
    }
    if logits.len() != labels.len() {
        return Err(Error::shape(format!(
            "{} logits vs {} labels",
            logits.len(),
            labels.len()
        )));
    }
    if labels.iter().any(|&y| y > 1) {
        return Err(Error::config("labels must be 0 or 1"));
    }
    let m = logits.len() as f64;
    let mut total = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (&z, &y) in logits.iter().zip(labels) {
        total += bce_single(z, y);
        grad.push((sigmoid(z) - y as f64) / m);
    }
    Ok(LossValue {
        value: total / m,
        grad,
    })
}

/// Per-sample BCE-with-logits term: max(z, 0) − z·y + ln(1 + e^(−|z|)).
pub fn bce_single(logit: f64, label: u8) -> f64 {
    logit.max(0.0) - logit * label as f64 + (-logit.abs()).exp().ln_1p()
}
