//! Sequence models for transaction windows: the quantum-gated LSTM and the
//! parameter-matched classical LSTM baseline. Both read a window of feature
//! rows and emit a single fraud logit.

mod lstm;
mod qlstm;

pub use lstm::{LstmCell, LstmModel};
pub use qlstm::{QlstmCell, QlstmModel, QlstmTrace};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Entangler;
use crate::data::Window;
use crate::error::{Error, Result};
use crate::nn::{bce_single, bce_with_logits, sigmoid, ParamStore};

/// Cell states blow up past this magnitude are treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e3;

/// Hidden and cell state carried between time steps.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl CellState {
    pub fn zeros(hidden_dim: usize) -> Self {
        CellState {
            h: vec![0.0; hidden_dim],
            c: vec![0.0; hidden_dim],
        }
    }
}

/// Elementwise gate activations of one step, in (0,1) for f/i/o and (−1,1)
/// for the candidate.
#[derive(Debug, Clone)]
pub struct GateActs {
    pub forget: Vec<f64>,
    pub input: Vec<f64>,
    pub candidate: Vec<f64>,
    pub output: Vec<f64>,
}

/// The cell/hidden state update shared by both models:
/// c_t = f ⊙ c_{t−1} + i ⊙ g and h_t = o ⊙ tanh(c_t).
pub fn lstm_state_update(gates: &GateActs, c_prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let c: Vec<f64> = gates
        .forget
        .iter()
        .zip(c_prev)
        .zip(gates.input.iter().zip(&gates.candidate))
        .map(|((f, cp), (i, g))| f * cp + i * g)
        .collect();
    let h: Vec<f64> = gates
        .output
        .iter()
        .zip(&c)
        .map(|(o, ct)| o * ct.tanh())
        .collect();
    (c, h)
}

pub(crate) fn check_state_finite(c: &[f64]) -> Result<()> {
    for &v in c {
        if !v.is_finite() || v.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Divergence(format!(
                "cell state magnitude {v} exceeds {DIVERGENCE_LIMIT}"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Qlstm,
    Lstm,
}

/// Model section of an experiment config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    #[serde(default = "default_qubits")]
    pub n_qubits: usize,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_seq_len")]
    pub seq_len: usize,
    #[serde(default = "default_hidden")]
    pub hidden_dim: usize,
    #[serde(default)]
    pub entangler: Entangler,
}

fn default_qubits() -> usize {
    4
}
fn default_depth() -> usize {
    2
}
fn default_seq_len() -> usize {
    3
}
fn default_hidden() -> usize {
    4
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seq_len == 0 {
            return Err(Error::config("seq_len must be positive"));
        }
        if self.hidden_dim == 0 {
            return Err(Error::config("hidden_dim must be positive"));
        }
        if self.kind == ModelKind::Qlstm && (self.n_qubits == 0 || self.n_qubits > 16) {
            return Err(Error::config(format!(
                "n_qubits must be in 1..=16, got {}",
                self.n_qubits
            )));
        }
        Ok(())
    }
}

/// A built sequence model; parameters live in the companion [`ParamStore`].
#[derive(Debug, Clone)]
pub enum Model {
    Qlstm(QlstmModel),
    Lstm(LstmModel),
}

impl Model {
    /// Register a fresh model in `store`. Ids depend only on the config, so
    /// every federation node derives the same id space.
    pub fn build(
        cfg: &ModelConfig,
        input_dim: usize,
        store: &mut ParamStore,
        rng: &mut impl Rng,
    ) -> Result<Model> {
        cfg.validate()?;
        match cfg.kind {
            ModelKind::Qlstm => Ok(Model::Qlstm(QlstmModel::new(cfg, input_dim, store, rng)?)),
            ModelKind::Lstm => Ok(Model::Lstm(LstmModel::new(cfg, input_dim, store, rng)?)),
        }
    }

    pub fn seq_len(&self) -> usize {
        match self {
            Model::Qlstm(m) => m.seq_len(),
            Model::Lstm(m) => m.seq_len(),
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Model::Qlstm(m) => m.param_count(),
            Model::Lstm(m) => m.param_count(),
        }
    }

    /// Fraud logit for one window.
    pub fn predict(&self, store: &ParamStore, seq: &[Vec<f64>]) -> Result<f64> {
        match self {
            Model::Qlstm(m) => Ok(m.forward(store, seq)?.0),
            Model::Lstm(m) => Ok(m.forward(store, seq)?.0),
        }
    }

    /// Forward plus backward for one window, accumulating parameter gradients
    /// scaled by `upstream` into `grads`. Returns the logit.
    pub fn grad_one(
        &self,
        store: &ParamStore,
        grads: &mut [f64],
        seq: &[Vec<f64>],
        upstream: f64,
    ) -> Result<f64> {
        match self {
            Model::Qlstm(m) => {
                let (logit, trace) = m.forward(store, seq)?;
                m.backward(store, grads, &trace, upstream)?;
                Ok(logit)
            }
            Model::Lstm(m) => {
                let (logit, trace) = m.forward(store, seq)?;
                m.backward(store, grads, &trace, upstream)?;
                Ok(logit)
            }
        }
    }

    /// Mean BCE loss and its parameter gradient over a batch of windows.
    ///
    /// Each window is independent, so per-sample work runs in parallel; the
    /// per-sample gradient buffers are reduced in window order to keep the
    /// result deterministic.
    pub fn batch_loss_and_grads(
        &self,
        store: &ParamStore,
        batch: &[Window],
    ) -> Result<(f64, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::config("empty training batch"));
        }
        let m = batch.len() as f64;
        let per_sample: Vec<Result<(f64, Vec<f64>)>> = batch
            .par_iter()
            .map(|w| {
                let logit = self.predict(store, &w.rows)?;
                let upstream = (sigmoid(logit) - w.label as f64) / m;
                let mut grads = vec![0.0; store.len()];
                self.grad_one(store, &mut grads, &w.rows, upstream)?;
                Ok((bce_single(logit, w.label), grads))
            })
            .collect();

        let mut total = vec![0.0; store.len()];
        let mut loss = 0.0;
        for item in per_sample {
            let (l, g) = item?;
            loss += l;
            for (t, gi) in total.iter_mut().zip(&g) {
                *t += gi;
            }
        }
        Ok((loss / m, total))
    }

    /// Mean BCE loss of the model over labelled windows, without gradients.
    pub fn batch_loss(&self, store: &ParamStore, batch: &[Window]) -> Result<f64> {
        let logits: Result<Vec<f64>> = batch.iter().map(|w| self.predict(store, &w.rows)).collect();
        let labels: Vec<u8> = batch.iter().map(|w| w.label).collect();
        Ok(bce_with_logits(&logits?, &labels)?.value)
    }
}

/// Smallest classical-LSTM hidden size whose parameter count reaches at least
/// the target; used to parameter-match the baseline to a QLSTM config.
pub fn matched_lstm_hidden(input_dim: usize, seq_len: usize, target_params: usize) -> usize {
    let mut best = 1;
    let mut best_gap = usize::MAX;
    for hidden in 1..=256 {
        let count = LstmModel::count_params(input_dim, hidden);
        let gap = count.abs_diff(target_params);
        if gap < best_gap {
            best = hidden;
            best_gap = gap;
        }
        let _ = seq_len;
        if count > target_params * 2 {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn injected_gates_forget_everything() {
        // f = 0, i = 1: the new cell state is exactly the candidate
        let gates = GateActs {
            forget: vec![0.0, 0.0],
            input: vec![1.0, 1.0],
            candidate: vec![0.3, -0.8],
            output: vec![0.5, 0.5],
        };
        let (c, _) = lstm_state_update(&gates, &[7.0, -4.0]);
        assert_eq!(c, vec![0.3, -0.8]);
    }

    #[test]
    fn injected_output_gate_exposes_tanh_of_cell() {
        let gates = GateActs {
            forget: vec![1.0, 1.0],
            input: vec![0.0, 0.0],
            candidate: vec![0.0, 0.0],
            output: vec![1.0, 1.0],
        };
        let c_prev = vec![0.9, -2.0];
        let (c, h) = lstm_state_update(&gates, &c_prev);
        assert_eq!(c, c_prev);
        for (hv, cv) in h.iter().zip(&c) {
            assert!((hv - cv.tanh()).abs() < 1e-15);
        }
    }

    #[test]
    fn divergent_state_detected() {
        assert!(check_state_finite(&[0.0, 1e4]).is_err());
        assert!(check_state_finite(&[0.0, f64::NAN]).is_err());
        assert!(check_state_finite(&[999.0]).is_ok());
    }
}
