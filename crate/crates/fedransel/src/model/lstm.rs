//! Classical LSTM baseline with the same window-in, logit-out contract as the
//! quantum model; gates are sigmoid/tanh of affine maps over [x, h].

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{check_state_finite, lstm_state_update, CellState, GateActs, ModelConfig};
use crate::nn::{sigmoid, LinearLayer, ParamStore};

#[derive(Debug, Clone)]
pub struct LstmCell {
    input_dim: usize,
    hidden_dim: usize,
    /// forget, input, candidate, output maps, each (d+H) -> H.
    gate_maps: [LinearLayer; 4],
}

#[derive(Debug, Clone)]
pub struct LstmStepTrace {
    v: Vec<f64>,
    gates: GateActs,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
}

impl LstmCell {
    pub fn new(
        store: &mut ParamStore,
        component: &str,
        input_dim: usize,
        hidden_dim: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let mut maps = Vec::with_capacity(4);
        for name in ["forget", "input", "candidate", "output"] {
            maps.push(LinearLayer::new(
                store,
                &format!("{component}/{name}"),
                input_dim + hidden_dim,
                hidden_dim,
                rng,
            )?);
        }
        Ok(LstmCell {
            input_dim,
            hidden_dim,
            gate_maps: maps.try_into().expect("four gates"),
        })
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn param_count(&self) -> usize {
        self.gate_maps.iter().map(|l| l.param_count()).sum()
    }

    pub fn forward(
        &self,
        store: &ParamStore,
        x: &[f64],
        state: &CellState,
    ) -> Result<(CellState, LstmStepTrace)> {
        if x.len() != self.input_dim {
            return Err(Error::shape(format!(
                "cell expected input of length {}, got {}",
                self.input_dim,
                x.len()
            )));
        }
        let mut v = Vec::with_capacity(self.input_dim + self.hidden_dim);
        v.extend_from_slice(x);
        v.extend_from_slice(&state.h);

        let zf = self.gate_maps[0].forward(store, &v)?;
        let zi = self.gate_maps[1].forward(store, &v)?;
        let zg = self.gate_maps[2].forward(store, &v)?;
        let zo = self.gate_maps[3].forward(store, &v)?;
        let gates = GateActs {
            forget: zf.iter().map(|&z| sigmoid(z)).collect(),
            input: zi.iter().map(|&z| sigmoid(z)).collect(),
            candidate: zg.iter().map(|&z| z.tanh()).collect(),
            output: zo.iter().map(|&z| sigmoid(z)).collect(),
        };
        let (c, h) = lstm_state_update(&gates, &state.c);
        check_state_finite(&c)?;
        let tanh_c = c.iter().map(|v| v.tanh()).collect();
        let trace = LstmStepTrace {
            v,
            gates,
            c_prev: state.c.clone(),
            tanh_c,
        };
        Ok((CellState { h, c }, trace))
    }

    pub fn backward(
        &self,
        store: &ParamStore,
        grads: &mut [f64],
        trace: &LstmStepTrace,
        dh: &[f64],
        dc: &[f64],
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let hdim = self.hidden_dim;
        let GateActs {
            forget,
            input,
            candidate,
            output,
        } = &trace.gates;

        let mut dz_output = vec![0.0; hdim];
        let mut dc_total = vec![0.0; hdim];
        for j in 0..hdim {
            dz_output[j] = dh[j] * trace.tanh_c[j] * output[j] * (1.0 - output[j]);
            dc_total[j] = dc[j] + dh[j] * output[j] * (1.0 - trace.tanh_c[j] * trace.tanh_c[j]);
        }
        let mut dz_forget = vec![0.0; hdim];
        let mut dz_input = vec![0.0; hdim];
        let mut dz_candidate = vec![0.0; hdim];
        let mut dc_prev = vec![0.0; hdim];
        for j in 0..hdim {
            dz_forget[j] = dc_total[j] * trace.c_prev[j] * forget[j] * (1.0 - forget[j]);
            dz_input[j] = dc_total[j] * candidate[j] * input[j] * (1.0 - input[j]);
            dz_candidate[j] = dc_total[j] * input[j] * (1.0 - candidate[j] * candidate[j]);
            dc_prev[j] = dc_total[j] * forget[j];
        }

        let mut dv = vec![0.0; trace.v.len()];
        let dz = [&dz_forget, &dz_input, &dz_candidate, &dz_output];
        for k in 0..4 {
            let d = self.gate_maps[k].backward(store, grads, &trace.v, dz[k]);
            for (acc, g) in dv.iter_mut().zip(&d) {
                *acc += g;
            }
        }
        let (dx, dh_prev) = dv.split_at(self.input_dim);
        (dx.to_vec(), dh_prev.to_vec(), dc_prev)
    }
}

#[derive(Debug, Clone)]
pub struct LstmTrace {
    steps: Vec<LstmStepTrace>,
    h_last: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LstmModel {
    seq_len: usize,
    cell: LstmCell,
    head: LinearLayer,
}

impl LstmModel {
    pub fn new(
        cfg: &ModelConfig,
        input_dim: usize,
        store: &mut ParamStore,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let cell = LstmCell::new(store, "lstm", input_dim, cfg.hidden_dim, rng)?;
        let head = LinearLayer::new(store, "head", cfg.hidden_dim, 1, rng)?;
        Ok(LstmModel {
            seq_len: cfg.seq_len,
            cell,
            head,
        })
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn cell(&self) -> &LstmCell {
        &self.cell
    }

    pub fn param_count(&self) -> usize {
        self.cell.param_count() + self.head.param_count()
    }

    /// Expected scalar-parameter count for a (input_dim, hidden) choice.
    pub fn count_params(input_dim: usize, hidden: usize) -> usize {
        4 * (hidden * (input_dim + hidden) + hidden) + hidden + 1
    }

    pub fn forward(&self, store: &ParamStore, seq: &[Vec<f64>]) -> Result<(f64, LstmTrace)> {
        if seq.len() != self.seq_len {
            return Err(Error::shape(format!(
                "expected sequence of length {}, got {}",
                self.seq_len,
                seq.len()
            )));
        }
        let mut state = CellState::zeros(self.cell.hidden_dim);
        let mut steps = Vec::with_capacity(self.seq_len);
        for row in seq {
            let (next, trace) = self.cell.forward(store, row, &state)?;
            steps.push(trace);
            state = next;
        }
        let logit = self.head.forward(store, &state.h)?[0];
        Ok((
            logit,
            LstmTrace {
                steps,
                h_last: state.h,
            },
        ))
    }

    pub fn backward(
        &self,
        store: &ParamStore,
        grads: &mut [f64],
        trace: &LstmTrace,
        upstream: f64,
    ) -> Result<()> {
        let mut dh = self.head.backward(store, grads, &trace.h_last, &[upstream]);
        let mut dc = vec![0.0; self.cell.hidden_dim];
        for step in trace.steps.iter().rev() {
            let (_, dh_prev, dc_prev) = self.cell.backward(store, grads, step, &dh, &dc);
            dh = dh_prev;
            dc = dc_prev;
        }
        Ok(())
    }
}
