//! LSTM cell whose four gates are produced by variational quantum circuits.
//!
//! Per step, the input and previous hidden state are concatenated, mapped by a
//! shared linear layer onto one encoding angle per qubit, and fed through four
//! dedicated circuit blocks (forget, input, candidate, output). Each block's
//! per-wire ⟨Z⟩ readout passes through its own linear map back to hidden size;
//! sigmoid shapes f/i/o and tanh shapes the candidate, then the usual state
//! update applies. Backward chains classical backprop-through-time with
//! parameter-shift gradients through every circuit block.

use rand::Rng;

use crate::circuit::{param_shift_grad, run_vqc, CircuitSpec};
use crate::error::{Error, Result};
use crate::model::{check_state_finite, lstm_state_update, CellState, GateActs, ModelConfig};
use crate::nn::{sigmoid, LinearLayer, ParamStore, TensorRef};

const GATE_NAMES: [&str; 4] = ["forget", "input", "candidate", "output"];
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// One quantum-gated LSTM cell; stateless between calls.
#[derive(Debug, Clone)]
pub struct QlstmCell {
    input_dim: usize,
    hidden_dim: usize,
    spec: CircuitSpec,
    in_map: LinearLayer,
    gate_weights: [TensorRef; 4],
    out_maps: [LinearLayer; 4],
}

/// Intermediates of one cell step, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct QlstmStepTrace {
    v: Vec<f64>,
    encoding: Vec<f64>,
    readouts: [Vec<f64>; 4],
    gates: GateActs,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
}

impl QlstmCell {
    pub fn new(
        store: &mut ParamStore,
        component: &str,
        input_dim: usize,
        hidden_dim: usize,
        spec: CircuitSpec,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        spec.validate()?;
        let in_map = LinearLayer::new(
            store,
            &format!("{component}/in_map"),
            input_dim + hidden_dim,
            spec.n_qubits,
            rng,
        )?;
        let mut gate_weights = Vec::with_capacity(4);
        let mut out_maps = Vec::with_capacity(4);
        for name in GATE_NAMES {
            gate_weights.push(store.register(
                &format!("{component}/vqc_{name}"),
                "angles",
                spec.weight_count(),
                |_| rng.gen_range(0.0..TWO_PI),
            )?);
            out_maps.push(LinearLayer::new(
                store,
                &format!("{component}/out_{name}"),
                spec.n_qubits,
                hidden_dim,
                rng,
            )?);
        }
        Ok(QlstmCell {
            input_dim,
            hidden_dim,
            spec,
            in_map,
            gate_weights: gate_weights.try_into().expect("four gates"),
            out_maps: out_maps.try_into().expect("four gates"),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn spec(&self) -> &CircuitSpec {
        &self.spec
    }

    pub fn param_count(&self) -> usize {
        self.in_map.param_count()
            + self.gate_weights.iter().map(|t| t.len()).sum::<usize>()
            + self.out_maps.iter().map(|l| l.param_count()).sum::<usize>()
    }

    /// One step: returns the new state and the trace backward needs.
    pub fn forward(
        &self,
        store: &ParamStore,
        x: &[f64],
        state: &CellState,
    ) -> Result<(CellState, QlstmStepTrace)> {
        if x.len() != self.input_dim {
            return Err(Error::shape(format!(
                "cell expected input of length {}, got {}",
                self.input_dim,
                x.len()
            )));
        }
        if state.h.len() != self.hidden_dim || state.c.len() != self.hidden_dim {
            return Err(Error::shape("cell state has wrong hidden size"));
        }
        let mut v = Vec::with_capacity(self.input_dim + self.hidden_dim);
        v.extend_from_slice(x);
        v.extend_from_slice(&state.h);
        let encoding = self.in_map.forward(store, &v)?;

        let mut readouts: Vec<Vec<f64>> = Vec::with_capacity(4);
        let mut preacts: Vec<Vec<f64>> = Vec::with_capacity(4);
        for k in 0..4 {
            let e = run_vqc(&encoding, store.slice(self.gate_weights[k]), &self.spec)?;
            preacts.push(self.out_maps[k].forward(store, &e)?);
            readouts.push(e);
        }
        let gates = GateActs {
            forget: preacts[0].iter().map(|&z| sigmoid(z)).collect(),
            input: preacts[1].iter().map(|&z| sigmoid(z)).collect(),
            candidate: preacts[2].iter().map(|&z| z.tanh()).collect(),
            output: preacts[3].iter().map(|&z| sigmoid(z)).collect(),
        };
        let (c, h) = lstm_state_update(&gates, &state.c);
        check_state_finite(&c)?;

        let tanh_c = c.iter().map(|v| v.tanh()).collect();
        let trace = QlstmStepTrace {
            v,
            encoding,
            readouts: readouts.try_into().expect("four gates"),
            gates,
            c_prev: state.c.clone(),
            tanh_c,
        };
        Ok((CellState { h, c }, trace))
    }

    /// Backward through one step. `dh` and `dc` are the cotangents of the
    /// step's outputs; returns (dx, dh_prev, dc_prev) and accumulates
    /// parameter gradients into `grads`.
    pub fn backward(
        &self,
        store: &ParamStore,
        grads: &mut [f64],
        trace: &QlstmStepTrace,
        dh: &[f64],
        dc: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let h = self.hidden_dim;
        let GateActs {
            forget,
            input,
            candidate,
            output,
        } = &trace.gates;

        // through h = o ⊙ tanh(c)
        let mut dz_output = vec![0.0; h];
        let mut dc_total = vec![0.0; h];
        for j in 0..h {
            dz_output[j] = dh[j] * trace.tanh_c[j] * output[j] * (1.0 - output[j]);
            dc_total[j] = dc[j] + dh[j] * output[j] * (1.0 - trace.tanh_c[j] * trace.tanh_c[j]);
        }
        // through c = f ⊙ c_prev + i ⊙ g
        let mut dz_forget = vec![0.0; h];
        let mut dz_input = vec![0.0; h];
        let mut dz_candidate = vec![0.0; h];
        let mut dc_prev = vec![0.0; h];
        for j in 0..h {
            dz_forget[j] = dc_total[j] * trace.c_prev[j] * forget[j] * (1.0 - forget[j]);
            dz_input[j] = dc_total[j] * candidate[j] * input[j] * (1.0 - input[j]);
            dz_candidate[j] = dc_total[j] * input[j] * (1.0 - candidate[j] * candidate[j]);
            dc_prev[j] = dc_total[j] * forget[j];
        }

        // per gate: out_map backward, then parameter shift through the circuit
        let mut d_encoding = vec![0.0; self.spec.n_qubits];
        let dz = [&dz_forget, &dz_input, &dz_candidate, &dz_output];
        for k in 0..4 {
            let de = self.out_maps[k].backward(store, grads, &trace.readouts[k], dz[k]);
            let (d_enc, d_weights) = param_shift_grad(
                &trace.encoding,
                store.slice(self.gate_weights[k]),
                &self.spec,
                &de,
            )?;
            let w_off = self.gate_weights[k].offset();
            for (i, g) in d_weights.iter().enumerate() {
                grads[w_off + i] += g;
            }
            for (acc, g) in d_encoding.iter_mut().zip(&d_enc) {
                *acc += g;
            }
        }

        let dv = self.in_map.backward(store, grads, &trace.v, &d_encoding);
        let (dx, dh_prev) = dv.split_at(self.input_dim);
        Ok((dx.to_vec(), dh_prev.to_vec(), dc_prev))
    }
}

/// Forward trace of a whole window; feed back into [`QlstmModel::backward`].
#[derive(Debug, Clone)]
pub struct QlstmTrace {
    steps: Vec<QlstmStepTrace>,
    h_last: Vec<f64>,
}

/// Stacked QLSTM over a fixed-length window with a scalar logit head. The
/// cell's weights are shared across all time steps.
#[derive(Debug, Clone)]
pub struct QlstmModel {
    seq_len: usize,
    cell: QlstmCell,
    head: LinearLayer,
}

impl QlstmModel {
    pub fn new(
        cfg: &ModelConfig,
        input_dim: usize,
        store: &mut ParamStore,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let spec = CircuitSpec {
            n_qubits: cfg.n_qubits,
            depth: cfg.depth,
            entangler: cfg.entangler,
        };
        let cell = QlstmCell::new(store, "cell", input_dim, cfg.hidden_dim, spec, rng)?;
        let head = LinearLayer::new(store, "head", cfg.hidden_dim, 1, rng)?;
        Ok(QlstmModel {
            seq_len: cfg.seq_len,
            cell,
            head,
        })
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn cell(&self) -> &QlstmCell {
        &self.cell
    }

    pub fn head(&self) -> &LinearLayer {
        &self.head
    }

    pub fn param_count(&self) -> usize {
        self.cell.param_count() + self.head.param_count()
    }

    /// Expected scalar-parameter count for a config before building it.
    pub fn count_params(input_dim: usize, hidden: usize, n_qubits: usize, depth: usize) -> usize {
        let in_map = (input_dim + hidden) * n_qubits + n_qubits;
        let vqc = 4 * depth * n_qubits * 3;
        let out_maps = 4 * (n_qubits * hidden + hidden);
        in_map + vqc + out_maps + hidden + 1
    }

    /// Run the cell over all rows from a zero state and apply the head.
    pub fn forward(&self, store: &ParamStore, seq: &[Vec<f64>]) -> Result<(f64, QlstmTrace)> {
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
            QlstmTrace {
                steps,
                h_last: state.h,
            },
        ))
    }

    /// Backpropagation through time across all steps, chaining parameter-shift
    /// circuit gradients with the classical layers.
    pub fn backward(
        &self,
        store: &ParamStore,
        grads: &mut [f64],
        trace: &QlstmTrace,
        upstream: f64,
    ) -> Result<()> {
        let mut dh = self.head.backward(store, grads, &trace.h_last, &[upstream]);
        let mut dc = vec![0.0; self.cell.hidden_dim];
        for step in trace.steps.iter().rev() {
            let (_, dh_prev, dc_prev) = self.cell.backward(store, grads, step, &dh, &dc)?;
            dh = dh_prev;
            dc = dc_prev;
        }
        Ok(())
    }
}
