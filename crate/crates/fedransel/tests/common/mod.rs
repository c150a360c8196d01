//! Shared test oracles and fixture configs.
//!
//! The oracles here are deliberately independent of the library's
//! implementation paths: the circuit oracle builds the full 2^n x 2^n
//! unitary by explicit matrix products, and the gradient oracle is central
//! finite differences.

#![allow(dead_code)]

use num_complex::Complex64;

use fedransel::circuit::{CircuitSpec, Entangler, GateOp};
use fedransel::data::{DataConfig, DataSource, PipelineConfig, SynthConfig};
use fedransel::experiment::ExperimentConfig;
use fedransel::federation::{Aggregation, FederationConfig};
use fedransel::model::{ModelConfig, ModelKind};
use fedransel::nn::Optimizer;
use fedransel::threat::AttackConfig;

type C = Complex64;

/// Dense column-major-free square matrix as rows of amplitudes.
pub struct DenseUnitary {
    pub dim: usize,
    pub rows: Vec<Vec<C>>,
}

impl DenseUnitary {
    pub fn identity(dim: usize) -> Self {
        let mut rows = vec![vec![C::new(0.0, 0.0); dim]; dim];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = C::new(1.0, 0.0);
        }
        DenseUnitary { dim, rows }
    }

    /// self = other * self (apply `other` after the gates already absorbed).
    pub fn left_multiply(&mut self, other: &DenseUnitary) {
        let dim = self.dim;
        let mut out = vec![vec![C::new(0.0, 0.0); dim]; dim];
        for i in 0..dim {
            for k in 0..dim {
                let o = other.rows[i][k];
                if o.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..dim {
                    out[i][j] += o * self.rows[k][j];
                }
            }
        }
        self.rows = out;
    }

    pub fn apply_to_basis_zero(&self) -> Vec<C> {
        self.rows.iter().map(|row| row[0]).collect()
    }
}

fn mat2(kind: &str, angles: &[f64]) -> [[C; 2]; 2] {
    let i = C::new(0.0, 1.0);
    match kind {
        "rx" => {
            let (c, s) = ((angles[0] / 2.0).cos(), (angles[0] / 2.0).sin());
            [[C::new(c, 0.0), -i * s], [-i * s, C::new(c, 0.0)]]
        }
        "ry" => {
            let (c, s) = ((angles[0] / 2.0).cos(), (angles[0] / 2.0).sin());
            [
                [C::new(c, 0.0), C::new(-s, 0.0)],
                [C::new(s, 0.0), C::new(c, 0.0)],
            ]
        }
        "rz" => [
            [(-i * angles[0] / 2.0).exp(), C::new(0.0, 0.0)],
            [C::new(0.0, 0.0), (i * angles[0] / 2.0).exp()],
        ],
        "rot" => {
            // RZ(omega) RY(theta) RZ(phi) as one explicit 2x2 product
            let (phi, theta, omega) = (angles[0], angles[1], angles[2]);
            let a = mat2("rz", &[omega]);
            let b = mat2("ry", &[theta]);
            let c = mat2("rz", &[phi]);
            let mut bc = [[C::new(0.0, 0.0); 2]; 2];
            for r in 0..2 {
                for col in 0..2 {
                    bc[r][col] = b[r][0] * c[0][col] + b[r][1] * c[1][col];
                }
            }
            let mut abc = [[C::new(0.0, 0.0); 2]; 2];
            for r in 0..2 {
                for col in 0..2 {
                    abc[r][col] = a[r][0] * bc[0][col] + a[r][1] * bc[1][col];
                }
            }
            abc
        }
        other => panic!("unknown gate {other}"),
    }
}

/// Embed one gate into the full 2^n-dimensional unitary. Qubit 0 is the least
/// significant bit of the basis index, matching the simulator's convention.
pub fn gate_unitary(op: &GateOp, n_qubits: usize) -> DenseUnitary {
    let dim = 1usize << n_qubits;
    let mut u = DenseUnitary {
        dim,
        rows: vec![vec![C::new(0.0, 0.0); dim]; dim],
    };
    match op {
        GateOp::Cnot { control, target } => {
            for j in 0..dim {
                let i = if j & (1 << control) != 0 {
                    j ^ (1 << target)
                } else {
                    j
                };
                u.rows[i][j] = C::new(1.0, 0.0);
            }
        }
        single => {
            let (wire, m) = match single {
                GateOp::Rx { wire, angle } => (*wire, mat2("rx", &[*angle])),
                GateOp::Ry { wire, angle } => (*wire, mat2("ry", &[*angle])),
                GateOp::Rz { wire, angle } => (*wire, mat2("rz", &[*angle])),
                GateOp::Rot { wire, angles } => (*wire, mat2("rot", angles)),
                GateOp::Cnot { .. } => unreachable!(),
            };
            let bit = 1usize << wire;
            for j in 0..dim {
                let jb = usize::from(j & bit != 0);
                for ib in 0..2 {
                    let i = if ib == 0 { j & !bit } else { j | bit };
                    let v = m[ib][jb];
                    if v.norm_sqr() > 0.0 {
                        u.rows[i][j] = v;
                    }
                }
            }
        }
    }
    u
}

/// Full unitary-product simulation: multiply every gate's dense matrix into
/// one 2^n x 2^n unitary, apply it to |0...0>, read per-wire Z expectations.
pub fn oracle_expectations(ops: &[GateOp], n_qubits: usize) -> Vec<f64> {
    let mut total = DenseUnitary::identity(1 << n_qubits);
    for op in ops {
        let g = gate_unitary(op, n_qubits);
        total.left_multiply(&g);
    }
    let state = total.apply_to_basis_zero();
    (0..n_qubits)
        .map(|q| {
            state
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let sign = if i & (1 << q) == 0 { 1.0 } else { -1.0 };
                    sign * a.norm_sqr()
                })
                .sum()
        })
        .collect()
}

/// Relative-or-absolute gradient agreement: |a-n| < 1e-6 near zero, else
/// |a-n|/|n| < 1e-4.
pub fn grads_agree(analytic: f64, numeric: f64) -> bool {
    let diff = (analytic - numeric).abs();
    diff < 1e-6 || diff / numeric.abs() < 1e-4
}

/// The desk-scale learning configuration: high-signal synthetic data, a
/// 4-qubit depth-2 QLSTM over 3-step windows, 2 nodes, 3 FedRansel rounds.
pub fn learning_config() -> ExperimentConfig {
    ExperimentConfig {
        model: ModelConfig {
            kind: ModelKind::Qlstm,
            n_qubits: 4,
            depth: 2,
            seq_len: 3,
            hidden_dim: 4,
            entangler: Entangler::Ring,
        },
        data: DataConfig {
            source: DataSource::Synth(SynthConfig {
                n_samples: 2000,
                n_features: 8,
                signal_strength: 6.0,
                gen_window: 3,
            }),
            pipeline: PipelineConfig::default(),
            train_ratio: 2.0 / 3.0,
            window_stride: 1,
        },
        federation: FederationConfig {
            n_nodes: 2,
            rounds: 3,
            local_epochs: 10,
            batch_size: 32,
            t_local: 0.8,
            t_global: 0.8,
            aggregation: Aggregation::Fedransel,
        },
        optimizer: Optimizer::Adam { lr: 0.05 },
        attack: AttackConfig::none(),
        seeds: vec![1, 2, 3],
    }
}

/// Smaller, overfit-prone variant used by the membership-inference check.
pub fn overfit_config() -> ExperimentConfig {
    let mut cfg = learning_config();
    cfg.data.source = DataSource::Synth(SynthConfig {
        n_samples: 600,
        n_features: 8,
        signal_strength: 6.0,
        gen_window: 3,
    });
    cfg.federation.local_epochs = 25;
    cfg
}

/// Tiny config for protocol and reproducibility checks; runs in seconds.
pub fn tiny_config() -> ExperimentConfig {
    let mut cfg = learning_config();
    cfg.data.source = DataSource::Synth(SynthConfig {
        n_samples: 300,
        n_features: 6,
        signal_strength: 4.0,
        gen_window: 2,
    });
    cfg.model.n_qubits = 2;
    cfg.model.depth = 1;
    cfg.model.seq_len = 2;
    cfg.model.hidden_dim = 2;
    cfg.federation.rounds = 2;
    cfg.federation.local_epochs = 2;
    cfg.seeds = vec![7];
    cfg
}

pub fn small_circuit_spec(n_qubits: usize, depth: usize) -> CircuitSpec {
    CircuitSpec {
        n_qubits,
        depth,
        entangler: Entangler::Ring,
    }
}

/// Print the per-criterion verdict line and panic on failure.
pub fn criterion(number: usize, name: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("acceptance criterion {number} ({name}): {verdict} — {detail}");
    assert!(pass, "criterion {number} ({name}) failed: {detail}");
}
