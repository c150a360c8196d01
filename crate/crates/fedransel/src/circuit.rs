//! Dense statevector simulation of the variational circuits that drive the
//! QLSTM gates: RX angle encoding, layered `Rot` rotations with CNOT
//! entanglement, per-wire Pauli-Z readout, and parameter-shift gradients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard ceiling on qubit count; 2^16 amplitudes is the largest state this
/// simulator is meant to handle.
pub const MAX_QUBITS: usize = 16;

type C = Complex64;
type Mat2 = [[C; 2]; 2];

fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[C::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// RX(θ) = exp(−iθX/2).
fn rx_matrix(theta: f64) -> Mat2 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [
        [C::new(c, 0.0), C::new(0.0, -s)],
        [C::new(0.0, -s), C::new(c, 0.0)],
    ]
}

/// RY(θ) = exp(−iθY/2).
fn ry_matrix(theta: f64) -> Mat2 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [
        [C::new(c, 0.0), C::new(-s, 0.0)],
        [C::new(s, 0.0), C::new(c, 0.0)],
    ]
}

/// RZ(θ) = exp(−iθZ/2).
fn rz_matrix(theta: f64) -> Mat2 {
    [
        [C::from_polar(1.0, -theta / 2.0), C::new(0.0, 0.0)],
        [C::new(0.0, 0.0), C::from_polar(1.0, theta / 2.0)],
    ]
}

/// Rot(φ, θ, ω) = RZ(ω) · RY(θ) · RZ(φ), i.e. RZ(φ) acts first.
fn rot_matrix(phi: f64, theta: f64, omega: f64) -> Mat2 {
    mat2_mul(
        &rz_matrix(omega),
        &mat2_mul(&ry_matrix(theta), &rz_matrix(phi)),
    )
}

/// One gate in a circuit. Wire indices are checked against the state at
/// application time; the angle arity is fixed by the variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum GateOp {
    Rx { wire: usize, angle: f64 },
    Ry { wire: usize, angle: f64 },
    Rz { wire: usize, angle: f64 },
    Rot { wire: usize, angles: [f64; 3] },
    Cnot { control: usize, target: usize },
}

impl GateOp {
    /// The inverse gate: negated angles in reverse order; CNOT is self-inverse.
    pub fn inverse(&self) -> GateOp {
        match *self {
            GateOp::Rx { wire, angle } => GateOp::Rx {
                wire,
                angle: -angle,
            },
            GateOp::Ry { wire, angle } => GateOp::Ry {
                wire,
                angle: -angle,
            },
            GateOp::Rz { wire, angle } => GateOp::Rz {
                wire,
                angle: -angle,
            },
            GateOp::Rot { wire, angles } => GateOp::Rot {
                wire,
                angles: [-angles[2], -angles[1], -angles[0]],
            },
            GateOp::Cnot { control, target } => GateOp::Cnot { control, target },
        }
    }
}

/// CNOT wiring applied after each variational layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Entangler {
    /// CNOT(q, (q+1) mod n) for every wire q; a no-op on one qubit.
    #[default]
    Ring,
    /// CNOT(q, q+1) for q < n−1.
    Chain,
}

/// Shape of one variational circuit: qubit count, number of `Rot` layers and
/// the entangling wire pattern. Weight count is `depth * n_qubits * 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub depth: usize,
    #[serde(default)]
    pub entangler: Entangler,
}

impl CircuitSpec {
    pub fn new(n_qubits: usize, depth: usize) -> Self {
        CircuitSpec {
            n_qubits,
            depth,
            entangler: Entangler::Ring,
        }
    }

    pub fn weight_count(&self) -> usize {
        self.depth * self.n_qubits * 3
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::config(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {}",
                self.n_qubits
            )));
        }
        Ok(())
    }
}

/// Normalized complex amplitude vector over the computational basis of
/// `n_qubits` qubits. Qubit 0 is the least significant bit of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<C>,
}

/// All-zeros computational basis state |0…0⟩.
pub fn init_state(n_qubits: usize) -> Result<Statevector> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::config(format!(
            "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    let mut amps = vec![C::new(0.0, 0.0); 1 << n_qubits];
    amps[0] = C::new(1.0, 0.0);
    Ok(Statevector { n_qubits, amps })
}

impl Statevector {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_wire(&self, wire: usize) -> Result<()> {
        if wire >= self.n_qubits {
            return Err(Error::Index(format!(
                "wire {wire} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// In-place single-qubit unitary on `wire`; one pass over all amplitude
    /// pairs that differ only in that wire's bit.
    fn apply_single(&mut self, wire: usize, u: &Mat2) {
        let bit = 1usize << wire;
        let dim = self.amps.len();
        let mut base = 0usize;
        while base < dim {
            for i in base..base + bit {
                let j = i | bit;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[j] = u[1][0] * a0 + u[1][1] * a1;
            }
            base += bit << 1;
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for i in 0..self.amps.len() {
            // visit each swapped pair once: control set, target clear
            if i & cbit != 0 && i & tbit == 0 {
                self.amps.swap(i, i | tbit);
            }
        }
    }

    /// Apply one gate in place; norm is preserved by unitarity.
    pub fn apply(&mut self, op: &GateOp) -> Result<()> {
        match *op {
            GateOp::Rx { wire, angle } => {
                self.check_wire(wire)?;
                self.apply_single(wire, &rx_matrix(angle));
            }
            GateOp::Ry { wire, angle } => {
                self.check_wire(wire)?;
                self.apply_single(wire, &ry_matrix(angle));
            }
            GateOp::Rz { wire, angle } => {
                self.check_wire(wire)?;
                self.apply_single(wire, &rz_matrix(angle));
            }
            GateOp::Rot { wire, angles } => {
                self.check_wire(wire)?;
                self.apply_single(wire, &rot_matrix(angles[0], angles[1], angles[2]));
            }
            GateOp::Cnot { control, target } => {
                self.check_wire(control)?;
                self.check_wire(target)?;
                if control == target {
                    return Err(Error::Index(format!(
                        "cnot control and target must differ, both are {control}"
                    )));
                }
                self.apply_cnot(control, target);
            }
        }
        Ok(())
    }

    /// ⟨Z⟩ on `wire`: Σ |amp|² · (+1 if the wire bit is 0, −1 if it is 1).
    pub fn expval_z(&self, wire: usize) -> Result<f64> {
        self.check_wire(wire)?;
        let bit = 1usize << wire;
        let mut acc = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            let sign = if i & bit == 0 { 1.0 } else { -1.0 };
            acc += sign * a.norm_sqr();
        }
        Ok(acc)
    }

    /// ⟨Z⟩ on every wire.
    pub fn expval_z_all(&self) -> Vec<f64> {
        (0..self.n_qubits)
            .map(|q| self.expval_z(q).expect("wire in range"))
            .collect()
    }
}

/// The CNOT sequence one entangling layer applies.
pub fn entangler_pairs(entangler: Entangler, n_qubits: usize) -> Vec<(usize, usize)> {
    match entangler {
        Entangler::Ring => {
            if n_qubits < 2 {
                Vec::new()
            } else {
                (0..n_qubits).map(|q| (q, (q + 1) % n_qubits)).collect()
            }
        }
        Entangler::Chain => (0..n_qubits.saturating_sub(1))
            .map(|q| (q, q + 1))
            .collect(),
    }
}

/// The full gate sequence of one variational circuit: RX encoding of
/// `inputs`, then per layer a `Rot` on every wire followed by the entangler.
/// Weights are flat with layout `[layer][qubit][3]`.
pub fn vqc_ops(inputs: &[f64], weights: &[f64], spec: &CircuitSpec) -> Result<Vec<GateOp>> {
    spec.validate()?;
    let n = spec.n_qubits;
    if inputs.len() != n {
        return Err(Error::config(format!(
            "expected {n} encoding angles, got {}",
            inputs.len()
        )));
    }
    if weights.len() != spec.weight_count() {
        return Err(Error::config(format!(
            "expected {} circuit weights, got {}",
            spec.weight_count(),
            weights.len()
        )));
    }
    if inputs.iter().chain(weights).any(|v| !v.is_finite()) {
        return Err(Error::config("non-finite circuit angle"));
    }

    let mut ops = Vec::with_capacity(n + spec.depth * 2 * n);
    for (q, &angle) in inputs.iter().enumerate() {
        ops.push(GateOp::Rx { wire: q, angle });
    }
    for layer in 0..spec.depth {
        for q in 0..n {
            let base = (layer * n + q) * 3;
            ops.push(GateOp::Rot {
                wire: q,
                angles: [weights[base], weights[base + 1], weights[base + 2]],
            });
        }
        for (c, t) in entangler_pairs(spec.entangler, n) {
            ops.push(GateOp::Cnot {
                control: c,
                target: t,
            });
        }
    }
    Ok(ops)
}

/// Run the variational circuit and read out ⟨Z⟩ on every wire.
pub fn run_vqc(inputs: &[f64], weights: &[f64], spec: &CircuitSpec) -> Result<Vec<f64>> {
    let ops = vqc_ops(inputs, weights, spec)?;
    let mut state = init_state(spec.n_qubits)?;
    for op in &ops {
        state.apply(op)?;
    }
    Ok(state.expval_z_all())
}

/// Parameter-shift gradients of the circuit readouts, chain-ruled against
/// `upstream` (one cotangent per wire).
///
/// Every angle is a rotation parameter, so for each one
/// d⟨Z_q⟩/da = (⟨Z_q⟩ at a+π/2 − ⟨Z_q⟩ at a−π/2) / 2, and the returned entry
/// is Σ_q upstream[q] · d⟨Z_q⟩/da. Encoding angles obey the same rule as the
/// `Rot` weights, so gradients flow into the classical input map as well.
pub fn param_shift_grad(
    inputs: &[f64],
    weights: &[f64],
    spec: &CircuitSpec,
    upstream: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if upstream.len() != spec.n_qubits {
        return Err(Error::config(format!(
            "expected {} upstream cotangents, got {}",
            spec.n_qubits,
            upstream.len()
        )));
    }
    const SHIFT: f64 = std::f64::consts::FRAC_PI_2;

    let chain = |plus: &[f64], minus: &[f64]| -> f64 {
        upstream
            .iter()
            .zip(plus.iter().zip(minus))
            .map(|(u, (p, m))| u * (p - m) / 2.0)
            .sum()
    };

    let mut shifted_inputs = inputs.to_vec();
    let mut grad_inputs = Vec::with_capacity(inputs.len());
    for j in 0..inputs.len() {
        shifted_inputs[j] = inputs[j] + SHIFT;
        let plus = run_vqc(&shifted_inputs, weights, spec)?;
        shifted_inputs[j] = inputs[j] - SHIFT;
        let minus = run_vqc(&shifted_inputs, weights, spec)?;
        shifted_inputs[j] = inputs[j];
        grad_inputs.push(chain(&plus, &minus));
    }

    let mut shifted_weights = weights.to_vec();
    let mut grad_weights = Vec::with_capacity(weights.len());
    for j in 0..weights.len() {
        shifted_weights[j] = weights[j] + SHIFT;
        let plus = run_vqc(inputs, &shifted_weights, spec)?;
        shifted_weights[j] = weights[j] - SHIFT;
        let minus = run_vqc(inputs, &shifted_weights, spec)?;
        shifted_weights[j] = weights[j];
        grad_weights.push(chain(&plus, &minus));
    }

    Ok((grad_inputs, grad_weights))
}
