//! SGD and Adam over a [`ParamStore`](crate::nn::ParamStore).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::params::ParamStore;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Optimizer {
    Sgd { lr: f64 },
    Adam { lr: f64 },
}

impl Optimizer {
    pub fn step(&self, store: &mut ParamStore) -> Result<()> {
        match *self {
            Optimizer::Sgd { lr } => sgd_step(store, lr),
            Optimizer::Adam { lr } => adam_step(store, lr, ADAM_BETA1, ADAM_BETA2, ADAM_EPS),
        }
    }
}

fn check_grads(grads: &[f64]) -> Result<()> {
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::Divergence(
            "non-finite gradient in optimizer step".into(),
        ));
    }
    Ok(())
}

/// p ← p − lr·g, then gradients are cleared.
pub fn sgd_step(store: &mut ParamStore, lr: f64) -> Result<()> {
    let (values, grads, _, _, _) = store.optimizer_state_mut();
    check_grads(grads)?;
    for (p, g) in values.iter_mut().zip(grads.iter_mut()) {
        *p -= lr * *g;
        *g = 0.0;
    }
    Ok(())
}

/// Bias-corrected Adam update; increments the store's step counter and clears
/// gradients.
pub fn adam_step(store: &mut ParamStore, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Result<()> {
    let (values, grads, m1, m2, step) = store.optimizer_state_mut();
    check_grads(grads)?;
    *step += 1;
    let t = *step as i32;
    let bc1 = 1.0 - beta1.powi(t);
    let bc2 = 1.0 - beta2.powi(t);
    for i in 0..values.len() {
        let g = grads[i];
        m1[i] = beta1 * m1[i] + (1.0 - beta1) * g;
        m2[i] = beta2 * m2[i] + (1.0 - beta2) * g * g;
        let m_hat = m1[i] / bc1;
        let v_hat = m2[i] / bc2;
        values[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        grads[i] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store_with(values: &[f64], grads: &[f64]) -> ParamStore {
        let mut store = ParamStore::new();
        let mut vals = values.to_vec().into_iter();
        store
            .register("t", "p", values.len(), |_| vals.next().unwrap())
            .unwrap();
        store.add_grads(grads);
        store
    }

    #[test]
    fn sgd_zero_gradient_is_fixed_point() {
        let mut store = store_with(&[1.0, -2.0], &[0.0, 0.0]);
        sgd_step(&mut store, 0.1).unwrap();
        assert_eq!(store.values(), &[1.0, -2.0]);
    }

    #[test]
    fn sgd_hand_arithmetic() {
        let mut store = store_with(&[1.0], &[0.5]);
        sgd_step(&mut store, 0.1).unwrap();
        assert!((store.values()[0] - 0.95).abs() < 1e-15);
        assert_eq!(store.grads(), &[0.0]);
    }

    #[test]
    fn sgd_two_steps_vs_summed_gradients() {
        // identical gradients: two steps == one step at doubled gradient
        let mut a = store_with(&[1.0], &[0.5]);
        sgd_step(&mut a, 0.1).unwrap();
        a.add_grads(&[0.5]);
        sgd_step(&mut a, 0.1).unwrap();
        let mut b = store_with(&[1.0], &[1.0]);
        sgd_step(&mut b, 0.1).unwrap();
        assert!((a.values()[0] - b.values()[0]).abs() < 1e-15);

        // differing gradients under a nonlinear schedule would not; here the
        // linear rule also matches the summed form by algebra
        let mut c = store_with(&[1.0], &[0.2]);
        sgd_step(&mut c, 0.1).unwrap();
        c.add_grads(&[0.8]);
        sgd_step(&mut c, 0.1).unwrap();
        assert!((c.values()[0] - b.values()[0]).abs() < 1e-15);
    }

    #[test]
    fn adam_zero_gradient_at_step_one_is_fixed_point() {
        let mut store = store_with(&[3.0], &[0.0]);
        adam_step(&mut store, 0.01, ADAM_BETA1, ADAM_BETA2, ADAM_EPS).unwrap();
        assert_eq!(store.values(), &[3.0]);
    }

    #[test]
    fn adam_first_step_magnitude_is_lr() {
        // with constant g, bias correction makes the first update ≈ lr·sign(g)
        let mut store = store_with(&[0.0], &[1.0]);
        adam_step(&mut store, 0.01, ADAM_BETA1, ADAM_BETA2, ADAM_EPS).unwrap();
        assert!((store.values()[0] + 0.01).abs() < 1e-6);
    }

    #[test]
    fn adam_updates_are_odd_in_the_gradient() {
        let mut pos = store_with(&[0.0, 0.0], &[0.7, -0.3]);
        adam_step(&mut pos, 0.01, ADAM_BETA1, ADAM_BETA2, ADAM_EPS).unwrap();
        let mut neg = store_with(&[0.0, 0.0], &[-0.7, 0.3]);
        adam_step(&mut neg, 0.01, ADAM_BETA1, ADAM_BETA2, ADAM_EPS).unwrap();
        for (a, b) in pos.values().iter().zip(neg.values()) {
            assert!((a + b).abs() < 1e-15);
        }
    }

    #[test]
    fn non_finite_gradient_is_divergence() {
        let mut store = store_with(&[0.0], &[f64::NAN]);
        assert!(sgd_step(&mut store, 0.1).is_err());
        let mut store = store_with(&[0.0], &[f64::INFINITY]);
        assert!(adam_step(&mut store, 0.01, ADAM_BETA1, ADAM_BETA2, ADAM_EPS).is_err());
    }
}
