//! Dense affine layer over the parameter store.

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::params::{ParamStore, TensorRef};

/// y = Wx + b with W stored row-major as `component/weight` and b as
/// `component/bias`.
#[derive(Debug, Clone, Copy)]
pub struct LinearLayer {
    in_dim: usize,
    out_dim: usize,
    weight: TensorRef,
    bias: TensorRef,
}

impl LinearLayer {
    /// Register a layer under `component`. Weights start uniform in
    /// ±1/sqrt(in_dim), biases at zero.
    pub fn new(
        store: &mut ParamStore,
        component: &str,
        in_dim: usize,
        out_dim: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::config(format!(
                "linear layer {component} must have positive dims, got {in_dim}x{out_dim}"
            )));
        }
        let bound = 1.0 / (in_dim as f64).sqrt();
        let weight = store.register(component, "weight", in_dim * out_dim, |_| {
            rng.gen_range(-bound..bound)
        })?;
        let bias = store.register(component, "bias", out_dim, |_| 0.0)?;
        Ok(LinearLayer {
            in_dim,
            out_dim,
            weight,
            bias,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weight(&self) -> TensorRef {
        self.weight
    }

    pub fn bias(&self) -> TensorRef {
        self.bias
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    pub fn forward(&self, store: &ParamStore, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.in_dim {
            return Err(Error::shape(format!(
                "linear forward expected input of length {}, got {}",
                self.in_dim,
                x.len()
            )));
        }
        let w = store.slice(self.weight);
        let b = store.slice(self.bias);
        let mut y = Vec::with_capacity(self.out_dim);
        for o in 0..self.out_dim {
            let row = &w[o * self.in_dim..(o + 1) * self.in_dim];
            let dot: f64 = row.iter().zip(x).map(|(wi, xi)| wi * xi).sum();
            y.push(dot + b[o]);
        }
        Ok(y)
    }

    /// Accumulate dW, db into `grads` and return dx. `x` must be the input
    /// recorded on the matching forward pass.
    pub fn backward(
        &self,
        store: &ParamStore,
        grads: &mut [f64],
        x: &[f64],
        dy: &[f64],
    ) -> Vec<f64> {
        assert_eq!(x.len(), self.in_dim, "recorded input length");
        assert_eq!(dy.len(), self.out_dim, "upstream length");
        let w = store.slice(self.weight);
        let mut dx = vec![0.0; self.in_dim];
        for o in 0..self.out_dim {
            let g = dy[o];
            let row_off = self.weight.offset() + o * self.in_dim;
            for i in 0..self.in_dim {
                grads[row_off + i] += g * x[i];
                dx[i] += w[o * self.in_dim + i] * g;
            }
            grads[self.bias.offset() + o] += g;
        }
        dx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_layer_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut store = ParamStore::new();
        let layer = LinearLayer::new(&mut store, "id", 2, 2, &mut rng).unwrap();
        let w = store.slice_mut(layer.weight());
        w.copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(layer.forward(&store, &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn hand_computed_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut store = ParamStore::new();
        let layer = LinearLayer::new(&mut store, "l", 2, 1, &mut rng).unwrap();
        store.slice_mut(layer.weight()).copy_from_slice(&[1.0, 1.0]);
        store.slice_mut(layer.bias()).copy_from_slice(&[0.5]);
        assert_eq!(layer.forward(&store, &[2.0, 3.0]).unwrap(), vec![5.5]);
    }

    #[test]
    fn forward_rejects_bad_input_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut store = ParamStore::new();
        let layer = LinearLayer::new(&mut store, "l", 3, 2, &mut rng).unwrap();
        assert!(layer.forward(&store, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut store = ParamStore::new();
        let layer = LinearLayer::new(&mut store, "l", 4, 3, &mut rng).unwrap();
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dy: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let mut grads = store.grad_buffer();
        let dx = layer.backward(&store, &mut grads, &x, &dy);

        // scalar loss = dy . forward(x)
        let loss = |store: &ParamStore, x: &[f64]| -> f64 {
            layer
                .forward(store, x)
                .unwrap()
                .iter()
                .zip(&dy)
                .map(|(y, d)| y * d)
                .sum()
        };
        let h = 1e-6;
        for p in 0..store.len() {
            let mut up = store.clone();
            up.values_mut()[p] += h;
            let mut down = store.clone();
            down.values_mut()[p] -= h;
            let numeric = (loss(&up, &x) - loss(&down, &x)) / (2.0 * h);
            assert!((grads[p] - numeric).abs() < 1e-6, "param {p}");
        }
        for i in 0..x.len() {
            let mut xu = x.clone();
            xu[i] += h;
            let mut xd = x.clone();
            xd[i] -= h;
            let numeric = (loss(&store, &xu) - loss(&store, &xd)) / (2.0 * h);
            assert!((dx[i] - numeric).abs() < 1e-6, "input {i}");
        }
    }
}
