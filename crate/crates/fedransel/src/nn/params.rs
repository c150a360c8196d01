//! Flat registry of named scalar parameters.
//!
//! Every trainable scalar in a model lives here under a stable id of the form
//! `component/tensor/flat_index`. Federation samples, intersects and averages
//! these scalars by id, so two nodes built from the same model config must
//! produce identical id sequences; construction order is the only source of
//! ordering and is fixed by the model builders.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stable name of one scalar parameter: `component/tensor/flat_index`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamId(String);

impl ParamId {
    pub fn new(id: impl Into<String>) -> Self {
        ParamId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Contiguous range of parameters registered as one tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorRef {
    pub(crate) offset: usize,
    pub(crate) len: usize,
}

impl TensorRef {
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Ordered store of named scalar parameters with a gradient accumulator and
/// Adam moment slots per entry.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    ids: Vec<ParamId>,
    values: Vec<f64>,
    grads: Vec<f64>,
    moment1: Vec<f64>,
    moment2: Vec<f64>,
    step: u64,
    index: HashMap<ParamId, usize>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register `len` scalars as `component/tensor/0..len`, initialized by
    /// `init(flat_index)`. Ids must not collide with earlier registrations.
    pub fn register(
        &mut self,
        component: &str,
        tensor: &str,
        len: usize,
        mut init: impl FnMut(usize) -> f64,
    ) -> Result<TensorRef> {
        let offset = self.values.len();
        for i in 0..len {
            let id = ParamId::new(format!("{component}/{tensor}/{i}"));
            if self.index.contains_key(&id) {
                return Err(Error::config(format!("duplicate parameter id {id}")));
            }
            self.index.insert(id.clone(), offset + i);
            self.ids.push(id);
            self.values.push(init(i));
            self.grads.push(0.0);
            self.moment1.push(0.0);
            self.moment2.push(0.0);
        }
        Ok(TensorRef { offset, len })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ids(&self) -> &[ParamId] {
        &self.ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn grads(&self) -> &[f64] {
        &self.grads
    }

    pub fn slice(&self, r: TensorRef) -> &[f64] {
        &self.values[r.offset..r.offset + r.len]
    }

    pub fn slice_mut(&mut self, r: TensorRef) -> &mut [f64] {
        &mut self.values[r.offset..r.offset + r.len]
    }

    pub fn get(&self, id: &ParamId) -> Option<f64> {
        self.index.get(id).map(|&i| self.values[i])
    }

    /// Overwrite one parameter by id; unknown ids are a protocol error since
    /// federation peers must share the id space.
    pub fn set(&mut self, id: &ParamId, value: f64) -> Result<()> {
        match self.index.get(id) {
            Some(&i) => {
                self.values[i] = value;
                Ok(())
            }
            None => Err(Error::Protocol(format!("unknown parameter id {id}"))),
        }
    }

    /// Fresh zeroed buffer sized for gradient accumulation.
    pub fn grad_buffer(&self) -> Vec<f64> {
        vec![0.0; self.values.len()]
    }

    /// Fold an accumulation buffer into the stored gradients.
    pub fn add_grads(&mut self, delta: &[f64]) {
        assert_eq!(delta.len(), self.grads.len(), "gradient buffer length");
        for (g, d) in self.grads.iter_mut().zip(delta) {
            *g += d;
        }
    }

    pub fn zero_grads(&mut self) {
        self.grads.iter_mut().for_each(|g| *g = 0.0);
    }

    pub(crate) fn optimizer_state_mut(
        &mut self,
    ) -> (&mut [f64], &mut [f64], &mut [f64], &mut [f64], &mut u64) {
        (
            &mut self.values,
            &mut self.grads,
            &mut self.moment1,
            &mut self.moment2,
            &mut self.step,
        )
    }

    /// Ordered `(id, value)` pairs; the checkpoint wire format.
    pub fn entries(&self) -> impl Iterator<Item = (&ParamId, f64)> {
        self.ids.iter().zip(self.values.iter().copied())
    }

    pub fn save_checkpoint(&self, path: impl AsRef<Path>) -> Result<()> {
        let pairs: Vec<(&ParamId, f64)> = self.entries().collect();
        let json = serde_json::to_string_pretty(&pairs)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    /// Load values from a checkpoint written by [`save_checkpoint`]. The file
    /// must list exactly this store's ids in registration order, so a store
    /// built from the same model config round-trips to an identical model.
    ///
    /// [`save_checkpoint`]: ParamStore::save_checkpoint
    pub fn load_checkpoint(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let raw = std::fs::read_to_string(path)?;
        let pairs: Vec<(ParamId, f64)> = serde_json::from_str(&raw)?;
        if pairs.len() != self.ids.len() {
            return Err(Error::config(format!(
                "checkpoint has {} parameters, model has {}",
                pairs.len(),
                self.ids.len()
            )));
        }
        for (slot, (id, value)) in self.ids.iter().zip(&pairs) {
            if slot != id {
                return Err(Error::config(format!(
                    "checkpoint id {id} does not match model id {slot}"
                )));
            }
            if !value.is_finite() {
                return Err(Error::config(format!(
                    "non-finite checkpoint value for {id}"
                )));
            }
        }
        for (v, (_, value)) in self.values.iter_mut().zip(&pairs) {
            *v = *value;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_component_tensor_index() {
        let mut store = ParamStore::new();
        let r = store.register("cell/in_map", "weight", 3, |_| 1.5).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(store.ids()[0].as_str(), "cell/in_map/weight/0");
        assert_eq!(store.ids()[2].as_str(), "cell/in_map/weight/2");
        assert_eq!(store.get(&ParamId::new("cell/in_map/weight/1")), Some(1.5));
    }

    #[test]
    fn duplicate_registration_rejected() {
        let mut store = ParamStore::new();
        store.register("a", "w", 2, |_| 0.0).unwrap();
        assert!(store.register("a", "w", 1, |_| 0.0).is_err());
    }

    #[test]
    fn set_unknown_id_is_protocol_error() {
        let mut store = ParamStore::new();
        store.register("a", "w", 1, |_| 0.0).unwrap();
        assert!(store.set(&ParamId::new("b/w/0"), 1.0).is_err());
        assert!(store.set(&ParamId::new("a/w/0"), 2.0).is_ok());
        assert_eq!(store.values()[0], 2.0);
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = std::env::temp_dir().join("fedransel_ckpt_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.json");

        let mut store = ParamStore::new();
        store.register("m", "w", 4, |i| i as f64 * 0.25).unwrap();
        store.save_checkpoint(&path).unwrap();

        let mut other = ParamStore::new();
        other.register("m", "w", 4, |_| 9.0).unwrap();
        other.load_checkpoint(&path).unwrap();
        assert_eq!(store.values(), other.values());

        let mut mismatched = ParamStore::new();
        mismatched.register("m", "b", 4, |_| 0.0).unwrap();
        assert!(mismatched.load_checkpoint(&path).is_err());
    }
}
