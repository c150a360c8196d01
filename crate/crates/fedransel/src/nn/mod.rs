//! Minimal dense neural-network substrate: the named parameter registry the
//! federation protocol samples from, linear layers, BCE-with-logits, and the
//! SGD/Adam optimizers.

mod linear;
mod loss;
mod optim;
mod params;

pub use linear::LinearLayer;
pub use loss::{bce_single, bce_with_logits, sigmoid, LossValue};
pub use optim::{adam_step, sgd_step, Optimizer, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use params::{ParamId, ParamStore, TensorRef};
