//! Federated fraud-detection laboratory built around two pieces: an LSTM
//! whose gates are variational quantum circuits (simulated as dense
//! statevectors with parameter-shift gradients), and FedRansel, a
//! pseudo-centralized aggregation protocol in which nodes share random
//! parameter subsets and the server averages and re-samples only the common
//! ones. Around those sit a classical LSTM baseline, poisoning and
//! membership-inference attack models, a differential-privacy defense
//! baseline, a preprocessing pipeline with a synthetic transaction generator,
//! and an experiment harness with a CLI.
//!
//! Start with the runnable programs in `examples/`; each demonstrates one
//! capability end to end.

pub mod circuit;
pub mod cli;
pub mod data;
pub mod error;
pub mod experiment;
pub mod federation;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod rng;
pub mod threat;

pub use error::{Error, Result};
