//! Synthetic transaction generator for desk-scale runs.
//!
//! Rows are i.i.d. standard-normal feature vectors. The fraud label of row t
//! is driven by a latent score mixing the row's own signal block with the
//! mean of the previous `gen_window − 1` rows' signal blocks, so a window
//! covering those rows carries real sequential signal while any single row in
//! isolation under-determines the label:
//!
//!   score_t = strength · (u·x_t + u·mean(x_{t−1..t−W+1})) / √2,
//!   y_t = 1 iff score_t + ε_t > 0 with ε_t ~ N(0,1).
//!
//! `u` is a fixed unit vector over the first `min(4, d)` features drawn once
//! per dataset. Strength 0 makes labels independent coin flips; large
//! strength makes a linear model on windowed means near-perfect.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::dataset::{ColumnMeta, TabularDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_samples: usize,
    #[serde(default = "default_features")]
    pub n_features: usize,
    #[serde(default = "default_strength")]
    pub signal_strength: f64,
    /// History length the label depends on (including the labelled row).
    #[serde(default = "default_gen_window")]
    pub gen_window: usize,
}

fn default_features() -> usize {
    30
}
fn default_strength() -> f64 {
    1.0
}
fn default_gen_window() -> usize {
    3
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_samples: 2000,
            n_features: default_features(),
            signal_strength: default_strength(),
            gen_window: default_gen_window(),
        }
    }
}

pub fn synth_generate(cfg: &SynthConfig, rng: &mut impl Rng) -> Result<TabularDataset> {
    if cfg.n_features < 2 {
        return Err(Error::config("synthetic data needs at least 2 features"));
    }
    if cfg.n_samples == 0 {
        return Err(Error::config("n_samples must be positive"));
    }
    if cfg.gen_window == 0 {
        return Err(Error::config("gen_window must be positive"));
    }
    let d = cfg.n_features;
    let m = d.min(4);

    let raw: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
    let norm: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    let u: Vec<f64> = raw.iter().map(|x| x / norm).collect();

    let mut features: Vec<Vec<f64>> = Vec::with_capacity(cfg.n_samples);
    let mut labels = Vec::with_capacity(cfg.n_samples);
    for t in 0..cfg.n_samples {
        let row: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();

        let own: f64 = u.iter().zip(&row).map(|(a, b)| a * b).sum();
        let hist_len = (cfg.gen_window - 1).min(t);
        let hist: f64 = if hist_len == 0 {
            0.0
        } else {
            let mut acc = 0.0;
            for back in 1..=hist_len {
                let prev = &features[t - back];
                acc += u.iter().zip(prev).map(|(a, b)| a * b).sum::<f64>();
            }
            acc / hist_len as f64
        };
        let score = cfg.signal_strength * (own + hist) / std::f64::consts::SQRT_2;
        let noise: f64 = StandardNormal.sample(rng);
        labels.push(u8::from(score + noise > 0.0));
        features.push(row);
    }

    let columns = (0..d)
        .map(|i| ColumnMeta {
            name: format!("f{i}"),
            categorical: false,
            levels: vec![],
        })
        .collect();
    Ok(TabularDataset {
        features,
        labels,
        columns,
    })
}
