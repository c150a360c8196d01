//! Attack models and the differential-privacy baseline defense: label
//! flipping on malicious nodes' local data, Poisson noise on shared model
//! parameters, a loss-threshold membership-inference attack, and server-side
//! norm clipping with Gaussian noise.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::data::Window;
use crate::error::{Error, Result};
use crate::metrics::MetricSummary;
use crate::model::Model;
use crate::nn::{bce_single, ParamId, ParamStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    #[default]
    None,
    LabelFlip,
    ModelNoise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Defense {
    #[default]
    None,
    /// Norm-bound clipping plus Gaussian noise on the aggregated update at
    /// the server, over plain federated averaging.
    Dp,
    /// The randomized-subset aggregation protocol itself.
    Fedransel,
}

/// Server-side DP parameters: L2 clip bound and the per-entry Gaussian
/// standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpConfig {
    #[serde(default = "default_norm_bound")]
    pub norm_bound: f64,
    #[serde(default = "default_noise_scale")]
    pub noise_scale: f64,
}

fn default_norm_bound() -> f64 {
    5.0
}
fn default_noise_scale() -> f64 {
    0.2
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig {
            norm_bound: default_norm_bound(),
            noise_scale: default_noise_scale(),
        }
    }
}

impl DpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.norm_bound <= 0.0 || self.noise_scale < 0.0 {
            return Err(Error::config(
                "dp norm_bound must be positive and noise_scale non-negative",
            ));
        }
        Ok(())
    }
}

/// Attack section of an experiment config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackConfig {
    #[serde(default)]
    pub kind: AttackKind,
    #[serde(default = "default_flip_prob")]
    pub flip_prob: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Center the Poisson perturbation at zero (subtract lambda). Raw mode
    /// adds the nonnegative draw unchanged.
    #[serde(default = "default_true")]
    pub poisson_centered: bool,
    #[serde(default = "default_malicious")]
    pub malicious_nodes: Vec<usize>,
    #[serde(default)]
    pub defense: Defense,
    #[serde(default)]
    pub dp: DpConfig,
}

fn default_flip_prob() -> f64 {
    0.8
}
fn default_lambda() -> f64 {
    0.1
}
fn default_true() -> bool {
    true
}
fn default_malicious() -> Vec<usize> {
    vec![0, 1]
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            kind: AttackKind::None,
            flip_prob: default_flip_prob(),
            lambda: default_lambda(),
            poisson_centered: true,
            malicious_nodes: default_malicious(),
            defense: Defense::None,
            dp: DpConfig::default(),
        }
    }
}

impl AttackConfig {
    pub fn none() -> Self {
        AttackConfig::default()
    }

    pub fn validate(&self, n_nodes: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.flip_prob) {
            return Err(Error::config("flip_prob must be in [0,1]"));
        }
        if self.lambda <= 0.0 {
            return Err(Error::config("lambda must be positive"));
        }
        self.dp.validate()?;
        if self.kind != AttackKind::None {
            if self.malicious_nodes.iter().any(|&m| m >= n_nodes) {
                return Err(Error::config("malicious node id out of range"));
            }
            if self.malicious_nodes.len() >= n_nodes {
                return Err(Error::config("at least one node must remain honest"));
            }
        }
        Ok(())
    }

    pub fn is_malicious(&self, node: usize) -> bool {
        self.kind != AttackKind::None && self.malicious_nodes.contains(&node)
    }
}

/// Independently invert each label with probability `flip_prob`.
pub fn flip_labels(labels: &mut [u8], flip_prob: f64, rng: &mut impl Rng) {
    for y in labels.iter_mut() {
        if rng.gen_bool(flip_prob) {
            *y = 1 - *y;
        }
    }
}

/// Flip the labels of a window partition in place.
pub fn flip_window_labels(windows: &mut [Window], flip_prob: f64, rng: &mut impl Rng) {
    for w in windows.iter_mut() {
        if rng.gen_bool(flip_prob) {
            w.label = 1 - w.label;
        }
    }
}

/// Add Poisson(lambda) noise to each value; centered mode subtracts lambda so
/// the perturbation is zero-mean with variance lambda.
pub fn poison_values<'a>(
    values: impl IntoIterator<Item = &'a mut f64>,
    lambda: f64,
    centered: bool,
    rng: &mut impl Rng,
) {
    let dist = Poisson::new(lambda).expect("lambda > 0");
    let shift = if centered { lambda } else { 0.0 };
    for v in values {
        let draw: f64 = dist.sample(rng);
        *v += draw - shift;
    }
}

/// Perturb every parameter of a store with Poisson noise.
pub fn poison_params(store: &mut ParamStore, lambda: f64, centered: bool, rng: &mut impl Rng) {
    poison_values(store.values_mut().iter_mut(), lambda, centered, rng);
}

/// Clip the update to the L2 ball of radius `norm_bound`, then add i.i.d.
/// Gaussian(0, noise_scale^2) per entry.
pub fn dp_defend_slice(update: &mut [f64], cfg: &DpConfig, rng: &mut impl Rng) {
    let norm: f64 = update.iter().map(|d| d * d).sum::<f64>().sqrt();
    if norm > cfg.norm_bound {
        let scale = cfg.norm_bound / norm;
        for d in update.iter_mut() {
            *d *= scale;
        }
    }
    if cfg.noise_scale > 0.0 {
        let noise = Normal::new(0.0, cfg.noise_scale).expect("valid scale");
        for d in update.iter_mut() {
            *d += noise.sample(rng);
        }
    }
}

/// Map form of [`dp_defend_slice`], iterating entries in key order.
pub fn dp_defend(
    update: &mut BTreeMap<ParamId, f64>,
    cfg: &DpConfig,
    rng: &mut impl Rng,
) -> Result<()> {
    if update.is_empty() {
        return Err(Error::config("dp_defend on an empty update"));
    }
    let mut values: Vec<f64> = update.values().copied().collect();
    dp_defend_slice(&mut values, cfg, rng);
    for (slot, v) in update.values_mut().zip(values) {
        *slot = v;
    }
    Ok(())
}

/// Outcome of a loss-threshold membership-inference attack.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InferenceReport {
    /// Balanced accuracy on the held-out evaluation half.
    pub attack_accuracy: f64,
    /// Loss threshold chosen on the calibration half.
    pub threshold: f64,
    pub member_loss_mean: f64,
    pub nonmember_loss_mean: f64,
    pub n_calibration: usize,
    pub n_eval: usize,
}

/// Loss-threshold attack on precomputed per-sample losses. Each pool is
/// shuffled and split 50/50 into calibration and evaluation halves; the
/// threshold maximizing balanced accuracy on calibration is scored on the
/// evaluation half.
pub fn membership_inference_from_losses(
    member_losses: &[f64],
    nonmember_losses: &[f64],
    rng: &mut impl Rng,
) -> Result<InferenceReport> {
    let n = member_losses.len().min(nonmember_losses.len());
    if n < 50 {
        return Err(Error::InsufficientData(format!(
            "membership inference needs at least 50 samples per side, got {n}"
        )));
    }
    use rand::seq::SliceRandom;
    let mut members = member_losses.to_vec();
    let mut nonmembers = nonmember_losses.to_vec();
    members.shuffle(rng);
    nonmembers.shuffle(rng);
    members.truncate(n);
    nonmembers.truncate(n);

    let half = n / 2;
    let (cal_m, eval_m) = members.split_at(half);
    let (cal_n, eval_n) = nonmembers.split_at(half);

    // candidate thresholds: midpoints of the pooled sorted calibration losses
    let mut pooled: Vec<f64> = cal_m.iter().chain(cal_n.iter()).copied().collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pooled.dedup();
    let mut candidates = Vec::with_capacity(pooled.len() + 1);
    candidates.push(pooled[0] - 1.0);
    for pair in pooled.windows(2) {
        candidates.push((pair[0] + pair[1]) / 2.0);
    }
    candidates.push(pooled[pooled.len() - 1] + 1.0);

    // members are predicted by low loss
    let balanced = |threshold: f64, ms: &[f64], ns: &[f64]| -> f64 {
        let tpr = ms.iter().filter(|&&l| l < threshold).count() as f64 / ms.len() as f64;
        let tnr = ns.iter().filter(|&&l| l >= threshold).count() as f64 / ns.len() as f64;
        (tpr + tnr) / 2.0
    };
    let mut best = (candidates[0], 0.0);
    for &t in &candidates {
        let acc = balanced(t, cal_m, cal_n);
        if acc > best.1 {
            best = (t, acc);
        }
    }

    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    Ok(InferenceReport {
        attack_accuracy: balanced(best.0, eval_m, eval_n),
        threshold: best.0,
        member_loss_mean: mean(&members),
        nonmember_loss_mean: mean(&nonmembers),
        n_calibration: 2 * half,
        n_eval: (n - half) * 2,
    })
}

/// Loss-threshold attack against a trained model: members come from the
/// training pool, non-members from held-out data.
pub fn membership_inference(
    model: &Model,
    store: &ParamStore,
    members: &[Window],
    nonmembers: &[Window],
    rng: &mut impl Rng,
) -> Result<InferenceReport> {
    let losses = |pool: &[Window]| -> Result<Vec<f64>> {
        pool.iter()
            .map(|w| Ok(bce_single(model.predict(store, &w.rows)?, w.label)))
            .collect()
    };
    let member_losses = losses(members)?;
    let nonmember_losses = losses(nonmembers)?;
    membership_inference_from_losses(&member_losses, &nonmember_losses, rng)
}

/// One row of a Fig.-8-style degradation table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegradationRow {
    pub metric: String,
    pub clean: f64,
    pub attacked: f64,
    /// 100·(attacked − clean)/clean; negative means degradation.
    pub pct_change: f64,
}

/// Percentage change of each metric from clean to attacked.
pub fn degradation_report(
    clean: &MetricSummary,
    attacked: &MetricSummary,
) -> Result<Vec<DegradationRow>> {
    MetricSummary::NAMES
        .iter()
        .map(|&name| {
            let c = clean.get(name).expect("known metric");
            let a = attacked.get(name).expect("known metric");
            if c == 0.0 {
                return Err(Error::Metric(format!(
                    "percentage change undefined: clean {name} is zero"
                )));
            }
            Ok(DegradationRow {
                metric: name.to_string(),
                clean: c,
                attacked: a,
                pct_change: 100.0 * (a - c) / c,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flip_prob_zero_and_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let mut labels = vec![0, 1, 1, 0, 1];
        let original = labels.clone();
        flip_labels(&mut labels, 0.0, &mut rng);
        assert_eq!(labels, original);
        flip_labels(&mut labels, 1.0, &mut rng);
        let inverted: Vec<u8> = original.iter().map(|y| 1 - y).collect();
        assert_eq!(labels, inverted);
    }

    #[test]
    fn flip_count_is_binomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let n = 10_000;
        let mut labels = vec![0u8; n];
        flip_labels(&mut labels, 0.8, &mut rng);
        let flipped = labels.iter().filter(|&&y| y == 1).count() as f64;
        let expected = 0.8 * n as f64;
        let sigma = (n as f64 * 0.8 * 0.2).sqrt();
        assert!(
            (flipped - expected).abs() < 3.0 * sigma,
            "flipped {flipped}"
        );
    }

    #[test]
    fn raw_poisson_at_tiny_lambda_rarely_fires() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let mut values = vec![1.0f64; 10_000];
        poison_values(values.iter_mut(), 1e-6, false, &mut rng);
        let unchanged = values.iter().filter(|&&v| v == 1.0).count();
        assert!(unchanged as f64 / 10_000.0 > 0.99);
    }

    #[test]
    fn centered_poisson_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        let n = 100_000usize;
        let mut values = vec![0.0f64; n];
        poison_values(values.iter_mut(), 0.1, true, &mut rng);

        let mean = values.iter().sum::<f64>() / n as f64;
        let sigma_mean = (0.1f64 / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * sigma_mean, "mean {mean}");

        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        // Var(sample variance) ~ (mu4 - var^2)/n with mu4 = lambda(1+3lambda)
        let mu4 = 0.1 * (1.0 + 0.3);
        let sigma_var = ((mu4 - 0.01) / n as f64).sqrt();
        assert!((var - 0.1).abs() < 3.0 * sigma_var, "var {var}");
    }

    #[test]
    fn dp_defend_inside_ball_without_noise_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        let cfg = DpConfig {
            norm_bound: 5.0,
            noise_scale: 0.0,
        };
        let mut update = vec![1.2, -1.6]; // norm 2
        dp_defend_slice(&mut update, &cfg, &mut rng);
        assert_eq!(update, vec![1.2, -1.6]);
    }

    #[test]
    fn dp_defend_clips_to_exactly_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(76);
        let cfg = DpConfig {
            norm_bound: 5.0,
            noise_scale: 0.0,
        };
        let mut update = vec![6.0, 8.0]; // norm 10
        dp_defend_slice(&mut update, &cfg, &mut rng);
        assert_eq!(update, vec![3.0, 4.0]);
        let norm: f64 = update.iter().map(|d| d * d).sum::<f64>().sqrt();
        assert!(norm <= 5.0 + 1e-9);
    }

    #[test]
    fn dp_noise_std_matches_configuration() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let cfg = DpConfig {
            norm_bound: 1e12,
            noise_scale: 0.2,
        };
        let n = 100_000usize;
        let mut update = vec![0.0f64; n];
        dp_defend_slice(&mut update, &cfg, &mut rng);
        let mean = update.iter().sum::<f64>() / n as f64;
        let std =
            (update.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt();
        let sigma_std = 0.2 / (2.0 * (n as f64 - 1.0)).sqrt();
        assert!((std - 0.2).abs() < 3.0 * sigma_std, "std {std}");
    }

    #[test]
    fn separable_losses_give_perfect_attack() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let members = vec![0.1; 100];
        let nonmembers = vec![0.9; 100];
        let report = membership_inference_from_losses(&members, &nonmembers, &mut rng).unwrap();
        assert_eq!(report.attack_accuracy, 1.0);
    }

    #[test]
    fn identical_loss_distributions_are_chance_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let members: Vec<f64> = (0..500).map(|_| rng.gen_range(0.0..1.0)).collect();
        let nonmembers: Vec<f64> = (0..500).map(|_| rng.gen_range(0.0..1.0)).collect();
        let report = membership_inference_from_losses(&members, &nonmembers, &mut rng).unwrap();
        assert!(
            (report.attack_accuracy - 0.5).abs() < 0.05,
            "{}",
            report.attack_accuracy
        );
    }

    #[test]
    fn undersized_pools_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(80);
        let small = vec![0.5; 49];
        let big = vec![0.5; 100];
        assert!(membership_inference_from_losses(&small, &big, &mut rng).is_err());
    }

    #[test]
    fn degradation_arithmetic() {
        let clean = MetricSummary {
            accuracy: 0.90,
            recall: 0.88,
            auc: 0.94,
        };
        let attacked = MetricSummary {
            accuracy: 0.84,
            recall: 0.88,
            auc: 0.89,
        };
        let rows = degradation_report(&clean, &attacked).unwrap();
        assert_eq!(rows.len(), 3);
        assert!((rows[0].pct_change + 6.666_666_666_666_667).abs() < 1e-9);
        assert_eq!(rows[1].pct_change, 0.0);
        assert!((rows[2].pct_change + 5.319_148_936_170_213).abs() < 1e-9);
    }

    #[test]
    fn zero_clean_metric_is_undefined() {
        let clean = MetricSummary {
            accuracy: 0.0,
            recall: 0.5,
            auc: 0.5,
        };
        let attacked = MetricSummary {
            accuracy: 0.1,
            recall: 0.5,
            auc: 0.5,
        };
        assert!(degradation_report(&clean, &attacked).is_err());
    }
}
