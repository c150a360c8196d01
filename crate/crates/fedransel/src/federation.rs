//! The FedRansel pseudo-centralized aggregation protocol and the FedAvg
//! baseline, simulated over in-process nodes.
//!
//! Per round each node trains locally, samples a random fraction of its
//! parameters (drawn from Uniform(T_l, 1]) and shares them. The server
//! intersects the shared id sets, averages only the common parameters,
//! samples a T_g fraction of those, and broadcasts just that sample; an empty
//! intersection skips the global update. The server never holds a complete
//! model and nodes may disagree on every parameter it never touched.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Window;
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, MetricSet};
use crate::model::{Model, ModelConfig};
use crate::nn::{Optimizer, ParamId, ParamStore};
use crate::rng::{stream, substream};
use crate::threat::{
    dp_defend_slice, flip_window_labels, poison_values, AttackConfig, AttackKind, Defense,
};

/// One node's shared parameter subset with values attached.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SharedSubset {
    pub node_id: usize,
    /// Sorted by id so serialized subsets are byte-stable.
    pub entries: BTreeMap<ParamId, f64>,
}

impl SharedSubset {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Server-side merge state: the common id set, its averages, and the sampled
/// subset that actually goes back to the nodes.
#[derive(Debug, Clone, Default)]
pub struct GlobalMerge {
    pub common: BTreeSet<ParamId>,
    pub averaged: BTreeMap<ParamId, f64>,
    pub broadcast: BTreeMap<ParamId, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Fedransel,
    Fedavg,
}

/// Federation section of an experiment config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FederationConfig {
    #[serde(default = "default_nodes")]
    pub n_nodes: usize,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default = "default_local_epochs")]
    pub local_epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_threshold")]
    pub t_local: f64,
    #[serde(default = "default_threshold")]
    pub t_global: f64,
    #[serde(default)]
    pub aggregation: Aggregation,
}

fn default_nodes() -> usize {
    5
}
fn default_rounds() -> usize {
    5
}
// Table-style defaults: 50 epochs split evenly over 5 rounds.
fn default_local_epochs() -> usize {
    10
}
fn default_batch() -> usize {
    128
}
fn default_threshold() -> f64 {
    0.8
}

impl Default for FederationConfig {
    fn default() -> Self {
        FederationConfig {
            n_nodes: default_nodes(),
            rounds: default_rounds(),
            local_epochs: default_local_epochs(),
            batch_size: default_batch(),
            t_local: default_threshold(),
            t_global: default_threshold(),
            aggregation: Aggregation::Fedransel,
        }
    }
}

impl FederationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::config("federation needs at least 2 nodes"));
        }
        if self.rounds == 0 {
            return Err(Error::config("rounds must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be positive"));
        }
        for (name, t) in [("t_local", self.t_local), ("t_global", self.t_global)] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::config(format!("{name} must be in (0,1], got {t}")));
            }
        }
        Ok(())
    }
}

/// Draw the shared fraction x ~ Uniform(T_l, 1] (T_l = 1 shares everything),
/// then pick ⌈x·|M|⌉ distinct parameters uniformly without replacement.
pub fn sample_local(
    store: &ParamStore,
    node_id: usize,
    t_local: f64,
    rng: &mut impl Rng,
) -> Result<SharedSubset> {
    let x = if t_local >= 1.0 {
        1.0
    } else {
        rng.gen_range(t_local..=1.0)
    };
    sample_local_with_fraction(store, node_id, x, rng)
}

/// [`sample_local`] with the shared fraction fixed instead of drawn.
pub fn sample_local_with_fraction(
    store: &ParamStore,
    node_id: usize,
    x: f64,
    rng: &mut impl Rng,
) -> Result<SharedSubset> {
    if store.is_empty() {
        return Err(Error::config("cannot sample from an empty parameter store"));
    }
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::config(format!(
            "shared fraction must be in (0,1], got {x}"
        )));
    }
    let total = store.len();
    let k = ((x * total as f64).ceil() as usize).min(total);
    let chosen = rand::seq::index::sample(rng, total, k);

    let ids = store.ids();
    let values = store.values();
    let entries: BTreeMap<ParamId, f64> =
        chosen.iter().map(|i| (ids[i].clone(), values[i])).collect();
    Ok(SharedSubset { node_id, entries })
}

/// Intersect the shared id sets and average values over the common ids. An
/// empty intersection is a legal outcome; the caller then skips the round.
pub fn merge_common(subsets: &[SharedSubset]) -> Result<GlobalMerge> {
    if subsets.len() < 2 {
        return Err(Error::Protocol(format!(
            "global merge needs at least 2 subsets, got {}",
            subsets.len()
        )));
    }
    let mut common: BTreeSet<ParamId> = subsets[0].entries.keys().cloned().collect();
    for subset in &subsets[1..] {
        common.retain(|id| subset.entries.contains_key(id));
    }
    let n = subsets.len() as f64;
    let averaged: BTreeMap<ParamId, f64> = common
        .iter()
        .map(|id| {
            let sum: f64 = subsets.iter().map(|s| s.entries[id]).sum();
            (id.clone(), sum / n)
        })
        .collect();
    Ok(GlobalMerge {
        common,
        averaged,
        broadcast: BTreeMap::new(),
    })
}

/// Uniformly sample ⌈T_g·|G_a|⌉ of the averaged parameters into the broadcast
/// set; one draw per round, sent identically to every node.
pub fn sample_global(merge: &mut GlobalMerge, t_global: f64, rng: &mut impl Rng) {
    let total = merge.averaged.len();
    if total == 0 {
        merge.broadcast = BTreeMap::new();
        return;
    }
    let k = ((t_global * total as f64).ceil() as usize).min(total);
    let keys: Vec<&ParamId> = merge.averaged.keys().collect();
    let chosen = rand::seq::index::sample(rng, total, k);
    merge.broadcast = chosen
        .iter()
        .map(|i| (keys[i].clone(), merge.averaged[keys[i]]))
        .collect();
}

/// Overwrite exactly the listed parameters; everything else keeps the node's
/// own value.
pub fn apply_update(store: &mut ParamStore, update: &BTreeMap<ParamId, f64>) -> Result<()> {
    for (id, value) in update {
        store.set(id, *value)?;
    }
    Ok(())
}

/// Replace every node's parameters with the cross-node mean.
pub fn fedavg_round(stores: &mut [ParamStore]) -> Result<()> {
    let first = match stores.first() {
        Some(f) => f,
        None => return Ok(()),
    };
    for other in &stores[1..] {
        if other.ids() != first.ids() {
            return Err(Error::Protocol(
                "federated averaging requires identical parameter id spaces".into(),
            ));
        }
    }
    let mean = mean_values(stores.iter());
    for store in stores.iter_mut() {
        store.values_mut().copy_from_slice(&mean);
    }
    Ok(())
}

fn mean_values<'a>(stores: impl ExactSizeIterator<Item = &'a ParamStore>) -> Vec<f64> {
    let n = stores.len() as f64;
    let mut mean = Vec::new();
    for store in stores {
        if mean.is_empty() {
            mean = vec![0.0; store.len()];
        }
        for (m, v) in mean.iter_mut().zip(store.values()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    mean
}

/// Per-round log record: subset sizes, merge sizes and per-node test metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// |S_i| per node.
    pub shared_sizes: Vec<usize>,
    /// |C|.
    pub common_size: usize,
    /// |G_f|.
    pub broadcast_size: usize,
    /// True when the intersection was empty and no global update ran.
    pub skipped: bool,
    /// Mean training loss per node over the round's batches.
    pub node_losses: Vec<f64>,
    pub node_metrics: Vec<MetricSet>,
}

/// Final state of a federation run.
#[derive(Debug)]
pub struct FederationOutcome {
    pub models: Vec<Model>,
    pub stores: Vec<ParamStore>,
    /// The training windows each node actually used (after any label flip).
    pub node_train: Vec<Vec<Window>>,
    pub rounds: Vec<RoundRecord>,
}

impl FederationOutcome {
    pub fn final_metrics(&self) -> &[MetricSet] {
        &self.rounds.last().expect("at least one round").node_metrics
    }
}

struct NodeState {
    model: Model,
    store: ParamStore,
    train: Vec<Window>,
    train_rng: ChaCha8Rng,
}

fn train_local(
    node: &mut NodeState,
    optimizer: Optimizer,
    epochs: usize,
    batch_size: usize,
) -> Result<f64> {
    let n = node.train.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut loss_sum = 0.0;
    let mut batches = 0usize;
    for _ in 0..epochs {
        order.shuffle(&mut node.train_rng);
        for chunk in order.chunks(batch_size) {
            let batch: Vec<Window> = chunk.iter().map(|&i| node.train[i].clone()).collect();
            let (loss, grads) = node.model.batch_loss_and_grads(&node.store, &batch)?;
            node.store.add_grads(&grads);
            optimizer.step(&mut node.store)?;
            loss_sum += loss;
            batches += 1;
        }
    }
    Ok(if batches == 0 {
        f64::NAN
    } else {
        loss_sum / batches as f64
    })
}

fn evaluate(model: &Model, store: &ParamStore, test: &[Window]) -> Result<MetricSet> {
    let logits: Result<Vec<f64>> = test
        .par_iter()
        .map(|w| model.predict(store, &w.rows))
        .collect();
    let labels: Vec<u8> = test.iter().map(|w| w.label).collect();
    compute_metrics(&logits?, &labels)
}

/// Run the full pseudo-centralized training loop (Fedransel) or the FedAvg
/// baseline, with attack hooks at the protocol points they target: label
/// flipping corrupts malicious nodes' data before training starts, model
/// poisoning perturbs what malicious nodes share each round, and the DP
/// defense clips-and-noises the aggregated FedAvg update at the server.
pub fn run_federation(
    model_cfg: &ModelConfig,
    input_dim: usize,
    node_train: Vec<Vec<Window>>,
    test: &[Window],
    fed: &FederationConfig,
    optimizer: Optimizer,
    attack: &AttackConfig,
    seed: u64,
) -> Result<FederationOutcome> {
    fed.validate()?;
    attack.validate(fed.n_nodes)?;
    if node_train.len() != fed.n_nodes {
        return Err(Error::config(format!(
            "{} node datasets for {} nodes",
            node_train.len(),
            fed.n_nodes
        )));
    }

    // every node starts from the same initial model, as if a server had
    // broadcast it; nodes diverge through local training
    let mut init_rng = substream(seed, stream::MODEL_INIT);
    let mut init_store = ParamStore::new();
    let init_model = Model::build(model_cfg, input_dim, &mut init_store, &mut init_rng)?;

    let mut nodes: Vec<NodeState> = Vec::with_capacity(fed.n_nodes);
    for (i, mut train) in node_train.into_iter().enumerate() {
        if attack.kind == AttackKind::LabelFlip && attack.is_malicious(i) {
            let mut rng = substream(seed, stream::NODE_FLIP + i as u64);
            flip_window_labels(&mut train, attack.flip_prob, &mut rng);
        }
        nodes.push(NodeState {
            model: init_model.clone(),
            store: init_store.clone(),
            train,
            train_rng: substream(seed, stream::NODE_TRAIN + i as u64),
        });
    }

    let mut share_rngs: Vec<ChaCha8Rng> = (0..fed.n_nodes)
        .map(|i| substream(seed, stream::NODE_SHARE + i as u64))
        .collect();
    let mut poison_rngs: Vec<ChaCha8Rng> = (0..fed.n_nodes)
        .map(|i| substream(seed, stream::NODE_POISON + i as u64))
        .collect();
    let mut server_rng = substream(seed, stream::SERVER);

    let mut rounds = Vec::with_capacity(fed.rounds);
    for round in 1..=fed.rounds {
        // reference point for the server-side DP update delta
        let pre_round_mean =
            if fed.aggregation == Aggregation::Fedavg && attack.defense == Defense::Dp {
                Some(mean_values(nodes.iter().map(|n| &n.store)))
            } else {
                None
            };

        let node_losses: Vec<f64> = nodes
            .par_iter_mut()
            .map(|node| train_local(node, optimizer, fed.local_epochs, fed.batch_size))
            .collect::<Result<Vec<f64>>>()
            .map_err(|e| Error::Divergence(format!("round {round}: {e}")))?;

        let record = match fed.aggregation {
            Aggregation::Fedransel => {
                let mut subsets = Vec::with_capacity(fed.n_nodes);
                for (i, node) in nodes.iter().enumerate() {
                    let mut subset = sample_local(&node.store, i, fed.t_local, &mut share_rngs[i])?;
                    if attack.kind == AttackKind::ModelNoise && attack.is_malicious(i) {
                        poison_values(
                            subset.entries.values_mut(),
                            attack.lambda,
                            attack.poisson_centered,
                            &mut poison_rngs[i],
                        );
                    }
                    subsets.push(subset);
                }
                let shared_sizes: Vec<usize> = subsets.iter().map(|s| s.len()).collect();
                let mut merge = merge_common(&subsets)?;
                let skipped = merge.common.is_empty();
                if !skipped {
                    sample_global(&mut merge, fed.t_global, &mut server_rng);
                    for node in nodes.iter_mut() {
                        apply_update(&mut node.store, &merge.broadcast)?;
                    }
                }
                RoundRecord {
                    round,
                    shared_sizes,
                    common_size: merge.common.len(),
                    broadcast_size: merge.broadcast.len(),
                    skipped,
                    node_losses,
                    node_metrics: Vec::new(),
                }
            }
            Aggregation::Fedavg => {
                let full = nodes[0].store.len();
                let mut shared: Vec<Vec<f64>> =
                    nodes.iter().map(|n| n.store.values().to_vec()).collect();
                for (i, values) in shared.iter_mut().enumerate() {
                    if attack.kind == AttackKind::ModelNoise && attack.is_malicious(i) {
                        poison_values(
                            values.iter_mut(),
                            attack.lambda,
                            attack.poisson_centered,
                            &mut poison_rngs[i],
                        );
                    }
                }
                let mut new_global = vec![0.0; full];
                for values in &shared {
                    for (g, v) in new_global.iter_mut().zip(values) {
                        *g += v;
                    }
                }
                for g in &mut new_global {
                    *g /= fed.n_nodes as f64;
                }
                if let Some(pre) = &pre_round_mean {
                    let mut delta: Vec<f64> =
                        new_global.iter().zip(pre).map(|(g, p)| g - p).collect();
                    dp_defend_slice(&mut delta, &attack.dp, &mut server_rng);
                    for ((g, p), d) in new_global.iter_mut().zip(pre).zip(&delta) {
                        *g = p + d;
                    }
                }
                for node in nodes.iter_mut() {
                    node.store.values_mut().copy_from_slice(&new_global);
                }
                RoundRecord {
                    round,
                    shared_sizes: vec![full; fed.n_nodes],
                    common_size: full,
                    broadcast_size: full,
                    skipped: false,
                    node_losses,
                    node_metrics: Vec::new(),
                }
            }
        };

        let node_metrics: Vec<MetricSet> = nodes
            .par_iter()
            .map(|node| evaluate(&node.model, &node.store, test))
            .collect::<Result<Vec<_>>>()?;
        rounds.push(RoundRecord {
            node_metrics,
            ..record
        });
    }

    let mut models = Vec::with_capacity(fed.n_nodes);
    let mut stores = Vec::with_capacity(fed.n_nodes);
    let mut node_train = Vec::with_capacity(fed.n_nodes);
    for node in nodes {
        models.push(node.model);
        stores.push(node.store);
        node_train.push(node.train);
    }
    Ok(FederationOutcome {
        models,
        stores,
        node_train,
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn store_with(values: &[f64]) -> ParamStore {
        let mut store = ParamStore::new();
        let mut iter = values.to_vec().into_iter();
        store
            .register("m", "w", values.len(), |_| iter.next().unwrap())
            .unwrap();
        store
    }

    #[test]
    fn sample_sizes_respect_the_ceiling_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let store = store_with(&vec![1.0; 10]);
        // forced x = 1 via t_local = 1
        let all = sample_local(&store, 0, 1.0, &mut rng).unwrap();
        assert_eq!(all.len(), 10);

        // |M| = 10, x in (0.8, 1]: |S| between ceil(8·(1+eps)) = 9 and 10
        for _ in 0..200 {
            let s = sample_local(&store, 0, 0.8, &mut rng).unwrap();
            assert!(s.len() >= 9 && s.len() <= 10, "|S| = {}", s.len());
        }
    }

    #[test]
    fn sampling_is_uniform_over_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        let store = store_with(&vec![0.0; 100]);
        let trials = 10_000usize;
        let mut counts = BTreeMap::new();
        let mut size_sum = 0usize;
        for _ in 0..trials {
            let s = sample_local(&store, 0, 0.8, &mut rng).unwrap();
            assert!(s.len() >= 81 && s.len() <= 100);
            size_sum += s.len();
            for id in s.entries.keys() {
                *counts.entry(id.clone()).or_insert(0usize) += 1;
            }
        }
        // each id's inclusion probability is E[|S|]/100
        let p = size_sum as f64 / trials as f64 / 100.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for (_, &c) in counts.iter() {
            let freq = c as f64 / trials as f64;
            assert!((freq - p).abs() < 3.0 * sigma + 1e-9, "freq {freq} vs {p}");
        }
        assert_eq!(counts.len(), 100);
    }

    #[test]
    fn merge_is_set_intersection_with_means() {
        let mk = |node_id: usize, pairs: &[(&str, f64)]| SharedSubset {
            node_id,
            entries: pairs
                .iter()
                .map(|(k, v)| (ParamId::new(k.to_string()), *v))
                .collect(),
        };
        let s1 = mk(0, &[("a", 0.0), ("b", 1.0), ("c", 5.0)]);
        let s2 = mk(1, &[("b", 3.0), ("c", 7.0), ("d", 2.0)]);
        let merge = merge_common(&[s1, s2]).unwrap();
        let keys: Vec<&str> = merge.common.iter().map(|k| k.as_str()).collect();
        assert_eq!(keys, vec!["b", "c"]);
        assert_eq!(merge.averaged[&ParamId::new("b")], 2.0);
        assert_eq!(merge.averaged[&ParamId::new("c")], 6.0);
    }

    #[test]
    fn disjoint_subsets_merge_to_empty_common() {
        let mk = |node_id: usize, key: &str| SharedSubset {
            node_id,
            entries: [(ParamId::new(key.to_string()), 1.0)].into_iter().collect(),
        };
        let merge = merge_common(&[mk(0, "a"), mk(1, "b"), mk(2, "c")]).unwrap();
        assert!(merge.common.is_empty());
        assert!(merge.averaged.is_empty());
    }

    #[test]
    fn global_sampling_cardinality_and_uniformity() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let averaged: BTreeMap<ParamId, f64> = (0..5)
            .map(|i| (ParamId::new(format!("p/{i}")), i as f64))
            .collect();

        let mut merge = GlobalMerge {
            common: averaged.keys().cloned().collect(),
            averaged: averaged.clone(),
            broadcast: BTreeMap::new(),
        };
        sample_global(&mut merge, 0.8, &mut rng);
        assert_eq!(merge.broadcast.len(), 4); // ceil(0.8 * 5)

        sample_global(&mut merge, 1.0, &mut rng);
        assert_eq!(merge.broadcast, averaged);

        // uniform inclusion over 10k draws at T_g = 0.8: p = 4/5
        let mut counts: BTreeMap<ParamId, usize> = BTreeMap::new();
        let trials = 10_000;
        for _ in 0..trials {
            sample_global(&mut merge, 0.8, &mut rng);
            for k in merge.broadcast.keys() {
                *counts.entry(k.clone()).or_insert(0) += 1;
            }
        }
        let p = 0.8;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for (_, &c) in &counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - p).abs() < 3.0 * sigma, "freq {freq}");
        }
    }

    #[test]
    fn apply_update_touches_only_listed_entries() {
        let mut store = store_with(&[1.0, 2.0, 3.0]);
        apply_update(&mut store, &BTreeMap::new()).unwrap();
        assert_eq!(store.values(), &[1.0, 2.0, 3.0]);

        let update: BTreeMap<ParamId, f64> = [(ParamId::new("m/w/1"), 9.0)].into_iter().collect();
        apply_update(&mut store, &update).unwrap();
        assert_eq!(store.values(), &[1.0, 9.0, 3.0]);

        let unknown: BTreeMap<ParamId, f64> = [(ParamId::new("m/x/0"), 0.0)].into_iter().collect();
        assert!(apply_update(&mut store, &unknown).is_err());
    }

    #[test]
    fn fedavg_means_and_rejects_mismatched_spaces() {
        let mut stores = vec![store_with(&[0.0, 4.0]), store_with(&[2.0, 0.0])];
        fedavg_round(&mut stores).unwrap();
        assert_eq!(stores[0].values(), &[1.0, 2.0]);
        assert_eq!(stores[1].values(), &[1.0, 2.0]);

        let mut mismatched = vec![store_with(&[0.0]), ParamStore::new()];
        mismatched[1].register("other", "w", 1, |_| 0.0).unwrap();
        assert!(fedavg_round(&mut mismatched).is_err());
    }

    #[test]
    fn forced_full_sharing_equals_fedavg_elementwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(84);
        let mut avg_stores: Vec<ParamStore> = (0..3)
            .map(|_| {
                let values: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
                store_with(&values)
            })
            .collect();
        let mut ransel_stores = avg_stores.clone();

        fedavg_round(&mut avg_stores).unwrap();

        let subsets: Vec<SharedSubset> = ransel_stores
            .iter()
            .enumerate()
            .map(|(i, s)| sample_local(s, i, 1.0, &mut rng).unwrap())
            .collect();
        let mut merge = merge_common(&subsets).unwrap();
        sample_global(&mut merge, 1.0, &mut rng);
        for store in ransel_stores.iter_mut() {
            apply_update(store, &merge.broadcast).unwrap();
        }

        for (a, b) in avg_stores.iter().zip(&ransel_stores) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn containment_chain_holds_on_random_subsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(85);
        let stores: Vec<ParamStore> = (0..4).map(|_| store_with(&vec![1.0; 60])).collect();
        for _ in 0..50 {
            let subsets: Vec<SharedSubset> = stores
                .iter()
                .enumerate()
                .map(|(i, s)| sample_local(s, i, 0.7, &mut rng).unwrap())
                .collect();
            let mut merge = merge_common(&subsets).unwrap();
            sample_global(&mut merge, 0.6, &mut rng);

            assert!(merge
                .broadcast
                .keys()
                .all(|k| merge.averaged.contains_key(k)));
            assert_eq!(
                merge.averaged.keys().cloned().collect::<BTreeSet<_>>(),
                merge.common
            );
            for subset in &subsets {
                assert!(merge.common.iter().all(|k| subset.entries.contains_key(k)));
            }
            if !merge.averaged.is_empty() {
                let expect = (0.6 * merge.averaged.len() as f64).ceil() as usize;
                assert_eq!(merge.broadcast.len(), expect);
            }
        }
    }
}
