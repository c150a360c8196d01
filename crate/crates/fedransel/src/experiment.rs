//! Experiment orchestration: one declarative config drives data preparation,
//! federated training with attack hooks, metric evaluation, hyperparameter
//! sweeps and model/defense comparisons, all emitted as stable JSON/CSV.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{prepare, DataConfig, Window};
use crate::error::{Error, Result};
use crate::federation::{
    run_federation, Aggregation, FederationConfig, FederationOutcome, RoundRecord,
};
use crate::metrics::{mean_summary, median, MetricSet, MetricSummary};
use crate::model::{matched_lstm_hidden, ModelConfig, ModelKind, QlstmModel};
use crate::nn::Optimizer;
use crate::rng::{stream, substream};
use crate::threat::{
    degradation_report, membership_inference, AttackConfig, AttackKind, Defense, InferenceReport,
};

/// Full declarative description of one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub data: DataConfig,
    #[serde(default)]
    pub federation: FederationConfig,
    #[serde(default = "default_optimizer")]
    pub optimizer: Optimizer,
    #[serde(default)]
    pub attack: AttackConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn default_optimizer() -> Optimizer {
    Optimizer::Adam { lr: 0.01 }
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3]
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let raw = std::fs::read_to_string(&path).map_err(|e| {
            Error::config(format!(
                "cannot read config {}: {e}",
                path.as_ref().display()
            ))
        })?;
        let cfg: ExperimentConfig = serde_json::from_str(&raw)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.federation.validate()?;
        self.attack.validate(self.federation.n_nodes)?;
        if self.seeds.is_empty() {
            return Err(Error::config("seeds must be nonempty"));
        }
        match (self.attack.defense, self.federation.aggregation) {
            (Defense::Fedransel, Aggregation::Fedavg) => Err(Error::config(
                "defense 'fedransel' requires aggregation 'fedransel'",
            )),
            (Defense::Dp, Aggregation::Fedransel) => Err(Error::config(
                "defense 'dp' applies to the fedavg aggregation path",
            )),
            _ => Ok(()),
        }
    }

    /// Stable hex key for cache files: FNV-1a over the canonical JSON form.
    pub fn cache_key(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for b in canon.as_bytes() {
            hash ^= u64::from(*b);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }
}

/// Result of one seed: final per-node metrics on the shared test split, their
/// mean, and the mean restricted to honest nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub per_node: Vec<MetricSet>,
    pub mean: MetricSummary,
    pub honest_mean: MetricSummary,
    #[serde(skip)]
    pub rounds: Vec<RoundRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub param_count: usize,
    pub input_dim: usize,
    pub runs: Vec<SeedRun>,
    /// Mean over seeds of the per-seed node means.
    pub mean: MetricSummary,
    /// Per-metric median over seeds of the per-seed node means.
    pub median: MetricSummary,
}

fn summarize_nodes(metrics: &[MetricSet], honest: &BTreeSet<usize>) -> MetricSummary {
    let honest_sets: Vec<&MetricSet> = metrics
        .iter()
        .enumerate()
        .filter(|(i, _)| honest.contains(i))
        .map(|(_, m)| m)
        .collect();
    mean_summary(honest_sets.into_iter())
}

/// Run one seed end to end; returns the summary and the raw outcome (models,
/// stores and the per-node training data actually used).
pub fn run_single(cfg: &ExperimentConfig, seed: u64) -> Result<(SeedRun, FederationOutcome)> {
    cfg.validate()?;
    let mut data_rng = substream(seed, stream::DATA);
    let prepared = prepare(
        &cfg.data,
        cfg.model.seq_len,
        cfg.federation.n_nodes,
        &mut data_rng,
    )?;

    let node_train: Vec<Vec<Window>> = (0..cfg.federation.n_nodes)
        .map(|i| prepared.client_windows(i))
        .collect();
    let test = prepared.test_windows();

    let outcome = run_federation(
        &cfg.model,
        prepared.input_dim,
        node_train,
        &test,
        &cfg.federation,
        cfg.optimizer,
        &cfg.attack,
        seed,
    )?;

    let per_node = outcome.final_metrics().to_vec();
    let all: BTreeSet<usize> = (0..cfg.federation.n_nodes).collect();
    let honest: BTreeSet<usize> = if cfg.attack.kind == AttackKind::None {
        all.clone()
    } else {
        all.difference(&cfg.attack.malicious_nodes.iter().copied().collect())
            .copied()
            .collect()
    };

    let run = SeedRun {
        seed,
        mean: summarize_nodes(&per_node, &all),
        honest_mean: summarize_nodes(&per_node, &honest),
        per_node,
        rounds: outcome.rounds.clone(),
    };
    Ok((run, outcome))
}

/// Run every configured seed and aggregate, keeping each seed's raw outcome
/// (models, stores, node data) for callers that need them.
pub fn run_experiment_full(
    cfg: &ExperimentConfig,
) -> Result<(ExperimentResult, Vec<FederationOutcome>)> {
    let mut runs = Vec::with_capacity(cfg.seeds.len());
    let mut outcomes = Vec::with_capacity(cfg.seeds.len());
    let mut param_count = 0;
    let mut input_dim = 0;
    for &seed in &cfg.seeds {
        let (run, outcome) = run_single(cfg, seed)?;
        param_count = outcome.stores[0].len();
        input_dim = outcome.node_train[0][0].rows[0].len();
        runs.push(run);
        outcomes.push(outcome);
    }

    let mean = MetricSummary {
        accuracy: runs.iter().map(|r| r.mean.accuracy).sum::<f64>() / runs.len() as f64,
        recall: runs.iter().map(|r| r.mean.recall).sum::<f64>() / runs.len() as f64,
        auc: runs.iter().map(|r| r.mean.auc).sum::<f64>() / runs.len() as f64,
    };
    let median_of = |pick: fn(&SeedRun) -> f64| -> f64 {
        let mut values: Vec<f64> = runs.iter().map(pick).collect();
        median(&mut values)
    };
    let median = MetricSummary {
        accuracy: median_of(|r| r.mean.accuracy),
        recall: median_of(|r| r.mean.recall),
        auc: median_of(|r| r.mean.auc),
    };
    Ok((
        ExperimentResult {
            param_count,
            input_dim,
            runs,
            mean,
            median,
        },
        outcomes,
    ))
}

/// Run every configured seed and aggregate.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_full(cfg).map(|(result, _)| result)
}

/// results.json payload: the config echo plus the aggregated result.
#[derive(Debug, Serialize)]
struct ResultsFile<'a> {
    config: &'a ExperimentConfig,
    result: &'a ExperimentResult,
}

#[derive(Debug, Serialize)]
struct RoundLogLine<'a> {
    seed: u64,
    #[serde(flatten)]
    record: &'a RoundRecord,
}

/// Write results.json and round_log.jsonl under `out_dir`. Output bytes are a
/// pure function of (config, seeds), so reruns are byte-identical.
pub fn write_experiment_outputs(
    out_dir: impl AsRef<Path>,
    cfg: &ExperimentConfig,
    result: &ExperimentResult,
) -> Result<()> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir)?;

    let results = serde_json::to_string_pretty(&ResultsFile {
        config: cfg,
        result,
    })?;
    std::fs::write(dir.join("results.json"), results + "\n")?;

    let mut log = String::new();
    for run in &result.runs {
        for record in &run.rounds {
            log.push_str(&serde_json::to_string(&RoundLogLine {
                seed: run.seed,
                record,
            })?);
            log.push('\n');
        }
    }
    std::fs::write(dir.join("round_log.jsonl"), log)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    NQubits,
    Depth,
    SeqLen,
    NNodes,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n_qubits" => Ok(SweepParam::NQubits),
            "depth" => Ok(SweepParam::Depth),
            "seq_len" => Ok(SweepParam::SeqLen),
            "n_nodes" => Ok(SweepParam::NNodes),
            other => Err(Error::config(format!(
                "unknown sweep parameter '{other}' (expected n_qubits, depth, seq_len or n_nodes)"
            ))),
        }
    }
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::NQubits => "n_qubits",
            SweepParam::Depth => "depth",
            SweepParam::SeqLen => "seq_len",
            SweepParam::NNodes => "n_nodes",
        }
    }

    pub fn apply(&self, cfg: &mut ExperimentConfig, value: usize) {
        match self {
            SweepParam::NQubits => cfg.model.n_qubits = value,
            SweepParam::Depth => cfg.model.depth = value,
            SweepParam::SeqLen => cfg.model.seq_len = value,
            SweepParam::NNodes => cfg.federation.n_nodes = value,
        }
    }
}

/// One swept hyperparameter over a value list; everything else fixed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub values: Vec<usize>,
    pub base: ExperimentConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: usize,
    pub seeds: usize,
    pub failures: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_recall: f64,
    pub std_recall: f64,
    pub mean_auc: f64,
    pub std_auc: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// One row per swept value, aggregated over seeds. Individual run failures
/// are counted and skipped; the sweep continues.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.values.is_empty() {
        return Err(Error::config("sweep needs at least one value"));
    }
    let mut rows = Vec::with_capacity(spec.values.len());
    for &value in &spec.values {
        let mut cfg = spec.base.clone();
        spec.parameter.apply(&mut cfg, value);
        let mut acc = Vec::new();
        let mut rec = Vec::new();
        let mut auc = Vec::new();
        let mut failures = 0usize;
        for &seed in &cfg.seeds.clone() {
            match run_single(&cfg, seed) {
                Ok((run, _)) => {
                    acc.push(run.mean.accuracy);
                    rec.push(run.mean.recall);
                    auc.push(run.mean.auc);
                }
                Err(e) => {
                    eprintln!(
                        "sweep {}={value} seed {seed} failed: {e}",
                        spec.parameter.name()
                    );
                    failures += 1;
                }
            }
        }
        let (mean_accuracy, std_accuracy) = mean_std(&acc);
        let (mean_recall, std_recall) = mean_std(&rec);
        let (mean_auc, std_auc) = mean_std(&auc);
        rows.push(SweepRow {
            parameter: spec.parameter.name().to_string(),
            value,
            seeds: acc.len(),
            failures,
            mean_accuracy,
            std_accuracy,
            mean_recall,
            std_recall,
            mean_auc,
            std_auc,
        });
    }
    Ok(rows)
}

pub fn write_sweep_csv(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// One line of the model/defense comparison table (clean metrics).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareRow {
    pub model: String,
    pub defense: String,
    pub accuracy: f64,
    pub recall: f64,
    pub auc: f64,
}

/// One line of the degradation table: metric change under attack for one
/// model/defense combination, honest-node medians over seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegradationLine {
    pub model: String,
    pub defense: String,
    pub metric: String,
    pub clean: f64,
    pub attacked: f64,
    pub pct_change: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareOutput {
    pub table: Vec<CompareRow>,
    pub degradation: Vec<DegradationLine>,
}

fn defense_name(d: Defense) -> &'static str {
    match d {
        Defense::None => "none",
        Defense::Dp => "dp",
        Defense::Fedransel => "fedransel",
    }
}

fn model_name(k: ModelKind) -> &'static str {
    match k {
        ModelKind::Qlstm => "qlstm",
        ModelKind::Lstm => "lstm",
    }
}

fn wire_defense(cfg: &mut ExperimentConfig, defense: Defense) {
    cfg.attack.defense = defense;
    cfg.federation.aggregation = match defense {
        Defense::Fedransel => Aggregation::Fedransel,
        Defense::Dp | Defense::None => Aggregation::Fedavg,
    };
}

/// Median over seeds of the per-seed honest-node mean for each metric.
fn honest_median(runs: &[SeedRun]) -> MetricSummary {
    let pick = |f: fn(&SeedRun) -> f64, runs: &[SeedRun]| -> f64 {
        let mut values: Vec<f64> = runs.iter().map(f).collect();
        median(&mut values)
    };
    MetricSummary {
        accuracy: pick(|r| r.honest_mean.accuracy, runs),
        recall: pick(|r| r.honest_mean.recall, runs),
        auc: pick(|r| r.honest_mean.auc, runs),
    }
}

/// Evaluate {qlstm, lstm} × {none, fedransel, dp}: clean metrics for the
/// comparison table and, when the base config names an attack, clean-vs-
/// attacked degradation per combination. The classical baseline's hidden size
/// is chosen so its parameter count matches the QLSTM configuration.
pub fn compare_models(base: &ExperimentConfig) -> Result<CompareOutput> {
    base.validate()?;
    let input_dim = {
        let mut rng = substream(base.seeds[0], stream::DATA);
        prepare(
            &base.data,
            base.model.seq_len,
            base.federation.n_nodes,
            &mut rng,
        )?
        .input_dim
    };
    let qlstm_params = QlstmModel::count_params(
        input_dim,
        base.model.hidden_dim,
        base.model.n_qubits,
        base.model.depth,
    );
    let lstm_hidden = matched_lstm_hidden(input_dim, base.model.seq_len, qlstm_params);

    let mut table = Vec::new();
    let mut degradation = Vec::new();
    for kind in [ModelKind::Qlstm, ModelKind::Lstm] {
        for defense in [Defense::None, Defense::Fedransel, Defense::Dp] {
            let mut clean_cfg = base.clone();
            clean_cfg.model.kind = kind;
            if kind == ModelKind::Lstm {
                clean_cfg.model.hidden_dim = lstm_hidden;
            }
            wire_defense(&mut clean_cfg, defense);
            clean_cfg.attack.kind = AttackKind::None;
            let clean = run_experiment(&clean_cfg)?;
            table.push(CompareRow {
                model: model_name(kind).to_string(),
                defense: defense_name(defense).to_string(),
                accuracy: clean.mean.accuracy,
                recall: clean.mean.recall,
                auc: clean.mean.auc,
            });

            if base.attack.kind != AttackKind::None {
                let mut attacked_cfg = clean_cfg.clone();
                attacked_cfg.attack = base.attack.clone();
                attacked_cfg.attack.defense = defense;
                wire_defense(&mut attacked_cfg, defense);
                let attacked = run_experiment(&attacked_cfg)?;
                let clean_med = honest_median(&clean.runs);
                let attacked_med = honest_median(&attacked.runs);
                for row in degradation_report(&clean_med, &attacked_med)? {
                    degradation.push(DegradationLine {
                        model: model_name(kind).to_string(),
                        defense: defense_name(defense).to_string(),
                        metric: row.metric,
                        clean: row.clean,
                        attacked: row.attacked,
                        pct_change: row.pct_change,
                    });
                }
            }
        }
    }
    Ok(CompareOutput { table, degradation })
}

pub fn write_compare_csv(dir: impl AsRef<Path>, output: &CompareOutput) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut writer = csv::Writer::from_path(dir.join("comparison.csv"))?;
    for row in &output.table {
        writer.serialize(row)?;
    }
    writer.flush()?;

    let mut writer = csv::Writer::from_path(dir.join("degradation.csv"))?;
    for row in &output.degradation {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Membership-inference evaluation of one seed's trained nodes: members are
/// drawn from the union of all nodes' training windows, non-members from the
/// test split, and each node's model is attacked in turn.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedInference {
    pub seed: u64,
    pub per_node: Vec<InferenceReport>,
    pub mean_attack_accuracy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InferenceSummary {
    pub per_seed: Vec<SeedInference>,
    pub mean_attack_accuracy: f64,
    pub median_attack_accuracy: f64,
}

pub fn membership_eval(cfg: &ExperimentConfig) -> Result<InferenceSummary> {
    let mut per_seed = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let (_, outcome) = run_single(cfg, seed)?;
        let mut data_rng = substream(seed, stream::DATA);
        let prepared = prepare(
            &cfg.data,
            cfg.model.seq_len,
            cfg.federation.n_nodes,
            &mut data_rng,
        )?;
        let members: Vec<Window> = outcome.node_train.iter().flatten().cloned().collect();
        let nonmembers = prepared.test_windows();

        let mut per_node = Vec::with_capacity(outcome.models.len());
        for (i, (model, store)) in outcome.models.iter().zip(&outcome.stores).enumerate() {
            let mut rng = substream(seed, stream::INFERENCE + i as u64);
            per_node.push(membership_inference(
                model,
                store,
                &members,
                &nonmembers,
                &mut rng,
            )?);
        }
        let mean_attack_accuracy =
            per_node.iter().map(|r| r.attack_accuracy).sum::<f64>() / per_node.len() as f64;
        per_seed.push(SeedInference {
            seed,
            per_node,
            mean_attack_accuracy,
        });
    }
    let mut means: Vec<f64> = per_seed.iter().map(|s| s.mean_attack_accuracy).collect();
    let mean = means.iter().sum::<f64>() / means.len() as f64;
    Ok(InferenceSummary {
        per_seed,
        mean_attack_accuracy: mean,
        median_attack_accuracy: median(&mut means),
    })
}

/// Degradation of the configured attack against the configured defense, plus
/// a membership-inference report on the clean system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackEvalOutput {
    pub degradation: Vec<DegradationLine>,
    pub inference: InferenceSummary,
}

pub fn attack_eval(cfg: &ExperimentConfig) -> Result<AttackEvalOutput> {
    if cfg.attack.kind == AttackKind::None {
        return Err(Error::config(
            "attack-eval needs attack.kind set to label_flip or model_noise",
        ));
    }
    let mut clean_cfg = cfg.clone();
    clean_cfg.attack.kind = AttackKind::None;
    let clean = run_experiment(&clean_cfg)?;
    let attacked = run_experiment(cfg)?;

    let clean_med = honest_median(&clean.runs);
    let attacked_med = honest_median(&attacked.runs);
    let degradation = degradation_report(&clean_med, &attacked_med)?
        .into_iter()
        .map(|row| DegradationLine {
            model: model_name(cfg.model.kind).to_string(),
            defense: defense_name(cfg.attack.defense).to_string(),
            metric: row.metric,
            clean: row.clean,
            attacked: row.attacked,
            pct_change: row.pct_change,
        })
        .collect();

    let inference = membership_eval(&clean_cfg)?;
    Ok(AttackEvalOutput {
        degradation,
        inference,
    })
}

pub fn write_attack_eval(dir: impl AsRef<Path>, output: &AttackEvalOutput) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut writer = csv::Writer::from_path(dir.join("degradation.csv"))?;
    for row in &output.degradation {
        writer.serialize(row)?;
    }
    writer.flush()?;
    let json = serde_json::to_string_pretty(&output.inference)?;
    std::fs::write(dir.join("inference.json"), json + "\n")?;
    Ok(())
}
