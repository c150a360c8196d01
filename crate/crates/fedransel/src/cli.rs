//! Command-line front end: experiment subcommands plus a circuit debug tool.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use crate::circuit::{init_state, run_vqc, CircuitSpec, Entangler, GateOp};
use crate::data::{prepare, DatasetCache};
use crate::error::{Error, Result};
use crate::experiment::{
    attack_eval, compare_models, run_experiment_full, write_attack_eval, write_compare_csv,
    write_experiment_outputs, write_sweep_csv, ExperimentConfig, SweepParam, SweepSpec,
};
use crate::rng::{stream, substream};

#[derive(Debug, Parser)]
#[command(
    name = "fedransel",
    about = "Federated fraud-detection laboratory: quantum-gated LSTM training under the FedRansel protocol, with attack and defense evaluation"
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate or ingest a dataset, run preprocessing, and write the cache.
    PrepareData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config's seed list with a single seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the configured experiment and write results.json, round_log.jsonl
    /// and final per-node checkpoints.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Vary one hyperparameter over a value list and write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of: n_qubits, depth, seq_len, n_nodes.
        #[arg(long)]
        param: String,
        /// Comma-separated values, e.g. 2,4,6.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare {qlstm, lstm} x {none, fedransel, dp} and write comparison.csv
    /// plus degradation.csv.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate the configured attack (degradation.csv) and run the
    /// membership-inference attack on the clean system (inference.json).
    AttackEval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate a JSON circuit description and print per-wire expectations.
    CircuitEval {
        #[arg(long)]
        circuit: PathBuf,
    },
}

/// A circuit-eval input: either an explicit gate list or a variational
/// circuit given by its shape, encoding angles and weights.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum CircuitInput {
    Vqc {
        n_qubits: usize,
        depth: usize,
        #[serde(default)]
        entangler: Entangler,
        inputs: Vec<f64>,
        weights: Vec<f64>,
    },
    Ops {
        n_qubits: usize,
        ops: Vec<GateOp>,
    },
}

fn load_config(path: &PathBuf, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    Ok(cfg)
}

fn parse_values(raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::config(format!("invalid sweep value '{v}'")))
        })
        .collect()
}

pub fn run() -> Result<()> {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .ok();
    }

    match cli.command {
        Command::PrepareData { config, out, seed } => {
            let cfg = load_config(&config, seed)?;
            let run_seed = cfg.seeds[0];
            let mut rng = substream(run_seed, stream::DATA);
            let prepared = prepare(
                &cfg.data,
                cfg.model.seq_len,
                cfg.federation.n_nodes,
                &mut rng,
            )?;
            std::fs::create_dir_all(&out)?;
            let path = out.join("data_cache.json");
            let n_windows = prepared.windows.len();
            let dim = prepared.input_dim;
            DatasetCache::from_prepared(prepared, cfg.cache_key()).save(&path)?;
            println!(
                "wrote {} ({n_windows} windows, input dim {dim})",
                path.display()
            );
        }
        Command::Train { config, out, seed } => {
            let cfg = load_config(&config, seed)?;
            let (result, outcomes) = run_experiment_full(&cfg)?;
            write_experiment_outputs(&out, &cfg, &result)?;
            for (i, store) in outcomes[0].stores.iter().enumerate() {
                store.save_checkpoint(out.join(format!("checkpoint_node{i}.json")))?;
            }
            println!(
                "seeds {:?}: mean accuracy {:.4}, recall {:.4}, auc {:.4} ({} parameters)",
                cfg.seeds,
                result.mean.accuracy,
                result.mean.recall,
                result.mean.auc,
                result.param_count
            );
            println!("wrote {}", out.join("results.json").display());
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
            seed,
        } => {
            let base = load_config(&config, seed)?;
            let spec = SweepSpec {
                parameter: param.parse::<SweepParam>()?,
                values: parse_values(&values)?,
                base,
            };
            let rows = crate::experiment::run_sweep(&spec)?;
            std::fs::create_dir_all(&out)?;
            let path = out.join("sweep.csv");
            write_sweep_csv(&path, &rows)?;
            println!("wrote {} ({} rows)", path.display(), rows.len());
        }
        Command::Compare { config, out, seed } => {
            let cfg = load_config(&config, seed)?;
            let output = compare_models(&cfg)?;
            write_compare_csv(&out, &output)?;
            println!(
                "wrote {} and {}",
                out.join("comparison.csv").display(),
                out.join("degradation.csv").display()
            );
        }
        Command::AttackEval { config, out, seed } => {
            let cfg = load_config(&config, seed)?;
            let output = attack_eval(&cfg)?;
            write_attack_eval(&out, &output)?;
            println!(
                "attack degradation rows: {}; mean inference accuracy {:.4}",
                output.degradation.len(),
                output.inference.mean_attack_accuracy
            );
        }
        Command::CircuitEval { circuit } => {
            let raw = std::fs::read_to_string(&circuit)?;
            let input: CircuitInput = serde_json::from_str(&raw)?;
            let expectations = match input {
                CircuitInput::Vqc {
                    n_qubits,
                    depth,
                    entangler,
                    inputs,
                    weights,
                } => {
                    let spec = CircuitSpec {
                        n_qubits,
                        depth,
                        entangler,
                    };
                    run_vqc(&inputs, &weights, &spec)?
                }
                CircuitInput::Ops { n_qubits, ops } => {
                    let mut state = init_state(n_qubits)?;
                    for op in &ops {
                        state.apply(op)?;
                    }
                    state.expval_z_all()
                }
            };
            println!("{}", serde_json::json!({ "expectations": expectations }));
        }
    }
    Ok(())
}
