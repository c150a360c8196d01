//! Sweep one hyperparameter while holding the rest fixed, reporting mean and
//! standard deviation over seeds per value.
//!
//! Run with: cargo run --release --example hyperparameter_sweep

use fedransel::data::{DataConfig, DataSource, PipelineConfig, SynthConfig};
use fedransel::experiment::{run_sweep, ExperimentConfig, SweepParam, SweepSpec};
use fedransel::federation::{Aggregation, FederationConfig};
use fedransel::model::{ModelConfig, ModelKind};
use fedransel::nn::Optimizer;
use fedransel::threat::AttackConfig;

fn main() -> fedransel::Result<()> {
    let base = ExperimentConfig {
        model: ModelConfig {
            kind: ModelKind::Qlstm,
            n_qubits: 3,
            depth: 1,
            seq_len: 3,
            hidden_dim: 3,
            entangler: Default::default(),
        },
        data: DataConfig {
            source: DataSource::Synth(SynthConfig {
                n_samples: 900,
                n_features: 6,
                signal_strength: 5.0,
                gen_window: 3,
            }),
            pipeline: PipelineConfig::default(),
            train_ratio: 2.0 / 3.0,
            window_stride: 1,
        },
        federation: FederationConfig {
            n_nodes: 2,
            rounds: 2,
            local_epochs: 6,
            batch_size: 32,
            t_local: 0.8,
            t_global: 0.8,
            aggregation: Aggregation::Fedransel,
        },
        optimizer: Optimizer::Adam { lr: 0.05 },
        attack: AttackConfig::none(),
        seeds: vec![1, 2],
    };

    let spec = SweepSpec {
        parameter: SweepParam::NQubits,
        values: vec![2, 3, 4],
        base,
    };
    println!(
        "sweeping n_qubits over {:?} (2 seeds per value)...",
        spec.values
    );
    let rows = run_sweep(&spec)?;
    println!(
        "{:>8} {:>10} {:>10} {:>10}",
        "value", "accuracy", "recall", "auc"
    );
    for row in &rows {
        println!(
            "{:>8} {:>7.4}±{:.3} {:>7.4}±{:.3} {:>7.4}±{:.3}",
            row.value,
            row.mean_accuracy,
            row.std_accuracy,
            row.mean_recall,
            row.std_recall,
            row.mean_auc,
            row.std_auc
        );
    }
    Ok(())
}
