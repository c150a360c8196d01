//! Compare the quantum-gated LSTM against a parameter-matched classical LSTM
//! on the same federated task.
//!
//! Run with: cargo run --release --example model_comparison

use fedransel::data::{DataConfig, DataSource, PipelineConfig, SynthConfig};
use fedransel::experiment::{run_experiment, ExperimentConfig};
use fedransel::federation::{Aggregation, FederationConfig};
use fedransel::model::{matched_lstm_hidden, LstmModel, ModelConfig, ModelKind, QlstmModel};
use fedransel::nn::Optimizer;
use fedransel::threat::AttackConfig;

fn main() -> fedransel::Result<()> {
    let base = ExperimentConfig {
        model: ModelConfig {
            kind: ModelKind::Qlstm,
            n_qubits: 4,
            depth: 2,
            seq_len: 3,
            hidden_dim: 4,
            entangler: Default::default(),
        },
        data: DataConfig {
            source: DataSource::Synth(SynthConfig {
                n_samples: 1500,
                n_features: 8,
                signal_strength: 6.0,
                gen_window: 3,
            }),
            pipeline: PipelineConfig::default(),
            train_ratio: 2.0 / 3.0,
            window_stride: 1,
        },
        federation: FederationConfig {
            n_nodes: 2,
            rounds: 3,
            local_epochs: 8,
            batch_size: 32,
            t_local: 0.8,
            t_global: 0.8,
            aggregation: Aggregation::Fedransel,
        },
        optimizer: Optimizer::Adam { lr: 0.05 },
        attack: AttackConfig::none(),
        seeds: vec![1, 2],
    };

    let input_dim = 8;
    let qlstm_params = QlstmModel::count_params(input_dim, 4, 4, 2);
    let lstm_hidden = matched_lstm_hidden(input_dim, 3, qlstm_params);
    println!(
        "QLSTM: {qlstm_params} parameters; matched classical LSTM: hidden {lstm_hidden} -> {} parameters\n",
        LstmModel::count_params(input_dim, lstm_hidden)
    );

    for kind in [ModelKind::Qlstm, ModelKind::Lstm] {
        let mut cfg = base.clone();
        cfg.model.kind = kind;
        if kind == ModelKind::Lstm {
            cfg.model.hidden_dim = lstm_hidden;
        }
        let result = run_experiment(&cfg)?;
        println!(
            "{:?}: {} parameters, mean accuracy {:.4}, recall {:.4}, auc {:.4} over seeds {:?}",
            kind,
            result.param_count,
            result.mean.accuracy,
            result.mean.recall,
            result.mean.auc,
            cfg.seeds
        );
    }
    Ok(())
}
