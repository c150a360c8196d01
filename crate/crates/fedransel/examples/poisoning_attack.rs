//! Label-flipping poisoning: two of five nodes train on 80%-flipped labels.
//! Compares the damage to plain federated averaging against the FedRansel
//! protocol's randomized partial sharing.
//!
//! Run with: cargo run --release --example poisoning_attack
//! (two full federated trainings; takes a couple of minutes)

use fedransel::data::{DataConfig, DataSource, PipelineConfig, SynthConfig};
use fedransel::experiment::{run_single, ExperimentConfig};
use fedransel::federation::{Aggregation, FederationConfig};
use fedransel::model::{ModelConfig, ModelKind};
use fedransel::nn::Optimizer;
use fedransel::threat::{degradation_report, AttackConfig, AttackKind, Defense};

fn base() -> ExperimentConfig {
    ExperimentConfig {
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
                n_samples: 2000,
                n_features: 8,
                signal_strength: 6.0,
                gen_window: 3,
            }),
            pipeline: PipelineConfig::default(),
            train_ratio: 2.0 / 3.0,
            window_stride: 1,
        },
        federation: FederationConfig {
            n_nodes: 5,
            rounds: 3,
            local_epochs: 10,
            batch_size: 32,
            t_local: 0.8,
            t_global: 0.8,
            aggregation: Aggregation::Fedavg,
        },
        optimizer: Optimizer::Adam { lr: 0.05 },
        attack: AttackConfig::none(),
        seeds: vec![1],
    }
}

fn main() -> fedransel::Result<()> {
    let seed = 1;
    for (label, aggregation, defense) in [
        ("undefended fedavg", Aggregation::Fedavg, Defense::None),
        ("fedransel", Aggregation::Fedransel, Defense::Fedransel),
    ] {
        let mut clean_cfg = base();
        clean_cfg.federation.aggregation = aggregation;
        clean_cfg.attack.defense = defense;
        let (clean, _) = run_single(&clean_cfg, seed)?;

        let mut attacked_cfg = clean_cfg.clone();
        attacked_cfg.attack.kind = AttackKind::LabelFlip;
        attacked_cfg.attack.flip_prob = 0.8;
        attacked_cfg.attack.malicious_nodes = vec![0, 1];
        let (attacked, _) = run_single(&attacked_cfg, seed)?;

        println!("{label}: honest-node metrics, clean vs 2/5 nodes label-flipping at p=0.8");
        for row in degradation_report(&clean.honest_mean, &attacked.honest_mean)? {
            println!(
                "  {:<9} clean {:.4} -> attacked {:.4}  ({:+.2}%)",
                row.metric, row.clean, row.attacked, row.pct_change
            );
        }
    }
    Ok(())
}
