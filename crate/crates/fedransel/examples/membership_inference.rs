//! Loss-threshold membership inference. First attacks a deliberately
//! overfitted model (memorized training windows leak through low losses),
//! then compares attack accuracy against federated systems trained with
//! plain FedAvg versus FedRansel.
//!
//! Run with: cargo run --release --example membership_inference

use fedransel::data::{prepare, DataConfig, DataSource, PipelineConfig, SynthConfig};
use fedransel::experiment::{membership_eval, ExperimentConfig};
use fedransel::federation::{Aggregation, FederationConfig};
use fedransel::model::{Model, ModelConfig, ModelKind};
use fedransel::nn::{Optimizer, ParamStore};
use fedransel::rng::{stream, substream};
use fedransel::threat::{membership_inference, AttackConfig, Defense};

fn model_cfg() -> ModelConfig {
    ModelConfig {
        kind: ModelKind::Qlstm,
        n_qubits: 4,
        depth: 2,
        seq_len: 3,
        hidden_dim: 4,
        entangler: Default::default(),
    }
}

fn main() -> fedransel::Result<()> {
    // deliberately overfitted single model on 200 windows of noisy data
    let data_cfg = DataConfig {
        source: DataSource::Synth(SynthConfig {
            n_samples: 600,
            n_features: 8,
            signal_strength: 2.0,
            gen_window: 3,
        }),
        pipeline: PipelineConfig::default(),
        train_ratio: 2.0 / 3.0,
        window_stride: 1,
    };
    let mut rng = substream(99, stream::DATA);
    let prepared = prepare(&data_cfg, 3, 2, &mut rng)?;
    let mut members = prepared.train_windows();
    members.truncate(200);
    let nonmembers = prepared.test_windows();

    let mut init_rng = substream(99, stream::MODEL_INIT);
    let mut store = ParamStore::new();
    let model = Model::build(&model_cfg(), prepared.input_dim, &mut store, &mut init_rng)?;
    let optimizer = Optimizer::Adam { lr: 0.05 };
    for _ in 0..150 {
        for batch in members.chunks(32) {
            let (_, grads) = model.batch_loss_and_grads(&store, batch)?;
            store.add_grads(&grads);
            optimizer.step(&mut store)?;
        }
    }
    println!(
        "overfitted model: train loss {:.4}, held-out loss {:.4}",
        model.batch_loss(&store, &members)?,
        model.batch_loss(&store, &nonmembers)?
    );
    let mut mi_rng = substream(99, stream::INFERENCE);
    let report = membership_inference(&model, &store, &members, &nonmembers, &mut mi_rng)?;
    println!(
        "loss-threshold attack: accuracy {:.4} at threshold {:.4} (chance = 0.5)\n",
        report.attack_accuracy, report.threshold
    );

    // federated comparison on an overfit-prone config (small shards, many
    // local epochs, stronger signal so the base task is well learned)
    let mut fed_data = data_cfg.clone();
    fed_data.source = DataSource::Synth(SynthConfig {
        n_samples: 600,
        n_features: 8,
        signal_strength: 6.0,
        gen_window: 3,
    });
    for (label, aggregation, defense) in [
        ("fedavg   ", Aggregation::Fedavg, Defense::None),
        ("fedransel", Aggregation::Fedransel, Defense::Fedransel),
    ] {
        let cfg = ExperimentConfig {
            model: model_cfg(),
            data: fed_data.clone(),
            federation: FederationConfig {
                n_nodes: 2,
                rounds: 3,
                local_epochs: 25,
                batch_size: 32,
                t_local: 0.8,
                t_global: 0.8,
                aggregation,
            },
            optimizer: Optimizer::Adam { lr: 0.05 },
            attack: AttackConfig {
                defense,
                ..AttackConfig::none()
            },
            seeds: vec![1, 2, 3, 4, 5],
        };
        let summary = membership_eval(&cfg)?;
        println!(
            "{label}: membership attack accuracy mean {:.4}, median {:.4} over seeds {:?}",
            summary.mean_attack_accuracy, summary.median_attack_accuracy, cfg.seeds
        );
    }
    Ok(())
}
