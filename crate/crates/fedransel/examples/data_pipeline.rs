//! Walk the data pipeline: generate synthetic transactions, reduce with PCA,
//! standardize, window into sequences, and split into IID client shards.
//!
//! Run with: cargo run --release --example data_pipeline

use fedransel::data::{prepare, DataConfig, DataSource, PcaModel, PipelineConfig, SynthConfig};
use fedransel::rng::{stream, substream};

fn main() -> fedransel::Result<()> {
    let cfg = DataConfig {
        source: DataSource::Synth(SynthConfig {
            n_samples: 3000,
            n_features: 30,
            signal_strength: 4.0,
            gen_window: 3,
        }),
        pipeline: PipelineConfig {
            shuffle_rows: false,
            undersample: false,
            one_hot: false,
            pca_components: Some(28),
            scale: true,
        },
        train_ratio: 2.0 / 3.0,
        window_stride: 1,
    };

    let mut rng = substream(11, stream::DATA);
    let prepared = prepare(&cfg, 3, 5, &mut rng)?;

    println!("windows: {} of length 3", prepared.windows.len());
    println!(
        "feature width after PCA(28) + scaling: {}",
        prepared.input_dim
    );
    println!(
        "split: {} train / {} test",
        prepared.plan.train.len(),
        prepared.plan.test.len()
    );
    for (i, shard) in prepared.plan.clients.iter().enumerate() {
        let pos = shard
            .iter()
            .filter(|&&w| prepared.windows[w].label == 1)
            .count();
        println!(
            "  client {i}: {} windows, {:.1}% positive",
            shard.len(),
            100.0 * pos as f64 / shard.len() as f64
        );
    }

    let pca: &PcaModel = prepared.transforms.pca.as_ref().expect("pca fitted");
    let total: f64 = pca.explained_variance.iter().sum();
    let top3: f64 = pca.explained_variance.iter().take(3).sum::<f64>() / total;
    println!(
        "PCA: {} components, top 3 carry {:.1}% of captured variance",
        pca.k(),
        100.0 * top3
    );
    Ok(())
}
