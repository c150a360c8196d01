//! Data ingestion, preprocessing, IID federated partitioning and the
//! synthetic transaction generator.
//!
//! The preparation pipeline runs in two stages. Row-level steps (optional
//! shuffle, optional under-sampling) act on the tabular data, which is then
//! cut into consecutive windows; the split into train/test and client shards
//! happens at window granularity. Feature transforms (one-hot, PCA, scaling)
//! are fitted on the rows of training windows only and applied everywhere.

mod dataset;
mod pca;
mod split;
mod synth;
mod transform;

pub use dataset::{build_windows, load_csv, ColumnMeta, CsvSchema, TabularDataset, Window};
pub use pca::{jacobi_eigen, PcaModel};
pub use split::{make_split, SplitPlan};
pub use synth::{synth_generate, SynthConfig};
pub use transform::{undersample, OneHotEncoder, Scaler};

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    Synth(SynthConfig),
    Csv { path: String, schema: String },
}

/// Which preprocessing steps run, mirroring the two reference recipes:
/// PCA-plus-scaling for wide numeric data, under-sampling with one-hot and
/// scaling for categorical-heavy data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default)]
    pub shuffle_rows: bool,
    #[serde(default)]
    pub undersample: bool,
    #[serde(default)]
    pub one_hot: bool,
    #[serde(default)]
    pub pca_components: Option<usize>,
    #[serde(default = "default_true")]
    pub scale: bool,
}

fn default_true() -> bool {
    true
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            shuffle_rows: false,
            undersample: false,
            one_hot: false,
            pca_components: None,
            scale: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataConfig {
    pub source: DataSource,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default = "default_train_ratio")]
    pub train_ratio: f64,
    #[serde(default = "default_stride")]
    pub window_stride: usize,
}

fn default_train_ratio() -> f64 {
    2.0 / 3.0
}

fn default_stride() -> usize {
    1
}

/// Transform parameters fitted on training rows, applied in one-hot → PCA →
/// scale order.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FittedTransforms {
    pub one_hot: Option<OneHotEncoder>,
    pub pca: Option<PcaModel>,
    pub scaler: Option<Scaler>,
}

impl FittedTransforms {
    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        let mut out = row.to_vec();
        if let Some(enc) = &self.one_hot {
            out = enc.transform(&out);
        }
        if let Some(pca) = &self.pca {
            out = pca.transform(&out);
        }
        if let Some(scaler) = &self.scaler {
            out = scaler.transform(&out);
        }
        out
    }
}

/// Fully preprocessed experiment input: transformed windows plus the split
/// plan over them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreparedData {
    pub windows: Vec<Window>,
    pub plan: SplitPlan,
    pub input_dim: usize,
    pub transforms: FittedTransforms,
}

impl PreparedData {
    pub fn train_windows(&self) -> Vec<Window> {
        self.plan
            .train
            .iter()
            .map(|&i| self.windows[i].clone())
            .collect()
    }

    pub fn test_windows(&self) -> Vec<Window> {
        self.plan
            .test
            .iter()
            .map(|&i| self.windows[i].clone())
            .collect()
    }

    pub fn client_windows(&self, client: usize) -> Vec<Window> {
        self.plan.clients[client]
            .iter()
            .map(|&i| self.windows[i].clone())
            .collect()
    }
}

/// Load or generate the raw tabular dataset for a config.
pub fn load_source(cfg: &DataConfig, rng: &mut impl Rng) -> Result<TabularDataset> {
    match &cfg.source {
        DataSource::Synth(synth) => synth_generate(synth, rng),
        DataSource::Csv { path, schema } => {
            let schema = CsvSchema::load(schema)?;
            load_csv(path, &schema)
        }
    }
}

/// Run the full preparation pipeline for one experiment.
pub fn prepare(
    cfg: &DataConfig,
    seq_len: usize,
    n_clients: usize,
    rng: &mut impl Rng,
) -> Result<PreparedData> {
    let mut dataset = load_source(cfg, rng)?;

    if cfg.pipeline.shuffle_rows {
        let mut order: Vec<usize> = (0..dataset.n_rows()).collect();
        order.shuffle(rng);
        dataset = TabularDataset {
            features: order.iter().map(|&i| dataset.features[i].clone()).collect(),
            labels: order.iter().map(|&i| dataset.labels[i]).collect(),
            columns: dataset.columns,
        };
    }
    if cfg.pipeline.undersample {
        dataset = undersample(&dataset, rng)?;
    }

    let raw_windows = build_windows(&dataset, seq_len, cfg.window_stride)?;
    let plan = make_split(raw_windows.len(), cfg.train_ratio, n_clients, rng)?;

    // fit on training-window rows only, staging each transform's output as
    // the next one's input
    let mut fit_rows: Vec<Vec<f64>> = plan
        .train
        .iter()
        .flat_map(|&i| raw_windows[i].rows.iter().cloned())
        .collect();

    let mut transforms = FittedTransforms::default();
    let mut dim = dataset.n_features();

    if cfg.pipeline.one_hot {
        let enc = OneHotEncoder::fit(fit_rows.iter().map(|r| r.as_slice()), &dataset.columns);
        dim = enc.output_dim;
        fit_rows = fit_rows.iter().map(|r| enc.transform(r)).collect();
        transforms.one_hot = Some(enc);
    }

    if let Some(k) = cfg.pipeline.pca_components {
        let pca = PcaModel::fit(fit_rows.iter().map(|r| r.as_slice()), dim, k)?;
        dim = k;
        fit_rows = fit_rows.iter().map(|r| pca.transform(r)).collect();
        transforms.pca = Some(pca);
    }

    if cfg.pipeline.scale {
        transforms.scaler = Some(Scaler::fit(fit_rows.iter().map(|r| r.as_slice()), dim));
    }

    let windows: Vec<Window> = raw_windows
        .iter()
        .map(|w| Window {
            rows: w.rows.iter().map(|r| transforms.apply(r)).collect(),
            label: w.label,
        })
        .collect();

    Ok(PreparedData {
        windows,
        plan,
        input_dim: dim,
        transforms,
    })
}

/// On-disk container written by `prepare-data`: the cache key, the fitted
/// transform parameters, the split plan and the transformed windows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetCache {
    pub config_hash: String,
    pub input_dim: usize,
    pub transforms: FittedTransforms,
    pub plan: SplitPlan,
    pub windows: Vec<Window>,
}

impl DatasetCache {
    pub fn from_prepared(prepared: PreparedData, config_hash: String) -> Self {
        DatasetCache {
            config_hash,
            input_dim: prepared.input_dim,
            transforms: prepared.transforms,
            plan: prepared.plan,
            windows: prepared.windows,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let raw = std::fs::read_to_string(&path).map_err(|e| {
            Error::Data(format!(
                "cannot read dataset cache {}: {e}",
                path.as_ref().display()
            ))
        })?;
        Ok(serde_json::from_str(&raw)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn synth_config(n: usize) -> DataConfig {
        DataConfig {
            source: DataSource::Synth(SynthConfig {
                n_samples: n,
                n_features: 6,
                signal_strength: 1.0,
                gen_window: 3,
            }),
            pipeline: PipelineConfig::default(),
            train_ratio: 2.0 / 3.0,
            window_stride: 1,
        }
    }

    #[test]
    fn prepare_produces_consistent_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let prepared = prepare(&synth_config(300), 3, 2, &mut rng).unwrap();
        assert_eq!(prepared.windows.len(), 298);
        assert_eq!(prepared.input_dim, 6);
        for w in &prepared.windows {
            assert_eq!(w.rows.len(), 3);
            assert!(w.rows.iter().all(|r| r.len() == 6));
        }
        let n_train: usize = prepared.plan.clients.iter().map(|c| c.len()).sum();
        assert_eq!(n_train, prepared.plan.train.len());
    }

    #[test]
    fn scaler_is_fitted_on_training_windows_only() {
        // replay the pipeline's deterministic steps and refit independently
        let cfg = synth_config(300);
        let prepared = prepare(&cfg, 3, 2, &mut ChaCha8Rng::seed_from_u64(52)).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let dataset = load_source(&cfg, &mut rng).unwrap();
        let raw_windows = build_windows(&dataset, 3, 1).unwrap();
        let plan = make_split(raw_windows.len(), cfg.train_ratio, 2, &mut rng).unwrap();
        assert_eq!(plan.train, prepared.plan.train);

        let train_rows: Vec<&[f64]> = plan
            .train
            .iter()
            .flat_map(|&i| raw_windows[i].rows.iter().map(|r| r.as_slice()))
            .collect();
        let expected = Scaler::fit(train_rows.iter().copied(), 6);
        let actual = prepared.transforms.scaler.as_ref().unwrap();
        assert_eq!(expected.mean, actual.mean);
        assert_eq!(expected.std, actual.std);
    }

    #[test]
    fn pca_pipeline_reduces_width() {
        let mut cfg = synth_config(400);
        cfg.pipeline.pca_components = Some(4);
        let prepared = prepare(&cfg, 2, 2, &mut ChaCha8Rng::seed_from_u64(53)).unwrap();
        assert_eq!(prepared.input_dim, 4);
        assert!(prepared.windows.iter().all(|w| w.rows[0].len() == 4));
    }

    #[test]
    fn cache_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let prepared = prepare(&synth_config(120), 2, 2, &mut rng).unwrap();
        let dir = std::env::temp_dir().join("fedransel_cache_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cache.json");

        let cache = DatasetCache::from_prepared(prepared.clone(), "abc123".into());
        cache.save(&path).unwrap();
        let loaded = DatasetCache::load(&path).unwrap();
        assert_eq!(loaded.config_hash, "abc123");
        assert_eq!(loaded.windows.len(), prepared.windows.len());
        assert_eq!(loaded.plan.train, prepared.plan.train);
    }
}
