//! Fit-on-train / apply-everywhere feature transforms and class rebalancing.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::dataset::{ColumnMeta, TabularDataset};
use crate::error::{Error, Result};

/// Per-feature standardization. Zero-variance features map to 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]> + Clone, n_features: usize) -> Self {
        let mut mean = vec![0.0; n_features];
        let mut count = 0usize;
        for row in rows.clone() {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
            count += 1;
        }
        for m in &mut mean {
            *m /= count as f64;
        }
        let mut var = vec![0.0; n_features];
        for row in rows {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var.iter().map(|v| (v / count as f64).sqrt()).collect();
        Scaler { mean, std }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| if *s > 1e-12 { (x - m) / s } else { 0.0 })
            .collect()
    }
}

/// One-hot expansion of categorical columns with vocabularies fitted on
/// training rows; unseen codes map to an all-zero block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OneHotEncoder {
    /// For each input column: None = numeric passthrough, Some(vocab) =
    /// categorical with the listed level codes, in code order.
    pub column_vocabs: Vec<Option<Vec<usize>>>,
    pub output_dim: usize,
}

impl OneHotEncoder {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>, columns: &[ColumnMeta]) -> Self {
        let mut seen: Vec<Option<Vec<usize>>> = columns
            .iter()
            .map(|c| {
                if c.categorical {
                    Some(Vec::new())
                } else {
                    None
                }
            })
            .collect();
        for row in rows {
            for (slot, x) in seen.iter_mut().zip(row) {
                if let Some(vocab) = slot {
                    let code = *x as usize;
                    if !vocab.contains(&code) {
                        vocab.push(code);
                    }
                }
            }
        }
        for slot in seen.iter_mut().flatten() {
            slot.sort_unstable();
        }
        let output_dim = seen.iter().map(|s| s.as_ref().map_or(1, |v| v.len())).sum();
        OneHotEncoder {
            column_vocabs: seen,
            output_dim,
        }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.output_dim);
        for (slot, x) in self.column_vocabs.iter().zip(row) {
            match slot {
                None => out.push(*x),
                Some(vocab) => {
                    let code = *x as usize;
                    for v in vocab {
                        out.push(if *v == code { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        out
    }
}

/// Subsample the majority class uniformly at random down to the minority
/// count, keeping original row order.
pub fn undersample(dataset: &TabularDataset, rng: &mut impl Rng) -> Result<TabularDataset> {
    let pos: Vec<usize> = (0..dataset.n_rows())
        .filter(|&i| dataset.labels[i] == 1)
        .collect();
    let neg: Vec<usize> = (0..dataset.n_rows())
        .filter(|&i| dataset.labels[i] == 0)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::config("undersample needs both classes present"));
    }
    let (majority, minority) = if pos.len() > neg.len() {
        (pos, neg)
    } else {
        (neg, pos)
    };
    let mut shuffled = majority.clone();
    shuffled.shuffle(rng);
    let mut keep: Vec<usize> = shuffled[..minority.len()].to_vec();
    keep.extend_from_slice(&minority);
    keep.sort_unstable();

    Ok(TabularDataset {
        features: keep.iter().map(|&i| dataset.features[i].clone()).collect(),
        labels: keep.iter().map(|&i| dataset.labels[i]).collect(),
        columns: dataset.columns.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn numeric_columns(d: usize) -> Vec<ColumnMeta> {
        (0..d)
            .map(|i| ColumnMeta {
                name: format!("f{i}"),
                categorical: false,
                levels: vec![],
            })
            .collect()
    }

    #[test]
    fn scaler_standardizes_training_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|_| vec![rng.gen_range(-3.0..9.0), rng.gen_range(5.0..6.0)])
            .collect();
        let scaler = Scaler::fit(rows.iter().map(|r| r.as_slice()), 2);
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| scaler.transform(r)).collect();
        for j in 0..2 {
            let mean: f64 = scaled.iter().map(|r| r[j]).sum::<f64>() / scaled.len() as f64;
            let var: f64 = scaled
                .iter()
                .map(|r| (r[j] - mean) * (r[j] - mean))
                .sum::<f64>()
                / scaled.len() as f64;
            assert!(mean.abs() < 1e-10);
            assert!((var.sqrt() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn scaler_is_idempotent_on_standardized_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let rows: Vec<Vec<f64>> = (0..500).map(|_| vec![rng.gen_range(-1.0..1.0)]).collect();
        let first = Scaler::fit(rows.iter().map(|r| r.as_slice()), 1);
        let standardized: Vec<Vec<f64>> = rows.iter().map(|r| first.transform(r)).collect();
        let second = Scaler::fit(standardized.iter().map(|r| r.as_slice()), 1);
        for row in &standardized {
            let twice = second.transform(row);
            assert!((twice[0] - row[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_feature_maps_to_zero() {
        let rows = vec![vec![5.0], vec![5.0], vec![5.0]];
        let scaler = Scaler::fit(rows.iter().map(|r| r.as_slice()), 1);
        assert_eq!(scaler.transform(&[5.0]), vec![0.0]);
    }

    #[test]
    fn one_hot_indicator_and_unseen_fallback() {
        let columns = vec![
            ColumnMeta {
                name: "x".into(),
                categorical: false,
                levels: vec![],
            },
            ColumnMeta {
                name: "c".into(),
                categorical: true,
                levels: vec!["A".into(), "B".into(), "C".into(), "D".into()],
            },
        ];
        // training rows only contain codes 0, 1, 2 (A, B, C)
        let train: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![2.0, 1.0], vec![3.0, 2.0]];
        let enc = OneHotEncoder::fit(train.iter().map(|r| r.as_slice()), &columns);
        assert_eq!(enc.output_dim, 4); // 1 numeric + 3 levels

        assert_eq!(enc.transform(&[9.0, 1.0]), vec![9.0, 0.0, 1.0, 0.0]);
        // unseen level D (code 3) -> all zeros
        assert_eq!(enc.transform(&[9.0, 3.0]), vec![9.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn undersample_balances_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let features: Vec<Vec<f64>> = (0..1000).map(|i| vec![i as f64]).collect();
        let labels: Vec<u8> = (0..1000).map(|i| u8::from(i < 100)).collect();
        let ds = TabularDataset {
            features,
            labels,
            columns: numeric_columns(1),
        };
        let balanced = undersample(&ds, &mut rng).unwrap();
        let pos = balanced.labels.iter().filter(|&&y| y == 1).count();
        let neg = balanced.labels.iter().filter(|&&y| y == 0).count();
        assert_eq!(pos, 100);
        assert_eq!(neg, 100);
    }

    #[test]
    fn undersample_noop_when_balanced_and_rejects_single_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let ds = TabularDataset {
            features: vec![vec![0.0], vec![1.0]],
            labels: vec![0, 1],
            columns: numeric_columns(1),
        };
        let out = undersample(&ds, &mut rng).unwrap();
        assert_eq!(out.n_rows(), 2);

        let single = TabularDataset {
            features: vec![vec![0.0]],
            labels: vec![1],
            columns: numeric_columns(1),
        };
        assert!(undersample(&single, &mut rng).is_err());
    }

    #[test]
    fn undersample_preserves_majority_feature_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let n = 5000usize;
        let features: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..1.0)]).collect();
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i < 500)).collect();
        let full_majority_mean: f64 = features[500..].iter().map(|r| r[0]).sum::<f64>() / 4500.0;
        let ds = TabularDataset {
            features,
            labels,
            columns: numeric_columns(1),
        };

        let balanced = undersample(&ds, &mut rng).unwrap();
        let kept: Vec<f64> = balanced
            .features
            .iter()
            .zip(&balanced.labels)
            .filter(|(_, &y)| y == 0)
            .map(|(r, _)| r[0])
            .collect();
        assert_eq!(kept.len(), 500);
        let kept_mean: f64 = kept.iter().sum::<f64>() / kept.len() as f64;
        // uniform(0,1): sigma of a 500-sample mean is ~0.0129
        let sigma = (1.0f64 / 12.0 / 500.0).sqrt();
        assert!(
            (kept_mean - full_majority_mean).abs() < 3.0 * sigma,
            "kept mean {kept_mean} vs full {full_majority_mean}"
        );
    }
}
