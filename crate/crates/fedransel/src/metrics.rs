//! Classification metrics: accuracy and recall at the 0.5 probability
//! threshold, and AUC by exact rank-sum with ties counted half.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Metric values plus the confusion counts they derive from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub recall: f64,
    pub auc: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Just the three headline numbers; used for cross-node means and reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub accuracy: f64,
    pub recall: f64,
    pub auc: f64,
}

impl MetricSummary {
    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "accuracy" => Some(self.accuracy),
            "recall" => Some(self.recall),
            "auc" => Some(self.auc),
            _ => None,
        }
    }

    pub const NAMES: [&'static str; 3] = ["accuracy", "recall", "auc"];
}

impl From<&MetricSet> for MetricSummary {
    fn from(m: &MetricSet) -> Self {
        MetricSummary {
            accuracy: m.accuracy,
            recall: m.recall,
            auc: m.auc,
        }
    }
}

/// Mean of summaries, entrywise.
pub fn mean_summary<'a>(sets: impl IntoIterator<Item = &'a MetricSet>) -> MetricSummary {
    let mut acc = MetricSummary {
        accuracy: 0.0,
        recall: 0.0,
        auc: 0.0,
    };
    let mut n = 0.0;
    for m in sets {
        acc.accuracy += m.accuracy;
        acc.recall += m.recall;
        acc.auc += m.auc;
        n += 1.0;
    }
    MetricSummary {
        accuracy: acc.accuracy / n,
        recall: acc.recall / n,
        auc: acc.auc / n,
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Compute all metrics from raw logits: a sample is predicted positive when
/// sigmoid(logit) ≥ 0.5, i.e. logit ≥ 0. Requires both classes present so the
/// AUC is defined.
pub fn compute_metrics(logits: &[f64], labels: &[u8]) -> Result<MetricSet> {
    if logits.len() != labels.len() {
        return Err(Error::shape(format!(
            "{} scores vs {} labels",
            logits.len(),
            labels.len()
        )));
    }
    if logits.is_empty() {
        return Err(Error::Metric("no samples".into()));
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Metric(
            "AUC undefined: labels contain a single class".into(),
        ));
    }

    let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (&z, &y) in logits.iter().zip(labels) {
        match (z >= 0.0, y == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }

    Ok(MetricSet {
        accuracy: (tp + tn) as f64 / labels.len() as f64,
        recall: tp as f64 / (tp + fn_) as f64,
        auc: auc_rank_sum(logits, labels),
        tp,
        fp,
        tn,
        fn_,
    })
}

/// AUC via the Mann–Whitney rank sum: the probability that a random positive
/// outscores a random negative, with ties worth half.
pub fn auc_rank_sum(scores: &[f64], labels: &[u8]) -> f64 {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| scores[i].partial_cmp(&scores[j]).unwrap());

    // average ranks over tie groups (ranks are 1-based)
    let mut rank = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let shared = (i + 1 + j) as f64 / 2.0;
        for k in i..j {
            rank[order[k]] = shared;
        }
        i = j;
    }

    let pos = labels.iter().filter(|&&y| y == 1).count() as f64;
    let neg = n as f64 - pos;
    let rank_sum: f64 = (0..n).filter(|&i| labels[i] == 1).map(|i| rank[i]).sum();
    (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg)
}
