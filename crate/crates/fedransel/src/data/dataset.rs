//! Tabular dataset container, CSV ingestion and sequence-window construction.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column metadata. Categorical columns hold level codes in the feature
/// matrix; `levels` maps code -> original string.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub categorical: bool,
    #[serde(default)]
    pub levels: Vec<String>,
}

/// Rows of features with 0/1 fraud labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TabularDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub columns: Vec<ColumnMeta>,
}

impl TabularDataset {
    pub fn n_rows(&self) -> usize {
        self.features.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }
}

/// Names the label column and any categorical feature columns of a CSV file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label: String,
    #[serde(default)]
    pub categorical: Vec<String>,
}

impl CsvSchema {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let raw = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&raw)?)
    }
}

/// Parse a headered CSV into a dataset. Unparseable cells are rejected with
/// the offending row number; categorical cells are stored as level codes in
/// first-seen order.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<TabularDataset> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let label_idx = headers
        .iter()
        .position(|h| *h == schema.label)
        .ok_or_else(|| Error::Data(format!("label column '{}' not found", schema.label)))?;
    for cat in &schema.categorical {
        if !headers.iter().any(|h| h == cat) {
            return Err(Error::Data(format!("categorical column '{cat}' not found")));
        }
    }

    let mut columns: Vec<ColumnMeta> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, name)| ColumnMeta {
            name: name.clone(),
            categorical: schema.categorical.contains(name),
            levels: Vec::new(),
        })
        .collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row_num, record) in reader.records().enumerate() {
        let record = record?;
        let line = row_num + 2; // header is line 1
        if record.len() != headers.len() {
            return Err(Error::Data(format!(
                "row {line}: expected {} fields, got {}",
                headers.len(),
                record.len()
            )));
        }
        let label_raw = record[label_idx].trim();
        let label = match label_raw {
            "0" | "0.0" => 0u8,
            "1" | "1.0" => 1u8,
            other => {
                return Err(Error::Data(format!(
                    "row {line}: label '{other}' is not binary"
                )))
            }
        };
        let mut row = Vec::with_capacity(columns.len());
        let mut col_cursor = 0usize;
        for (i, cell) in record.iter().enumerate() {
            if i == label_idx {
                continue;
            }
            let meta = &mut columns[col_cursor];
            let cell = cell.trim();
            if meta.categorical {
                let code = match meta.levels.iter().position(|l| l == cell) {
                    Some(c) => c,
                    None => {
                        meta.levels.push(cell.to_string());
                        meta.levels.len() - 1
                    }
                };
                row.push(code as f64);
            } else {
                let value: f64 = cell.parse().map_err(|_| {
                    Error::Data(format!(
                        "row {line}: cannot parse '{cell}' in column '{}'",
                        meta.name
                    ))
                })?;
                if !value.is_finite() {
                    return Err(Error::Data(format!(
                        "row {line}: non-finite value in column '{}'",
                        meta.name
                    )));
                }
                row.push(value);
            }
            col_cursor += 1;
        }
        features.push(row);
        labels.push(label);
    }
    if features.is_empty() {
        return Err(Error::Data(format!(
            "{} contains no data rows",
            path.display()
        )));
    }
    Ok(TabularDataset {
        features,
        labels,
        columns,
    })
}

/// One training sample for the sequence models: a window of consecutive
/// feature rows labelled by its last row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Window {
    pub rows: Vec<Vec<f64>>,
    pub label: u8,
}

/// Slice a dataset into windows of `seq_len` consecutive rows, advancing by
/// `stride`, each labelled by the last row it covers.
pub fn build_windows(
    dataset: &TabularDataset,
    seq_len: usize,
    stride: usize,
) -> Result<Vec<Window>> {
    if seq_len == 0 || stride == 0 {
        return Err(Error::config("seq_len and stride must be positive"));
    }
    let n = dataset.n_rows();
    if n < seq_len {
        return Err(Error::config(format!(
            "{n} rows cannot form a window of length {seq_len}"
        )));
    }
    let mut windows = Vec::new();
    let mut start = 0;
    while start + seq_len <= n {
        windows.push(Window {
            rows: dataset.features[start..start + seq_len].to_vec(),
            label: dataset.labels[start + seq_len - 1],
        });
        start += stride;
    }
    Ok(windows)
}
