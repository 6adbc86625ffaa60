//! Datasets: LIBSVM parsing, feature storage, preprocessing and the preset
//! registry of benchmark files.

mod features;
mod libsvm;
pub mod presets;

pub use features::{CsrMatrix, Features};
pub use libsvm::{load_libsvm, parse_libsvm, write_libsvm};
pub use presets::{data_dir, fairness_splits, find_preset, presets, DataPreset, MinorityRule, PresetKind};

use crate::error::{Error, Result};

/// Labeled sample matrix; labels are `±1`.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub labels: Vec<f64>,
    pub features: Features,
    pub provenance: String,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    /// Rows whose label equals `label`.
    pub fn select_label(&self, label: f64) -> Dataset {
        let rows: Vec<usize> = (0..self.n()).filter(|&i| self.labels[i] == label).collect();
        Dataset {
            labels: vec![label; rows.len()],
            features: self.features.select_rows(&rows),
            provenance: format!("{} [label {label:+}]", self.provenance),
        }
    }

    /// First `n` rows (toy slices for checks).
    pub fn head(&self, n: usize) -> Dataset {
        let rows: Vec<usize> = (0..n.min(self.n())).collect();
        Dataset {
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            features: self.features.select_rows(&rows),
            provenance: format!("{} [head {n}]", self.provenance),
        }
    }
}

/// Stored densely when the dimension is at most this, lazily otherwise.
pub const DENSE_LIMIT: usize = 4096;

/// Per-feature standardization (population variance; zero-variance features
/// are only centered), then each row scaled to unit 2-norm (zero rows stay
/// zero).
pub fn preprocess(ds: &Dataset) -> Result<Dataset> {
    let n = ds.n();
    if n < 2 {
        return Err(Error::InvalidArgument("preprocess needs at least two rows".into()));
    }
    let raw = ds.features.to_csr();
    let d = raw.ncols;
    // two passes: means, then centered squares (implicit zeros included)
    let mut mean = vec![0.0; d];
    let mut nnz = vec![0usize; d];
    for i in 0..n {
        for (j, v) in raw.row(i) {
            mean[j] += v;
            nnz[j] += 1;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut ss: Vec<f64> = (0..d).map(|j| (n - nnz[j]) as f64 * mean[j] * mean[j]).collect();
    for i in 0..n {
        for (j, v) in raw.row(i) {
            ss[j] += (v - mean[j]) * (v - mean[j]);
        }
    }
    let constant: Vec<bool> = (0..d).map(|j| ss[j] <= 1e-24 * (1.0 + mean[j] * mean[j]) * n as f64).collect();
    let inv_std: Vec<f64> = (0..d).map(|j| if constant[j] { 1.0 } else { 1.0 / (ss[j] / n as f64).sqrt() }).collect();
    let features = if d <= DENSE_LIMIT {
        let mut data = vec![0.0; n * d];
        for i in 0..n {
            let row = &mut data[i * d..(i + 1) * d];
            for j in 0..d {
                row[j] = -mean[j] * inv_std[j];
            }
            for (j, v) in raw.row(i) {
                row[j] = (v - mean[j]) * inv_std[j];
            }
            // zero-variance columns are exactly zero after centering
            for j in 0..d {
                if constant[j] {
                    row[j] = 0.0;
                }
            }
            let nrm = crate::base::norm(row);
            if nrm > 0.0 {
                crate::base::scale(1.0 / nrm, row);
            }
        }
        Features::Dense { ncols: d, data }
    } else {
        Features::standardized(raw, mean, inv_std)
    };
    Ok(Dataset { labels: ds.labels.clone(), features, provenance: format!("{} [standardized, unit rows]", ds.provenance) })
}

/// Divide each row by its 2-norm (zero rows unchanged).
pub fn normalize_rows(ds: &Dataset) -> Dataset {
    Dataset { labels: ds.labels.clone(), features: ds.features.normalized_rows(), provenance: ds.provenance.clone() }
}
