//! Feature matrix storage: sparse CSR, dense row-major, or sparse with a
//! lazily applied per-feature affine map and per-row scale.

/// Compressed sparse rows, 0-based column indices, strictly increasing
/// within each row.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CsrMatrix {
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    pub ncols: usize,
}

impl CsrMatrix {
    pub fn nrows(&self) -> usize {
        self.indptr.len().saturating_sub(1)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    fn select_rows(&self, rows: &[usize]) -> Self {
        let mut out = CsrMatrix { indptr: vec![0], ncols: self.ncols, ..Default::default() };
        for &i in rows {
            for (j, v) in self.row(i) {
                out.indices.push(j);
                out.values.push(v);
            }
            out.indptr.push(out.indices.len());
        }
        out
    }
}

#[derive(Clone, Debug)]
pub enum Features {
    Sparse(CsrMatrix),
    Dense {
        ncols: usize,
        data: Vec<f64>,
    },
    /// Row `i`, column `j`: `row_scale[i] · (raw[i, j] − mean[j]) · inv_std[j]`.
    Standardized {
        raw: CsrMatrix,
        mean: Vec<f64>,
        inv_std: Vec<f64>,
        row_scale: Vec<f64>,
        /// `Σ_j mean_j · inv_std_j · e_j`, the dense shift of every row.
        shift: Vec<f64>,
    },
}

impl Features {
    /// Lazy standardization followed by unit-row scaling.
    pub fn standardized(raw: CsrMatrix, mean: Vec<f64>, inv_std: Vec<f64>) -> Self {
        let shift: Vec<f64> = mean.iter().zip(&inv_std).map(|(m, s)| m * s).collect();
        let shift_sq: f64 = shift.iter().map(|v| v * v).sum();
        let row_scale = (0..raw.nrows())
            .map(|i| {
                let mut sq = shift_sq;
                for (j, v) in raw.row(i) {
                    let z = (v - mean[j]) * inv_std[j];
                    sq += z * z - shift[j] * shift[j];
                }
                let nrm = sq.max(0.0).sqrt();
                if nrm > 0.0 {
                    1.0 / nrm
                } else {
                    1.0
                }
            })
            .collect();
        Features::Standardized { raw, mean, inv_std, row_scale, shift }
    }

    pub fn nrows(&self) -> usize {
        match self {
            Features::Sparse(m) => m.nrows(),
            Features::Dense { ncols, data } => {
                if *ncols == 0 {
                    0
                } else {
                    data.len() / ncols
                }
            }
            Features::Standardized { raw, .. } => raw.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Features::Sparse(m) => m.ncols,
            Features::Dense { ncols, .. } => *ncols,
            Features::Standardized { raw, .. } => raw.ncols,
        }
    }

    /// `a_iᵀ w`.
    #[inline]
    pub fn row_dot(&self, i: usize, w: &[f64]) -> f64 {
        match self {
            Features::Sparse(m) => m.row(i).map(|(j, v)| v * w[j]).sum(),
            Features::Dense { ncols, data } => crate::base::dot(&data[i * ncols..(i + 1) * ncols], w),
            Features::Standardized { raw, inv_std, row_scale, shift, .. } => {
                let nz: f64 = raw.row(i).map(|(j, v)| v * inv_std[j] * w[j]).sum();
                row_scale[i] * (nz - crate::base::dot(shift, w))
            }
        }
    }

    /// `out += alpha · a_i`.
    #[inline]
    pub fn row_axpy(&self, i: usize, alpha: f64, out: &mut [f64]) {
        match self {
            Features::Sparse(m) => {
                for (j, v) in m.row(i) {
                    out[j] += alpha * v;
                }
            }
            Features::Dense { ncols, data } => crate::base::axpy(alpha, &data[i * ncols..(i + 1) * ncols], out),
            Features::Standardized { raw, inv_std, row_scale, shift, .. } => {
                let a = alpha * row_scale[i];
                crate::base::axpy(-a, shift, out);
                for (j, v) in raw.row(i) {
                    out[j] += a * v * inv_std[j];
                }
            }
        }
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Features::Sparse(m) => m.row(i).find(|&(k, _)| k == j).map_or(0.0, |(_, v)| v),
            Features::Dense { ncols, data } => data[i * ncols + j],
            Features::Standardized { raw, mean, inv_std, row_scale, .. } => {
                let v = raw.row(i).find(|&(k, _)| k == j).map_or(0.0, |(_, v)| v);
                row_scale[i] * (v - mean[j]) * inv_std[j]
            }
        }
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        match self {
            Features::Sparse(m) => m.row(i).map(|(_, v)| v * v).sum::<f64>().sqrt(),
            Features::Dense { ncols, data } => crate::base::norm(&data[i * ncols..(i + 1) * ncols]),
            Features::Standardized { raw, mean, inv_std, row_scale, shift } => {
                let mut sq: f64 = shift.iter().map(|v| v * v).sum();
                for (j, v) in raw.row(i) {
                    let z = (v - mean[j]) * inv_std[j];
                    sq += z * z - shift[j] * shift[j];
                }
                row_scale[i] * sq.max(0.0).sqrt()
            }
        }
    }

    /// Explicit (nonzero) entries as CSR.
    pub fn to_csr(&self) -> CsrMatrix {
        match self {
            Features::Sparse(m) => m.clone(),
            _ => {
                let mut out = CsrMatrix { indptr: vec![0], ncols: self.ncols(), ..Default::default() };
                for i in 0..self.nrows() {
                    for j in 0..self.ncols() {
                        let v = self.get(i, j);
                        if v != 0.0 {
                            out.indices.push(j);
                            out.values.push(v);
                        }
                    }
                    out.indptr.push(out.indices.len());
                }
                out
            }
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        match self {
            Features::Sparse(m) => Features::Sparse(m.select_rows(rows)),
            Features::Dense { ncols, data } => Features::Dense {
                ncols: *ncols,
                data: rows.iter().flat_map(|&i| data[i * ncols..(i + 1) * ncols].iter().copied()).collect(),
            },
            Features::Standardized { raw, mean, inv_std, row_scale, shift } => Features::Standardized {
                raw: raw.select_rows(rows),
                mean: mean.clone(),
                inv_std: inv_std.clone(),
                row_scale: rows.iter().map(|&i| row_scale[i]).collect(),
                shift: shift.clone(),
            },
        }
    }

    /// Same features with every row divided by its 2-norm (zero rows kept).
    pub fn normalized_rows(&self) -> Self {
        let inv = |n: f64| if n > 0.0 { 1.0 / n } else { 1.0 };
        match self {
            Features::Sparse(m) => {
                let mut m = m.clone();
                for i in 0..m.nrows() {
                    let s = inv(m.row(i).map(|(_, v)| v * v).sum::<f64>().sqrt());
                    for v in &mut m.values[m.indptr[i]..m.indptr[i + 1]] {
                        *v *= s;
                    }
                }
                Features::Sparse(m)
            }
            Features::Dense { ncols, data } => {
                let mut data = data.clone();
                for row in data.chunks_mut(*ncols) {
                    let s = inv(crate::base::norm(row));
                    crate::base::scale(s, row);
                }
                Features::Dense { ncols: *ncols, data }
            }
            Features::Standardized { raw, mean, inv_std, row_scale, shift } => {
                let row_scale = (0..raw.nrows()).map(|i| row_scale[i] * inv(self.row_norm(i))).collect();
                Features::Standardized { raw: raw.clone(), mean: mean.clone(), inv_std: inv_std.clone(), row_scale, shift: shift.clone() }
            }
        }
    }

    /// Same storage with the column count raised to `ncols` (new columns zero).
    pub fn with_ncols(self, ncols: usize) -> Self {
        match self {
            Features::Sparse(mut m) => {
                m.ncols = m.ncols.max(ncols);
                Features::Sparse(m)
            }
            other if other.ncols() >= ncols => other,
            Features::Dense { ncols: old, data } => {
                let n = data.len().checked_div(old).unwrap_or(0);
                let mut out = vec![0.0; n * ncols];
                for i in 0..n {
                    out[i * ncols..i * ncols + old].copy_from_slice(&data[i * old..(i + 1) * old]);
                }
                Features::Dense { ncols, data: out }
            }
            Features::Standardized { mut raw, mut mean, mut inv_std, row_scale, mut shift } => {
                raw.ncols = ncols;
                mean.resize(ncols, 0.0);
                inv_std.resize(ncols, 1.0);
                shift.resize(ncols, 0.0);
                Features::Standardized { raw, mean, inv_std, row_scale, shift }
            }
        }
    }
}
