//! PCA from the raw embedding space down to the analysis space.
//!
//! The covariance is accumulated in fixed-size row blocks in input order and
//! eigendecomposed with a deterministic symmetric solver, so identical input
//! always yields a bitwise-identical model. Components are ordered by
//! descending variance; each column's largest-magnitude coefficient is made
//! non-negative.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::vectors::{Points, VectorSet};

pub const PPC1_MAGIC: [u8; 4] = *b"PPC1";

const BLOCK_ROWS: usize = 2048;
/// Relative gap under which two eigenvalues are treated as tied.
const EIGEN_TIE_RTOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum PcaError {
    #[error("target dimensionality {d} exceeds input width {raw}")]
    TooManyComponents { d: usize, raw: usize },
    #[error("target dimensionality must be at least 1")]
    ZeroComponents,
    #[error("need at least 2 rows to estimate a covariance, got {0}")]
    TooFewRows(usize),
    #[error("non-finite input value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("width mismatch: model expects {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("malformed PPC1 model: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A fitted projection: `mean` (length `raw_dim`), `basis` (`raw_dim x dims`,
/// orthonormal columns) and per-component variances.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: DVector<f64>,
    basis: DMatrix<f64>,
    explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn raw_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn dims(&self) -> usize {
        self.basis.ncols()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    /// Keeps the leading `d` components.
    pub fn truncate(&self, d: usize) -> Result<PcaModel, PcaError> {
        if d == 0 {
            return Err(PcaError::ZeroComponents);
        }
        if d > self.dims() {
            return Err(PcaError::TooManyComponents { d, raw: self.dims() });
        }
        Ok(PcaModel {
            mean: self.mean.clone(),
            basis: self.basis.columns(0, d).into_owned(),
            explained_variance: self.explained_variance[..d].to_vec(),
        })
    }

    /// `(vectors - mean) * basis`.
    pub fn transform(&self, points: &Points) -> Result<Points, PcaError> {
        self.transform_rows(points.dim(), points.len(), |i| {
            points.row(i).to_vec()
        })
    }

    pub fn transform_set(&self, set: &VectorSet) -> Result<Points, PcaError> {
        self.transform_rows(set.dim(), set.len(), |i| {
            set.row(i).iter().map(|&v| f64::from(v)).collect()
        })
    }

    fn transform_rows(
        &self,
        width: usize,
        n: usize,
        row: impl Fn(usize) -> Vec<f64>,
    ) -> Result<Points, PcaError> {
        if width != self.raw_dim() {
            return Err(PcaError::WidthMismatch {
                expected: self.raw_dim(),
                got: width,
            });
        }
        let d = self.dims();
        let mut out = Vec::with_capacity(n * d);
        let mut start = 0;
        while start < n {
            let rows = BLOCK_ROWS.min(n - start);
            let mut block = DMatrix::<f64>::zeros(rows, width);
            for r in 0..rows {
                let v = row(start + r);
                for (c, x) in v.iter().enumerate() {
                    block[(r, c)] = x - self.mean[c];
                }
            }
            let proj = block * &self.basis;
            for r in 0..rows {
                out.extend(proj.row(r).iter());
            }
            start += rows;
        }
        Ok(Points::new(d, out).expect("projection has consistent width"))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let (raw, d) = (self.raw_dim(), self.dims());
        let mut out = Vec::with_capacity(12 + 8 * (raw + raw * d + d));
        out.extend_from_slice(&PPC1_MAGIC);
        out.extend_from_slice(&(raw as u32).to_le_bytes());
        out.extend_from_slice(&(d as u32).to_le_bytes());
        // nalgebra storage is column-major already
        for v in self
            .mean
            .iter()
            .chain(self.basis.iter())
            .chain(self.explained_variance.iter())
        {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<PcaModel, PcaError> {
        if buf.len() < 12 || buf[..4] != PPC1_MAGIC {
            return Err(PcaError::Format("missing PPC1 magic".into()));
        }
        let raw = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
        let d = u32::from_le_bytes(buf[8..12].try_into().unwrap()) as usize;
        if raw == 0 || d == 0 || d > raw {
            return Err(PcaError::Format(format!("invalid shape D_raw={raw}, D={d}")));
        }
        let count = raw + raw * d + d;
        if buf.len() != 12 + 8 * count {
            return Err(PcaError::Format(format!(
                "expected {} bytes, found {}",
                12 + 8 * count,
                buf.len()
            )));
        }
        let vals: Vec<f64> = buf[12..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(PcaError::Format("non-finite value".into()));
        }
        Ok(PcaModel {
            mean: DVector::from_column_slice(&vals[..raw]),
            basis: DMatrix::from_column_slice(raw, d, &vals[raw..raw + raw * d]),
            explained_variance: vals[raw + raw * d..].to_vec(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), PcaError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<PcaModel, PcaError> {
        Self::from_bytes(&fs::read(path)?)
    }
}

/// Full eigendecomposition of a pooled covariance; truncate it to any `d`.
pub fn fit_full<'a, I, F>(width: usize, rows: F) -> Result<PcaModel, PcaError>
where
    F: Fn() -> I,
    I: Iterator<Item = &'a [f64]>,
{
    if width == 0 {
        return Err(PcaError::ZeroComponents);
    }
    let mut n = 0usize;
    let mut sum = vec![0.0f64; width];
    for (r, row) in rows().enumerate() {
        if row.len() != width {
            return Err(PcaError::WidthMismatch {
                expected: width,
                got: row.len(),
            });
        }
        for (c, (s, v)) in sum.iter_mut().zip(row).enumerate() {
            if !v.is_finite() {
                return Err(PcaError::NonFinite { row: r, col: c });
            }
            *s += v;
        }
        n += 1;
    }
    if n < 2 {
        return Err(PcaError::TooFewRows(n));
    }
    let mean = DVector::from_iterator(width, sum.iter().map(|s| s / n as f64));

    let mut scatter = DMatrix::<f64>::zeros(width, width);
    let mut block = DMatrix::<f64>::zeros(BLOCK_ROWS, width);
    let mut filled = 0;
    let flush = |block: &DMatrix<f64>, filled: usize, scatter: &mut DMatrix<f64>| {
        let b = block.rows(0, filled);
        scatter.gemm_tr(1.0, &b, &b, 1.0);
    };
    for row in rows() {
        for (c, v) in row.iter().enumerate() {
            block[(filled, c)] = v - mean[c];
        }
        filled += 1;
        if filled == BLOCK_ROWS {
            flush(&block, filled, &mut scatter);
            filled = 0;
        }
    }
    if filled > 0 {
        flush(&block, filled, &mut scatter);
    }
    let mut cov = scatter / (n as f64 - 1.0);
    // enforce exact symmetry before the symmetric solver
    for i in 0..width {
        for j in 0..i {
            let m = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = m;
            cov[(j, i)] = m;
        }
    }
    let eig = SymmetricEigen::new(cov);
    let (basis, variances) = order_components(eig.eigenvectors, eig.eigenvalues);
    Ok(PcaModel {
        mean,
        basis,
        explained_variance: variances,
    })
}

fn dominant_index(col: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in col.iter().enumerate() {
        if v.abs() > col[best].abs() {
            best = i;
        }
    }
    best
}

fn order_components(vectors: DMatrix<f64>, values: DVector<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let n = values.len();
    let mut cols: Vec<(f64, usize, Vec<f64>)> = (0..n)
        .map(|j| {
            let mut col: Vec<f64> = vectors.column(j).iter().copied().collect();
            let dom = dominant_index(&col);
            if col[dom] < 0.0 {
                col.iter_mut().for_each(|v| *v = -*v);
            }
            (values[j].max(0.0), dom, col)
        })
        .collect();
    cols.sort_by(|a, b| b.0.total_cmp(&a.0));
    let scale = cols.first().map_or(0.0, |c| c.0).max(f64::MIN_POSITIVE);
    // runs of (near-)equal eigenvalues are ordered by dominant coefficient index
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && cols[end - 1].0 - cols[end].0 <= EIGEN_TIE_RTOL * scale {
            end += 1;
        }
        cols[start..end].sort_by_key(|c| c.1);
        start = end;
    }
    let variances = cols.iter().map(|c| c.0).collect();
    let flat: Vec<f64> = cols.into_iter().flat_map(|c| c.2).collect();
    (DMatrix::from_column_slice(n, n, &flat), variances)
}

/// Fits a `d`-component PCA on the pooled rows of `pooled`.
pub fn fit_pca(pooled: &Points, d: usize) -> Result<PcaModel, PcaError> {
    check_d(d, pooled.dim())?;
    fit_full(pooled.dim(), || pooled.rows())?.truncate(d)
}

/// Full-rank fit over the stacked rows of several vector sets, in order.
pub fn fit_pooled_sets(sets: &[VectorSet]) -> Result<PcaModel, PcaError> {
    let width = sets.first().map_or(0, VectorSet::dim);
    let widened: Vec<Points> = sets.iter().map(VectorSet::to_points).collect();
    if let Some(p) = widened.iter().find(|p| p.dim() != width) {
        return Err(PcaError::WidthMismatch {
            expected: width,
            got: p.dim(),
        });
    }
    fit_full(width, || widened.iter().flat_map(|p| p.rows()))
}

fn check_d(d: usize, raw: usize) -> Result<(), PcaError> {
    if d == 0 {
        return Err(PcaError::ZeroComponents);
    }
    if d > raw {
        return Err(PcaError::TooManyComponents { d, raw });
    }
    Ok(())
}
