use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Sparse row as `(column, value)` pairs with strictly increasing columns.
pub type SparseRow = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    Dense(Array2<f64>),
    Sparse { dim: usize, rows: Vec<SparseRow> },
}

impl Features {
    pub fn num_rows(&self) -> usize {
        match self {
            Features::Dense(m) => m.nrows(),
            Features::Sparse { rows, .. } => rows.len(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Features::Dense(m) => m.ncols(),
            Features::Sparse { dim, .. } => *dim,
        }
    }

    pub fn row_dot(&self, i: usize, w: &Array1<f64>) -> f64 {
        match self {
            Features::Dense(m) => m.row(i).dot(w),
            Features::Sparse { rows, .. } => rows[i].iter().map(|&(j, v)| v * w[j]).sum(),
        }
    }

    /// `out += scale * row_i`.
    pub fn add_row(&self, i: usize, scale: f64, out: &mut Array1<f64>) {
        match self {
            Features::Dense(m) => out.scaled_add(scale, &m.row(i)),
            Features::Sparse { rows, .. } => {
                for &(j, v) in &rows[i] {
                    out[j] += scale * v;
                }
            }
        }
    }

    pub fn row_norm_sq(&self, i: usize) -> f64 {
        match self {
            Features::Dense(m) => m.row(i).dot(&m.row(i)),
            Features::Sparse { rows, .. } => rows[i].iter().map(|&(_, v)| v * v).sum(),
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        match self {
            Features::Dense(m) => m.clone(),
            Features::Sparse { dim, rows } => {
                let mut m = Array2::zeros((rows.len(), *dim));
                for (i, row) in rows.iter().enumerate() {
                    for &(j, v) in row {
                        m[[i, j]] = v;
                    }
                }
                m
            }
        }
    }
}

/// Feature rows with binary labels in `{0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Features,
    pub labels: Array1<f64>,
}

impl Dataset {
    pub fn new(features: Features, labels: Array1<f64>) -> Result<Self> {
        if features.num_rows() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} feature rows but {} labels",
                features.num_rows(),
                labels.len()
            )));
        }
        if features.num_rows() == 0 || features.dim() == 0 {
            return Err(Error::InvalidArgument("empty dataset".into()));
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 0.0 && y != 1.0) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} is not in {{0, 1}}"
            )));
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.dim()
    }

    /// Fraction of rows with label 1.
    pub fn positive_fraction(&self) -> f64 {
        self.labels.sum() / self.len() as f64
    }
}
