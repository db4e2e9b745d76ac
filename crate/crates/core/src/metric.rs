//! Distance metrics and batched distance matrices.
//!
//! All arithmetic is done in `f64`. Per-pair sums run sequentially over the
//! feature dimension, so row-parallel matrix construction is bit-identical to
//! the sequential computation.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureSet, Sample};

const SYMMETRY_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-9;

/// Dense row-major matrix of distances, rows indexed by queries and columns by
/// references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(DistanceMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged distance rows".into()));
        }
        Self::new(rows.len(), cols, rows.iter().flatten().copied().collect())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }
}

/// Validated Mahalanobis matrix (symmetric, positive semi-definite within
/// tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct MahalanobisMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl MahalanobisMatrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::InvalidMetric(format!(
                "mahalanobis matrix must be {dim}x{dim} with {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMetric("mahalanobis matrix has non-finite entries".into()));
        }
        let max_abs = data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let sym_tol = SYMMETRY_TOL * max_abs.max(1.0);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (data[i * dim + j], data[j * dim + i]);
                if (a - b).abs() > sym_tol {
                    return Err(Error::InvalidMetric(format!(
                        "mahalanobis matrix not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        let m = DMatrix::from_row_slice(dim, dim, &data);
        let sym = (&m + m.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let spectral = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL * spectral {
            return Err(Error::InvalidMetric(format!(
                "mahalanobis matrix is not positive semi-definite (min eigenvalue {min_eig:e}, spectral norm {spectral:e})"
            )));
        }
        Ok(MahalanobisMatrix { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        MahalanobisMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn quadratic_form(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.dim;
        let mut total = 0.0;
        for i in 0..n {
            let di = a[i] - b[i];
            let row = &self.data[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for j in 0..n {
                acc += row[j] * (a[j] - b[j]);
            }
            total += di * acc;
        }
        total
    }
}

/// Distances supplied up front. Rows and columns may carry sample ids, in
/// which case lookups between arbitrary samples resolve by id.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecomputedDistances {
    matrix: DistanceMatrix,
    row_ids: Option<Vec<u64>>,
    col_ids: Option<Vec<u64>>,
    row_index: HashMap<u64, usize>,
    col_index: HashMap<u64, usize>,
}

impl PrecomputedDistances {
    /// Positional matrix without ids: usable only where the query/reference
    /// shapes match exactly.
    pub fn new(matrix: DistanceMatrix) -> Result<Self> {
        Self::validate(&matrix)?;
        Ok(PrecomputedDistances {
            matrix,
            row_ids: None,
            col_ids: None,
            row_index: HashMap::new(),
            col_index: HashMap::new(),
        })
    }

    pub fn with_ids(matrix: DistanceMatrix, row_ids: Vec<u64>, col_ids: Vec<u64>) -> Result<Self> {
        Self::validate(&matrix)?;
        let (r, c) = matrix.shape();
        if row_ids.len() != r || col_ids.len() != c {
            return Err(Error::ShapeMismatch(format!(
                "{r}x{c} matrix labelled with {} row ids and {} column ids",
                row_ids.len(),
                col_ids.len()
            )));
        }
        let row_index: HashMap<u64, usize> = row_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let col_index: HashMap<u64, usize> = col_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        if row_index.len() != r || col_index.len() != c {
            return Err(Error::InvalidMetric(
                "duplicate ids in precomputed matrix labels".into(),
            ));
        }
        Ok(PrecomputedDistances {
            matrix,
            row_ids: Some(row_ids),
            col_ids: Some(col_ids),
            row_index,
            col_index,
        })
    }

    fn validate(matrix: &DistanceMatrix) -> Result<()> {
        if let Some(v) = matrix.as_slice().iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidMetric(format!(
                "precomputed distances must be finite and nonnegative, found {v}"
            )));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &DistanceMatrix {
        &self.matrix
    }

    pub fn row_ids(&self) -> Option<&[u64]> {
        self.row_ids.as_deref()
    }

    pub fn col_ids(&self) -> Option<&[u64]> {
        self.col_ids.as_deref()
    }

    /// Looks up `d(a, b)`, trying the transposed entry when `a` is not a row
    /// label.
    pub fn lookup(&self, a: u64, b: u64) -> Option<f64> {
        if let (Some(&r), Some(&c)) = (self.row_index.get(&a), self.col_index.get(&b)) {
            return Some(self.matrix.get(r, c));
        }
        if let (Some(&r), Some(&c)) = (self.row_index.get(&b), self.col_index.get(&a)) {
            return Some(self.matrix.get(r, c));
        }
        None
    }

    fn is_labelled(&self) -> bool {
        self.row_ids.is_some()
    }
}

/// Distance strategy used to compare feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum DistanceMetric {
    Euclidean,
    SquaredEuclidean,
    Mahalanobis(MahalanobisMatrix),
    Precomputed(PrecomputedDistances),
}

impl DistanceMetric {
    pub fn mahalanobis(dim: usize, data: Vec<f64>) -> Result<Self> {
        MahalanobisMatrix::new(dim, data).map(DistanceMetric::Mahalanobis)
    }

    pub fn name(&self) -> &'static str {
        match self {
            DistanceMetric::Euclidean => "euclidean",
            DistanceMetric::SquaredEuclidean => "squared_euclidean",
            DistanceMetric::Mahalanobis(_) => "mahalanobis",
            DistanceMetric::Precomputed(_) => "precomputed",
        }
    }

    pub fn is_precomputed(&self) -> bool {
        matches!(self, DistanceMetric::Precomputed(_))
    }

    /// Distance between two raw vectors. Precomputed metrics are index based
    /// and rejected here.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                actual: b.len(),
            });
        }
        match self {
            DistanceMetric::Precomputed(_) => Err(Error::InvalidMetric(
                "precomputed distances are looked up by id, not computed from vectors".into(),
            )),
            DistanceMetric::Mahalanobis(m) if m.dim() != a.len() => Err(Error::DimensionMismatch {
                expected: m.dim(),
                actual: a.len(),
            }),
            _ => Ok(self.vector_distance(a, b)),
        }
    }

    /// Distance between two identified samples; works for every metric kind.
    pub fn between(&self, a: Sample<'_>, b: Sample<'_>) -> Result<f64> {
        match self {
            DistanceMetric::Precomputed(p) => p.lookup(a.id, b.id).ok_or_else(|| {
                Error::ShapeMismatch(format!("no precomputed distance between ids {} and {}", a.id, b.id))
            }),
            _ => self.distance(a.vector, b.vector),
        }
    }

    /// Checks that every pair drawn from `a` x `b` can be evaluated, so that
    /// [`DistanceMetric::eval`] may be used without further error handling.
    pub(crate) fn check_compatible(&self, a: &FeatureSet, b: &FeatureSet) -> Result<()> {
        match self {
            DistanceMetric::Precomputed(p) => {
                for sa in a.ids() {
                    for sb in b.ids() {
                        if p.lookup(*sa, *sb).is_none() {
                            return Err(Error::ShapeMismatch(format!(
                                "no precomputed distance between ids {sa} and {sb}"
                            )));
                        }
                    }
                }
                Ok(())
            }
            _ => self.check_dim(a.dim()).and_then(|_| self.check_dim(b.dim())),
        }
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            DistanceMetric::Mahalanobis(m) if m.dim() != dim => Err(Error::DimensionMismatch {
                expected: m.dim(),
                actual: dim,
            }),
            _ => Ok(()),
        }
    }

    /// Unchecked evaluation for pairs validated by `check_compatible`.
    #[inline]
    pub(crate) fn eval(&self, a: Sample<'_>, b: Sample<'_>) -> f64 {
        match self {
            DistanceMetric::Precomputed(p) => p.lookup(a.id, b.id).unwrap_or(f64::NAN),
            _ => self.vector_distance(a.vector, b.vector),
        }
    }

    #[inline]
    fn vector_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            DistanceMetric::Euclidean => squared_l2(a, b).sqrt(),
            DistanceMetric::SquaredEuclidean => squared_l2(a, b),
            DistanceMetric::Mahalanobis(m) => m.quadratic_form(a, b).max(0.0).sqrt(),
            DistanceMetric::Precomputed(_) => f64::NAN,
        }
    }

    /// Computes the |queries| x |refs| distance matrix.
    pub fn distance_matrix(&self, queries: &FeatureSet, refs: &FeatureSet) -> Result<DistanceMatrix> {
        if let DistanceMetric::Precomputed(p) = self {
            let (r, c) = p.matrix.shape();
            let same_labels = match (p.row_ids(), p.col_ids()) {
                (Some(rows), Some(cols)) => rows == queries.ids() && cols == refs.ids(),
                _ => true,
            };
            if (r, c) == (queries.len(), refs.len()) && same_labels {
                return Ok(p.matrix.clone());
            }
            if !p.is_labelled() {
                return Err(Error::ShapeMismatch(format!(
                    "precomputed matrix is {r}x{c}, expected {}x{}",
                    queries.len(),
                    refs.len()
                )));
            }
        } else if queries.dim() != refs.dim() {
            return Err(Error::DimensionMismatch {
                expected: queries.dim(),
                actual: refs.dim(),
            });
        }
        self.check_compatible(queries, refs)?;
        let cols = refs.len();
        let mut data = vec![0.0; queries.len() * cols];
        data.par_chunks_mut(cols).enumerate().for_each(|(i, out)| {
            let q = queries.sample(i);
            for (j, slot) in out.iter_mut().enumerate() {
                *slot = self.eval(q, refs.sample(j));
            }
        });
        DistanceMatrix::new(queries.len(), cols, data)
    }
}

#[inline]
fn squared_l2(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}
