//! Dense feature collections used for both probes and galleries.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// A single sample: its stable id and feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<'a> {
    pub id: u64,
    pub vector: &'a [f64],
}

impl<'a> Sample<'a> {
    pub fn new(id: u64, vector: &'a [f64]) -> Self {
        Sample { id, vector }
    }
}

/// Row-major matrix of `n` feature vectors of dimension `dim`, each tagged
/// with a unique id.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    ids: Vec<u64>,
    data: Vec<f64>,
    dim: usize,
}

impl FeatureSet {
    pub fn new(ids: Vec<u64>, data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFeatures("dimension must be at least 1".into()));
        }
        if ids.is_empty() {
            return Err(Error::InvalidFeatures("feature set must not be empty".into()));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::InvalidFeatures(format!(
                "{} ids with dimension {} need {} values, got {}",
                ids.len(),
                dim,
                ids.len() * dim,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidFeatures(format!(
                "non-finite value in row {} column {}",
                pos / dim,
                pos % dim
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(*id) {
                return Err(Error::InvalidFeatures(format!("duplicate id {id}")));
            }
        }
        Ok(FeatureSet { ids, data, dim })
    }

    /// Builds a set from rows, assigning ids `0..rows.len()`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ids = (0..rows.len() as u64).collect();
        Self::with_ids_from_rows(ids, rows)
    }

    pub fn with_ids_from_rows(ids: Vec<u64>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        let data = rows.iter().flatten().copied().collect();
        Self::new(ids, data, dim)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> u64 {
        self.ids[index]
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn sample(&self, index: usize) -> Sample<'_> {
        Sample::new(self.ids[index], self.row(index))
    }

    pub fn samples(&self) -> impl ExactSizeIterator<Item = Sample<'_>> + '_ {
        (0..self.len()).map(move |i| self.sample(i))
    }

    pub fn position(&self, id: u64) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Multiplies every feature by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let data = self.data.iter().map(|v| v * factor).collect();
        Self::new(self.ids.clone(), data, self.dim)
    }
}
