//! Feature sets, cost matrices and partial matchings.
//!
//! All indices are 0-based, including those written to reports.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, MatchingError, Result};

/// An ordered collection of `n >= 1` finite vectors sharing a dimension `d >= 1`.
///
/// Stored row-major in a single buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    data: Vec<f64>,
    len: usize,
    dim: usize,
}

impl FeatureSet {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let first = vectors.first().ok_or(Error::EmptyFeatureSet)?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut data = Vec::with_capacity(vectors.len() * dim);
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::RaggedVectors {
                    index,
                    expected: dim,
                    found: v.len(),
                });
            }
            data.extend_from_slice(v);
        }
        Self::from_flat(data, dim)
    }

    /// Builds a set from a row-major buffer whose length is a multiple of `dim`.
    pub fn from_flat(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.is_empty() {
            return Err(Error::EmptyFeatureSet);
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::RaggedVectors {
                index: data.len() / dim,
                expected: dim,
                found: data.len() % dim,
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: pos / dim,
                coord: pos % dim,
            });
        }
        let len = data.len() / dim;
        Ok(Self { data, len, dim })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false: a feature set holds at least one vector.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_flat(self.data.iter().map(|v| v * factor).collect(), self.dim)
    }
}

/// Dense `n x m` matrix of nonnegative finite costs, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    costs: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, costs: Vec<f64>) -> Result<Self> {
        if costs.len() != rows * cols {
            return Err(Error::CostShape {
                expected: rows * cols,
                found: costs.len(),
            });
        }
        if let Some(pos) = costs.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidCost {
                row: pos / cols,
                col: pos % cols,
                value: costs[pos],
            });
        }
        Ok(Self { costs, rows, cols })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(n * m);
        for r in rows {
            if r.len() != m {
                return Err(Error::CostShape {
                    expected: n * m,
                    found: n * r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        Self::new(n, m, flat)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.costs[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.costs[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max(&self) -> f64 {
        self.costs.iter().copied().fold(0.0, f64::max)
    }

    pub fn transposed(&self) -> Self {
        let mut out = vec![0.0; self.costs.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.get(i, j);
            }
        }
        Self {
            costs: out,
            rows: self.cols,
            cols: self.rows,
        }
    }

    /// Sum of the costs of the given pairs.
    pub fn cost_of(&self, matching: &PartialMatching) -> f64 {
        matching.pairs().iter().map(|&(i, j)| self.get(i, j)).sum()
    }
}

/// Squared Euclidean distances `d_ij = |x_i - y_j|^2`.
///
/// Rows are computed in parallel; each entry is the plain sequential sum, so
/// the result does not depend on the thread count.
pub fn squared_distance_matrix(x: &FeatureSet, y: &FeatureSet) -> Result<CostMatrix> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    let m = y.len();
    let mut costs = vec![0.0; x.len() * m];
    costs
        .par_chunks_mut(m)
        .zip(x.as_flat().par_chunks(x.dim()))
        .for_each(|(row, xi)| {
            for (out, yj) in row.iter_mut().zip(y.iter()) {
                *out = xi.iter().zip(yj).map(|(a, b)| (a - b) * (a - b)).sum();
            }
        });
    CostMatrix::new(x.len(), m, costs)
}

/// An injective partial map from left indices to right indices.
///
/// Pairs are kept sorted by left index. Construction does not check
/// injectivity; use [`validate_matching`] for that.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartialMatching {
    pairs: Vec<(usize, usize)>,
}

impl PartialMatching {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        Self { pairs }
    }

    /// The identity map on `0..k`.
    pub fn identity(k: usize) -> Self {
        Self {
            pairs: (0..k).map(|i| (i, i)).collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Image of left index `i`, if matched.
    pub fn get(&self, i: usize) -> Option<usize> {
        self.pairs
            .binary_search_by_key(&i, |&(l, _)| l)
            .ok()
            .map(|pos| self.pairs[pos].1)
    }

    /// Support of the map (matched left indices), ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|&(i, _)| i)
    }

    /// The same pairs with left and right swapped.
    pub fn inverted(&self) -> Self {
        Self::from_pairs(self.pairs.iter().map(|&(i, j)| (j, i)).collect())
    }

    /// Restriction of the map to the left indices accepted by `keep`.
    pub fn restricted(&self, keep: impl Fn(usize) -> bool) -> Self {
        Self {
            pairs: self.pairs.iter().copied().filter(|&(i, _)| keep(i)).collect(),
        }
    }
}

/// Checks injectivity and index ranges for an `n x m` problem.
pub fn validate_matching(p: &PartialMatching, n: usize, m: usize) -> Result<(), MatchingError> {
    let mut left_seen = vec![false; n];
    let mut right_seen = vec![false; m];
    for &(i, j) in p.pairs() {
        if i >= n || j >= m {
            return Err(MatchingError::OutOfRange {
                left: i,
                right: j,
                n,
                m,
            });
        }
        if std::mem::replace(&mut left_seen[i], true) {
            return Err(MatchingError::DuplicateLeft(i));
        }
        if std::mem::replace(&mut right_seen[j], true) {
            return Err(MatchingError::DuplicateRight(j));
        }
    }
    Ok(())
}

/// Noiseless features, true matching and noise levels behind an observed pair of sets.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pi_star: PartialMatching,
    theta: FeatureSet,
    theta_sharp: FeatureSet,
    sigma: f64,
    sigma_sharp: f64,
}

impl GroundTruth {
    /// Requires `theta[i] == theta_sharp[pi_star(i)]` exactly on the support.
    pub fn new(
        pi_star: PartialMatching,
        theta: FeatureSet,
        theta_sharp: FeatureSet,
        sigma: f64,
        sigma_sharp: f64,
    ) -> Result<Self> {
        if theta.dim() != theta_sharp.dim() {
            return Err(Error::DimensionMismatch {
                left: theta.dim(),
                right: theta_sharp.dim(),
            });
        }
        validate_matching(&pi_star, theta.len(), theta_sharp.len())?;
        if !(sigma >= 0.0 && sigma.is_finite() && sigma_sharp >= 0.0 && sigma_sharp.is_finite()) {
            return Err(Error::GroundTruth(format!(
                "noise levels must be finite and nonnegative, got {sigma} and {sigma_sharp}"
            )));
        }
        for &(i, j) in pi_star.pairs() {
            if theta.vector(i) != theta_sharp.vector(j) {
                return Err(Error::GroundTruth(format!(
                    "inlier pair ({i}, {j}) has distinct noiseless features"
                )));
            }
        }
        Ok(Self {
            pi_star,
            theta,
            theta_sharp,
            sigma,
            sigma_sharp,
        })
    }

    pub fn pi_star(&self) -> &PartialMatching {
        &self.pi_star
    }

    pub fn k_star(&self) -> usize {
        self.pi_star.len()
    }

    pub fn theta(&self) -> &FeatureSet {
        &self.theta
    }

    pub fn theta_sharp(&self) -> &FeatureSet {
        &self.theta_sharp
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sigma_sharp(&self) -> f64 {
        self.sigma_sharp
    }

    /// Total noise variance `sigma^2 + sigma_sharp^2`.
    pub fn sigma0_sq(&self) -> f64 {
        self.sigma * self.sigma + self.sigma_sharp * self.sigma_sharp
    }
}
