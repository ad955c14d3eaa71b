//! Structured data as discrete probability measures.
//!
//! A graph with `n` nodes is stored as a histogram `h` over its nodes, one
//! feature per node and a symmetric `n x n` structure matrix `C` holding the
//! pairwise node similarities (typically shortest-path distances). Transport
//! plans between two measures live in the polytope of nonnegative matrices
//! whose row sums are `h` and column sums are `g`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Tolerance for symmetry and diagonal checks on user-supplied structures.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Tolerance used when checking coupling marginals.
pub const MARGINAL_TOL: f64 = 1e-9;

/// Probability weights over the points of a measure. Every bin is strictly
/// positive and the total mass is one.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram(Vec<f64>);

impl Histogram {
    /// Normalizes strictly positive weights to unit mass.
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveWeight { index, value });
            }
        }
        let total: f64 = weights.iter().sum();
        Ok(Self(weights.iter().map(|w| w / total).collect()))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMeasure);
        }
        Ok(Self(alloc::vec![1.0 / n as f64; n]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self(perm.iter().map(|&p| self.0[p]).collect())
    }
}

impl core::ops::Index<usize> for Histogram {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Node features of a measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    /// Real vectors, one row per node, compared with the Euclidean distance.
    /// Zero columns is allowed and makes every feature distance vanish.
    Vectors(Matrix),
    /// Discrete label sequences of equal length `H + 1` (one entry per
    /// Weisfeiler-Lehman iteration), compared by counting mismatches.
    Labels(Vec<Vec<i64>>),
}

impl Features {
    pub fn len(&self) -> usize {
        match self {
            Features::Vectors(m) => m.rows(),
            Features::Labels(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Feature-less nodes: `n x 0` vectors.
    pub fn none(n: usize) -> Self {
        Features::Vectors(Matrix::zeros(n, 0))
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        match self {
            Features::Vectors(m) => Features::Vectors(m.rows_permuted(perm)),
            Features::Labels(l) => Features::Labels(perm.iter().map(|&p| l[p].clone()).collect()),
        }
    }

    fn check_consistent(&self) -> Result<()> {
        if let Features::Labels(seqs) = self {
            if let Some(first) = seqs.first() {
                for s in seqs {
                    if s.len() != first.len() {
                        return Err(Error::DimensionMismatch {
                            context: "label sequence length",
                            expected: first.len(),
                            found: s.len(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// One structured object: weights, features and a structure matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMeasure {
    weights: Histogram,
    features: Features,
    structure: Matrix,
}

/// Validates and assembles a measure. Missing weights default to uniform.
pub fn build_measure(weights: Option<&[f64]>, features: Features, structure: Matrix) -> Result<StructuredMeasure> {
    let n = structure.rows();
    if !structure.is_square() {
        return Err(Error::DimensionMismatch {
            context: "structure matrix columns",
            expected: n,
            found: structure.cols(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyMeasure);
    }
    if features.len() != n {
        return Err(Error::DimensionMismatch {
            context: "feature rows",
            expected: n,
            found: features.len(),
        });
    }
    features.check_consistent()?;
    let weights = match weights {
        Some(w) => {
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "weights",
                    expected: n,
                    found: w.len(),
                });
            }
            Histogram::new(w)?
        }
        None => Histogram::uniform(n)?,
    };

    let mut structure = structure;
    for i in 0..n {
        for k in 0..n {
            let x = structure[(i, k)];
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::NegativeStructureEntry { row: i, col: k });
            }
        }
        if structure[(i, i)] > STRUCTURE_TOL {
            return Err(Error::NonZeroDiagonal { index: i });
        }
        structure[(i, i)] = 0.0;
        for k in 0..i {
            let (a, b) = (structure[(i, k)], structure[(k, i)]);
            if (a - b).abs() > STRUCTURE_TOL {
                return Err(Error::AsymmetricStructure { row: i, col: k });
            }
            let mid = 0.5 * (a + b);
            structure[(i, k)] = mid;
            structure[(k, i)] = mid;
        }
    }

    Ok(StructuredMeasure {
        weights,
        features,
        structure,
    })
}

impl StructuredMeasure {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &Histogram {
        &self.weights
    }

    pub fn features(&self) -> &Features {
        &self.features
    }

    pub fn structure(&self) -> &Matrix {
        &self.structure
    }

    /// Relabels the points: point `i` of `self` becomes point `sigma[i]`.
    pub fn permuted(&self, sigma: &[usize]) -> Result<Self> {
        let perm = crate::graphs::inverse_permutation(sigma, self.len())?;
        let perm = perm.as_slice();
        Ok(Self {
            weights: self.weights.permuted(perm),
            features: self.features.permuted(perm),
            structure: self.structure.permuted(perm),
        })
    }
}

/// A transport plan between two histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling(Matrix);

impl Coupling {
    /// Wraps a matrix after checking nonnegativity and both marginals.
    pub fn new(matrix: Matrix, h: &Histogram, g: &Histogram) -> Result<Self> {
        let c = Self(matrix);
        c.check(h, g, MARGINAL_TOL)?;
        Ok(c)
    }

    /// Wraps a matrix the caller knows to be feasible.
    pub fn from_matrix_unchecked(matrix: Matrix) -> Self {
        Self(matrix)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Largest absolute deviation of the row and column sums from `h`, `g`.
    /// Shape mismatches report infinity.
    pub fn marginal_deviation(&self, h: &Histogram, g: &Histogram) -> f64 {
        if self.0.shape() != (h.len(), g.len()) {
            return f64::INFINITY;
        }
        let rows = self.0.row_sums();
        let cols = self.0.col_sums();
        rows.iter()
            .zip(h.as_slice())
            .chain(cols.iter().zip(g.as_slice()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Checks nonnegativity and marginals within `tol`.
    pub fn check(&self, h: &Histogram, g: &Histogram, tol: f64) -> Result<()> {
        if self.0.shape() != (h.len(), g.len()) {
            return Err(Error::DimensionMismatch {
                context: "coupling shape",
                expected: h.len() * g.len(),
                found: self.0.rows() * self.0.cols(),
            });
        }
        let min = self.0.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
        if min < 0.0 {
            return Err(Error::MarginalMismatch { deviation: -min });
        }
        let deviation = self.marginal_deviation(h, g);
        if deviation > tol {
            return Err(Error::MarginalMismatch { deviation });
        }
        Ok(())
    }
}

/// The independent coupling `h g^T`.
pub fn product_coupling(h: &Histogram, g: &Histogram) -> Coupling {
    Coupling(Matrix::from_fn(h.len(), g.len(), |i, j| h[i] * g[j]))
}

/// The north-west corner coupling: mass of both histograms is matched in
/// index order, as for a monotone coupling of two quantile functions.
pub fn monotone_coupling(h: &Histogram, g: &Histogram) -> Coupling {
    let (n, m) = (h.len(), g.len());
    let mut pi = Matrix::zeros(n, m);
    let (mut i, mut j) = (0, 0);
    let (mut rs, mut rd) = (h[0], g[0]);
    loop {
        let flow = rs.min(rd);
        pi[(i, j)] += flow;
        rs -= flow;
        rd -= flow;
        if i == n - 1 && j == m - 1 {
            break;
        }
        if i == n - 1 {
            j += 1;
            rd = g[j];
        } else if j == m - 1 || rs <= rd {
            i += 1;
            rs = h[i];
        } else {
            j += 1;
            rd = g[j];
        }
    }
    Coupling(pi)
}

/// The diagonal coupling `diag(h)` matching each point with itself.
pub fn identity_coupling(h: &Histogram) -> Coupling {
    Coupling(Matrix::diag(h.as_slice()))
}

/// Pairwise feature distances `M_AB(i, j) = d(a_i, b_j)`.
///
/// Vectors use the Euclidean distance; label sequences count the positions
/// where the two sequences disagree.
pub fn feature_cost_matrix(a: &Features, b: &Features) -> Result<Matrix> {
    match (a, b) {
        (Features::Vectors(a), Features::Vectors(b)) => {
            if a.cols() != b.cols() {
                return Err(Error::DimensionMismatch {
                    context: "feature dimension",
                    expected: a.cols(),
                    found: b.cols(),
                });
            }
            Ok(Matrix::from_fn(a.rows(), b.rows(), |i, j| {
                let sq: f64 = a.row(i).iter().zip(b.row(j)).map(|(x, y)| (x - y) * (x - y)).sum();
                libm::sqrt(sq)
            }))
        }
        (Features::Labels(a), Features::Labels(b)) => {
            let width = a.first().or(b.first()).map_or(0, Vec::len);
            if let Some(bad) = a.iter().chain(b).find(|s| s.len() != width) {
                return Err(Error::DimensionMismatch {
                    context: "label sequence length",
                    expected: width,
                    found: bad.len(),
                });
            }
            Ok(Matrix::from_fn(a.len(), b.len(), |i, j| {
                a[i].iter().zip(&b[j]).filter(|(x, y)| x != y).count() as f64
            }))
        }
        _ => Err(Error::MixedFeatureModes),
    }
}
