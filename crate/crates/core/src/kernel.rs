//! Bipolar patterns, the RBF kernel, and Gram matrix construction.

use crate::{Error, Result};
use rand::Rng;

/// A vector with entries in `{-1, +1}`.
///
/// Network states and stored patterns are both bipolar vectors; the owning
/// structure fixes the network size `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipolarVector {
    values: Vec<i8>,
}

impl BipolarVector {
    /// Validates that every entry is exactly -1 or +1.
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| *v != 1 && *v != -1) {
            return Err(Error::InvalidParameter(format!(
                "bipolar entry at index {pos} is {}, expected -1 or +1",
                values[pos]
            )));
        }
        Ok(Self { values })
    }

    /// Samples `n` i.i.d. uniform +/-1 bits.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let values = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn get(&self, i: usize) -> i8 {
        self.values[i]
    }

    /// Flips the sign of entry `i`.
    pub fn flip(&mut self, i: usize) {
        self.values[i] = -self.values[i];
    }

    /// Number of disagreeing coordinates.
    pub fn hamming(&self, other: &Self) -> Result<usize> {
        check_same_len(self, other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .filter(|(a, b)| a != b)
            .count())
    }
}

fn check_same_len(x: &BipolarVector, y: &BipolarVector) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { left: x.len(), right: y.len() });
    }
    Ok(())
}

/// RBF kernel parameters: `K(x, y) = exp(-gamma * ||x - y||^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    gamma: f64,
}

impl KernelParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidGamma(gamma));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// The `P` stored patterns of a network of size `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    n: usize,
    patterns: Vec<BipolarVector>,
}

impl PatternSet {
    pub fn new(n: usize, patterns: Vec<BipolarVector>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("network size must be positive".into()));
        }
        if patterns.is_empty() {
            return Err(Error::InvalidParameter("pattern set must store at least one pattern".into()));
        }
        for (mu, p) in patterns.iter().enumerate() {
            if p.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "pattern {mu} has length {}, expected {n}",
                    p.len()
                )));
            }
        }
        Ok(Self { n, patterns })
    }

    /// Samples `p` uniform random patterns of length `n`.
    pub fn random<R: Rng>(n: usize, p: usize, rng: &mut R) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("pattern set must store at least one pattern".into()));
        }
        let patterns = (0..p).map(|_| BipolarVector::random(n, rng)).collect();
        Self::new(n, patterns)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored patterns `P`.
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn pattern(&self, mu: usize) -> &BipolarVector {
        &self.patterns[mu]
    }

    pub fn iter(&self) -> impl Iterator<Item = &BipolarVector> {
        self.patterns.iter()
    }
}

/// Squared Euclidean distance between two bipolar vectors.
///
/// Every disagreeing coordinate contributes `(1 - (-1))^2 = 4`, so this is
/// exactly four times the Hamming distance; the identity is cross-checked
/// against the coordinate-wise summation in tests.
pub fn squared_distance(x: &BipolarVector, y: &BipolarVector) -> Result<f64> {
    Ok(4.0 * x.hamming(y)? as f64)
}

/// `exp(-gamma * ||x - y||^2)`, always in `(0, 1]` for bipolar inputs.
pub fn rbf_kernel(x: &BipolarVector, y: &BipolarVector, params: &KernelParams) -> Result<f64> {
    Ok((-params.gamma() * squared_distance(x, y)?).exp())
}

/// Dense symmetric `P x P` Gram matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    p: usize,
    data: Vec<f64>,
}

impl Gram {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.data[mu * self.p + nu]
    }

    pub fn row(&self, mu: usize) -> &[f64] {
        &self.data[mu * self.p..(mu + 1) * self.p]
    }

    pub(crate) fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Pairwise kernel matrix of the stored patterns.
///
/// Each off-diagonal entry is computed once and mirrored, so the result is
/// symmetric to exact equality, with a unit diagonal.
pub fn gram_matrix(ps: &PatternSet, params: &KernelParams) -> Gram {
    let p = ps.len();
    let mut data = vec![0.0; p * p];
    for mu in 0..p {
        data[mu * p + mu] = 1.0;
        for nu in mu + 1..p {
            let k = rbf_kernel(ps.pattern(mu), ps.pattern(nu), params)
                .expect("patterns in a set share one length");
            data[mu * p + nu] = k;
            data[nu * p + mu] = k;
        }
    }
    Gram { p, data }
}
