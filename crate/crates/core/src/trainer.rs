//! Kernel logistic regression training of the dual-variable matrix.
//!
//! Each neuron `i` learns a dual vector `alpha_i` over the stored patterns by
//! full-batch gradient descent on the L2-regularized negative log-likelihood
//!
//! ```text
//! L(alpha_i) = -sum_nu [ y log sigma(h_nu) + (1-y) log(1 - sigma(h_nu)) ]
//!              + (lambda/2) alpha_i' K alpha_i,      h = K alpha_i
//! ```
//!
//! where `y[nu] = (xi_i^nu + 1) / 2` is the target bit of pattern `nu` at
//! neuron `i` and `K` is the RBF Gram matrix of the stored patterns.
//!
//! All neurons share the Gram matrix, and their problems are independent.
//! [`train_network`] runs them as one blocked update per iteration, which
//! streams `K` once for all neurons; column `i` of the result is bit-for-bit
//! the output of [`train_neuron`] on target column `i`.

use crate::kernel::{gram_matrix, Gram, KernelParams, PatternSet};
use crate::linalg::{dot_sequential, sym_mat_block};
use crate::{Error, Result};

/// Gradient descent settings. Defaults: learning rate 0.1, weight decay
/// 0.01, 500 iterations, starting from the zero vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub iterations: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.1, weight_decay: 0.01, iterations: 500 }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if !self.weight_decay.is_finite() || self.weight_decay < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "weight decay must be non-negative and finite, got {}",
                self.weight_decay
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iteration count must be positive".into()));
        }
        Ok(())
    }
}

/// Classification targets `y[nu][i] = (xi_i^nu + 1) / 2`, stored pattern-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetBits {
    n: usize,
    p: usize,
    y: Vec<f64>,
}

impl TargetBits {
    pub fn from_patterns(ps: &PatternSet) -> Self {
        let n = ps.n();
        let p = ps.len();
        let mut y = Vec::with_capacity(p * n);
        for pattern in ps.iter() {
            y.extend(pattern.values().iter().map(|&v| if v > 0 { 1.0 } else { 0.0 }));
        }
        Self { n, p, y }
    }

    pub fn get(&self, nu: usize, i: usize) -> f64 {
        self.y[nu * self.n + i]
    }

    /// Target column for neuron `i` (one bit per stored pattern).
    pub fn neuron_column(&self, i: usize) -> Vec<f64> {
        (0..self.p).map(|nu| self.get(nu, i)).collect()
    }

    pub(crate) fn data(&self) -> &[f64] {
        &self.y
    }
}

/// The learned `P x N` dual-variable matrix together with the kernel
/// parameters it was trained under.
///
/// Stored neuron-major so that the dual vector of one neuron is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct DualWeights {
    n: usize,
    p: usize,
    params: KernelParams,
    alpha: Vec<f64>, // alpha[i * p + mu] = alpha_{mu i}
}

impl DualWeights {
    /// Builds weights from neuron-major data, checking shape and finiteness.
    pub fn from_neuron_major(n: usize, p: usize, params: KernelParams, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != n * p {
            return Err(Error::DimensionMismatch { left: alpha.len(), right: n * p });
        }
        if let Some(pos) = alpha.iter().position(|a| !a.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("dual weight for neuron {}, pattern {}", pos / p, pos % p),
            });
        }
        Ok(Self { n, p, params, alpha })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// Dual vector `alpha_i` of neuron `i`, length `P`.
    pub fn neuron(&self, i: usize) -> &[f64] {
        &self.alpha[i * self.p..(i + 1) * self.p]
    }

    /// Single entry `alpha_{mu i}`.
    pub fn entry(&self, mu: usize, i: usize) -> f64 {
        self.alpha[i * self.p + mu]
    }
}

/// Numerically stable logistic sigmoid.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_dims(alpha_i: &[f64], gram: &Gram, y_i: &[f64]) -> Result<()> {
    if alpha_i.len() != gram.p() {
        return Err(Error::DimensionMismatch { left: alpha_i.len(), right: gram.p() });
    }
    if y_i.len() != gram.p() {
        return Err(Error::DimensionMismatch { left: y_i.len(), right: gram.p() });
    }
    Ok(())
}

/// Regularized negative log-likelihood of one neuron's dual vector.
///
/// Log arguments are clamped below at `1e-12`, so saturated sigmoids report a
/// large finite loss instead of infinity.
pub fn klr_loss(alpha_i: &[f64], gram: &Gram, y_i: &[f64], lambda: f64) -> Result<f64> {
    check_dims(alpha_i, gram, y_i)?;
    let p = gram.p();
    let mut h = vec![0.0; p];
    sym_mat_block(gram.data(), p, alpha_i, 1, &mut h);

    let mut nll = 0.0;
    for (&h_nu, &y) in h.iter().zip(y_i) {
        let s = sigmoid(h_nu);
        nll -= y * s.max(1e-12).ln() + (1.0 - y) * (1.0 - s).max(1e-12).ln();
    }
    let reg = 0.5 * lambda * dot_sequential(alpha_i, &h);
    let total = nll + reg;
    if !total.is_finite() {
        return Err(Error::NonFinite { context: "klr_loss".into() });
    }
    Ok(total)
}

/// Gradient of [`klr_loss`] with respect to `alpha_i`:
/// `K (sigma(K alpha_i) - y_i) + lambda K alpha_i`, evaluated as one product
/// with the combined residual.
pub fn klr_gradient(alpha_i: &[f64], gram: &Gram, y_i: &[f64], lambda: f64) -> Result<Vec<f64>> {
    check_dims(alpha_i, gram, y_i)?;
    let p = gram.p();
    let mut h = vec![0.0; p];
    sym_mat_block(gram.data(), p, alpha_i, 1, &mut h);

    let mut v = vec![0.0; p];
    for nu in 0..p {
        v[nu] = sigmoid(h[nu]) - y_i[nu] + lambda * alpha_i[nu];
    }
    let mut g = vec![0.0; p];
    sym_mat_block(gram.data(), p, &v, 1, &mut g);
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { context: "klr_gradient".into() });
    }
    Ok(g)
}

/// Trains one neuron: exactly `cfg.iterations` steps of
/// `alpha <- alpha - eta * klr_gradient(alpha, ...)` from the zero vector.
pub fn train_neuron(gram: &Gram, y_i: &[f64], cfg: &TrainConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if y_i.len() != gram.p() {
        return Err(Error::DimensionMismatch { left: y_i.len(), right: gram.p() });
    }
    let p = gram.p();
    let mut alpha = vec![0.0; p];
    let mut h = vec![0.0; p];
    let mut v = vec![0.0; p];
    for iteration in 0..cfg.iterations {
        sym_mat_block(gram.data(), p, &alpha, 1, &mut h);
        for nu in 0..p {
            v[nu] = sigmoid(h[nu]) - y_i[nu] + cfg.weight_decay * alpha[nu];
        }
        sym_mat_block(gram.data(), p, &v, 1, &mut h); // h now holds the gradient
        for nu in 0..p {
            alpha[nu] -= cfg.learning_rate * h[nu];
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("neuron training at iteration {iteration}"),
            });
        }
    }
    Ok(alpha)
}

/// Trains the whole network: the Gram matrix is built once and shared, and
/// column `i` of the result equals `train_neuron` on target column `i`.
///
/// Internally all neurons advance together, one blocked Gram product per
/// iteration; per-column arithmetic and accumulation order match the
/// single-neuron path exactly, so the result does not depend on scheduling.
pub fn train_network(ps: &PatternSet, params: &KernelParams, cfg: &TrainConfig) -> Result<DualWeights> {
    cfg.validate()?;
    let gram = gram_matrix(ps, params);
    let targets = TargetBits::from_patterns(ps);
    let n = ps.n();
    let p = ps.len();
    let y = targets.data();

    let mut a = vec![0.0; p * n]; // pattern-major, like the targets
    let mut h = vec![0.0; p * n];
    let mut v = vec![0.0; p * n];
    for iteration in 0..cfg.iterations {
        sym_mat_block(gram.data(), p, &a, n, &mut h);
        for idx in 0..p * n {
            v[idx] = sigmoid(h[idx]) - y[idx] + cfg.weight_decay * a[idx];
        }
        sym_mat_block(gram.data(), p, &v, n, &mut h);
        for idx in 0..p * n {
            a[idx] -= cfg.learning_rate * h[idx];
        }
        if let Some(pos) = a.iter().position(|x| !x.is_finite()) {
            return Err(Error::Diverged { neuron: pos % n, iteration });
        }
    }

    let mut alpha = vec![0.0; n * p];
    for nu in 0..p {
        for i in 0..n {
            alpha[i * p + nu] = a[nu * n + i];
        }
    }
    Ok(DualWeights { n, p, params: *params, alpha })
}
