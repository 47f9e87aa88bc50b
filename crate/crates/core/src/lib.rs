//! Kernel logistic regression (KLR) Hopfield associative memories.
//!
//! A KLR Hopfield network stores `P` bipolar patterns in a network of `N`
//! threshold neurons. Instead of Hebbian couplings, each neuron carries a
//! vector of dual variables over the stored patterns, learned by kernel
//! logistic regression against an RBF Gram matrix. Retrieval follows the
//! local field
//!
//! ```text
//! h_i(s) = sum_mu alpha[mu][i] * K(s, xi^mu),   K(x,y) = exp(-gamma * ||x-y||^2)
//! ```
//!
//! under either synchronous (all neurons at once) or asynchronous
//! (sequential, random permutation per epoch) sign updates.
//!
//! Module map:
//!
//! - [`kernel`] — bipolar vectors, RBF kernel, Gram matrices
//! - [`trainer`] — per-neuron KLR objective, gradient, batch gradient descent
//! - [`dynamics`] — network states with cached kernels, update schemes,
//!   retrieval traces, pseudo-energy
//! - [`stability`] — margin / cross-talk interference diagnostics
//! - [`experiments`] — seeded, trial-averaged retrieval benchmarks
//! - [`model_io`] — plain-text model persistence
//! - [`report`] — CSV emission for experiment results

pub mod dynamics;
pub mod experiments;
pub mod kernel;
mod linalg;
pub mod model_io;
pub mod report;
pub mod seed;
pub mod stability;
pub mod trainer;

pub use dynamics::{
    pseudo_energy, run_retrieval, FlipEvent, NetworkState, RetrievalOutcome, RetrievalTrace,
    UpdateScheme,
};
pub use experiments::{inject_noise, overlap, ExperimentConfig, TrialResult};
pub use kernel::{gram_matrix, rbf_kernel, squared_distance, BipolarVector, Gram, KernelParams, PatternSet};
pub use model_io::{load_model, save_model, ModelFile};
pub use stability::{stability_report, MarginReport};
pub use trainer::{klr_gradient, klr_loss, sigmoid, train_network, train_neuron, DualWeights, TargetBits, TrainConfig};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("kernel locality parameter gamma must be positive and finite, got {0}")]
    InvalidGamma(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("neuron index {index} out of range for network of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("update order is not a permutation of 0..{n}")]
    NotAPermutation { n: usize },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },

    #[error("training diverged for neuron {neuron} at iteration {iteration}")]
    Diverged { neuron: usize, iteration: usize },

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported model format version {found} (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },

    #[error("model file parse error at line {line}: {message}")]
    ModelParse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
