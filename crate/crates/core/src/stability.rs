//! Margin and cross-talk interference diagnostics.
//!
//! Flipping neuron `i` changes the pseudo-energy by
//!
//! ```text
//! dV = dV_local + dV_cross,
//! dV_local = -(s_i_new - s_i) h_i(s) = 2 s_i h_i(s),
//! ```
//!
//! where `dV_cross` collects everything the flip does to the kernel values:
//! the perturbation of every other neuron's field and of the flipped
//! neuron's own field at its new sign. Because the RBF kernel is bounded by
//! one, each field perturbation obeys `|dh_j| <= sum_mu |alpha[mu][j]|`,
//! giving the conservative interference bound
//! `I_max <= sum_{j != i} sum_mu |alpha[mu][j]|`. A flip triggered by the
//! update rule has `dV_local = -2 |h_i|`, so `2 |h_i| > I_max` is sufficient
//! for that flip to lower the energy. The bound is loose by construction;
//! [`stability_report`] therefore carries the measured cross term next to it.

use crate::dynamics::{local_field, NetworkState};
use crate::linalg::dot_sequential;
use crate::trainer::DualWeights;
use crate::{Error, Result};

/// Per-state margin and interference summary.
///
/// `condition_satisfied[i]` is the conservative worst-case test
/// `2 |h_i| > I_max` with the worst-case bound over flipped neurons;
/// `exact_satisfied[i]` compares the same margin against the measured
/// `|dV_cross|` of flipping neuron `i` in this state.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MarginReport {
    /// `2 |h_i(s)|` per neuron.
    pub margins: Vec<f64>,
    /// Worst-case conservative interference bound `I_max`.
    pub interference_bound: f64,
    /// Measured `dV_cross` per hypothetically flipped neuron (signed).
    pub exact_cross: Vec<f64>,
    pub condition_satisfied: Vec<bool>,
    pub exact_satisfied: Vec<bool>,
    pub fraction_satisfied: f64,
}

/// Margin `2 |h_i(s)|`: the frozen-field energy drop of flipping a
/// misaligned neuron `i`.
pub fn local_margin(w: &DualWeights, state: &NetworkState, i: usize) -> Result<f64> {
    Ok(2.0 * local_field(w, state, i)?.abs())
}

/// Conservative interference bound for flipping neuron `i`:
/// `sum_{j != i} sum_mu |alpha[mu][j]|`.
pub fn interference_bound(w: &DualWeights, i: usize) -> Result<f64> {
    if i >= w.n() {
        return Err(Error::IndexOutOfRange { index: i, len: w.n() });
    }
    let mut bound = 0.0;
    for j in 0..w.n() {
        if j == i {
            continue;
        }
        for a in w.neuron(j) {
            bound += a.abs();
        }
    }
    Ok(bound)
}

/// Measured cross term of hypothetically flipping neuron `i`: every field is
/// evaluated before and after the flip, so `dV_local + exact_interference`
/// reproduces the pseudo-energy difference exactly.
pub fn exact_interference(w: &DualWeights, state: &NetworkState, i: usize) -> Result<f64> {
    if i >= w.n() {
        return Err(Error::IndexOutOfRange { index: i, len: w.n() });
    }
    let after = state.kernels_after_flip(i);
    let before = state.cached_kernels();
    let mut cross = 0.0;
    for j in 0..w.n() {
        let dh = dot_sequential(w.neuron(j), &after) - dot_sequential(w.neuron(j), before);
        // The flipped neuron weighs its own field change with the new sign.
        let sign = if j == i { -state.state().get(i) } else { state.state().get(j) };
        cross -= f64::from(sign) * dh;
    }
    Ok(cross)
}

/// Assembles margins, the conservative bound, and the measured cross terms
/// for every neuron at the given state.
pub fn stability_report(w: &DualWeights, state: &NetworkState) -> MarginReport {
    let n = w.n();
    let margins: Vec<f64> = (0..n)
        .map(|i| local_margin(w, state, i).expect("index in range"))
        .collect();
    let bound = (0..n)
        .map(|i| interference_bound(w, i).expect("index in range"))
        .fold(0.0, f64::max);
    let exact_cross: Vec<f64> = (0..n)
        .map(|i| exact_interference(w, state, i).expect("index in range"))
        .collect();

    let condition_satisfied: Vec<bool> = margins.iter().map(|&m| m > bound).collect();
    let exact_satisfied: Vec<bool> = margins
        .iter()
        .zip(&exact_cross)
        .map(|(&m, &c)| m > c.abs())
        .collect();
    let fraction_satisfied =
        condition_satisfied.iter().filter(|&&ok| ok).count() as f64 / n as f64;

    MarginReport {
        margins,
        interference_bound: bound,
        exact_cross,
        condition_satisfied,
        exact_satisfied,
        fraction_satisfied,
    }
}
