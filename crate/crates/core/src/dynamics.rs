//! Retrieval dynamics: local fields, synchronous steps, asynchronous epochs,
//! pseudo-energy, and event-level tracing.

use crate::experiments::overlap;
use crate::kernel::{rbf_kernel, BipolarVector, KernelParams, PatternSet};
use crate::linalg::dot_sequential;
use crate::trainer::DualWeights;
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;

/// The two update schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum UpdateScheme {
    /// All neurons recomputed simultaneously from the previous state.
    Synchronous,
    /// N sequential single-neuron updates per epoch, in permutation order.
    Asynchronous,
}

impl UpdateScheme {
    pub fn label(&self) -> &'static str {
        match self {
            UpdateScheme::Synchronous => "sync",
            UpdateScheme::Asynchronous => "async",
        }
    }
}

impl std::fmt::Display for UpdateScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for UpdateScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sync" | "synchronous" => Ok(UpdateScheme::Synchronous),
            "async" | "asynchronous" => Ok(UpdateScheme::Asynchronous),
            other => Err(Error::InvalidParameter(format!(
                "unknown update scheme `{other}` (expected `sync` or `async`)"
            ))),
        }
    }
}

/// Current bipolar state plus the cached kernel values `K(s, xi^mu)`.
///
/// The cache is maintained incrementally: flipping bit `i` changes the
/// squared distance to pattern `mu` by exactly +4 (the bit agreed before the
/// flip) or -4 (it disagreed), so each cached kernel is multiplied by
/// `exp(-4 gamma)` or `exp(+4 gamma)`. Full recomputation is O(N P); the
/// incremental update is O(P) per flip and is re-verified against
/// recomputation after every epoch in debug builds.
#[derive(Debug, Clone)]
pub struct NetworkState<'a> {
    patterns: &'a PatternSet,
    params: KernelParams,
    s: BipolarVector,
    cached: Vec<f64>,
    factor_closer: f64,
    factor_away: f64,
}

impl<'a> NetworkState<'a> {
    pub fn new(patterns: &'a PatternSet, params: KernelParams, s: BipolarVector) -> Result<Self> {
        if s.len() != patterns.n() {
            return Err(Error::DimensionMismatch { left: s.len(), right: patterns.n() });
        }
        let cached = patterns
            .iter()
            .map(|xi| rbf_kernel(&s, xi, &params).expect("lengths checked"))
            .collect();
        let gamma4 = 4.0 * params.gamma();
        Ok(Self {
            patterns,
            params,
            s,
            cached,
            factor_closer: gamma4.exp(),
            factor_away: (-gamma4).exp(),
        })
    }

    /// State positioned exactly at stored pattern `mu`.
    pub fn at_pattern(patterns: &'a PatternSet, params: KernelParams, mu: usize) -> Result<Self> {
        if mu >= patterns.len() {
            return Err(Error::IndexOutOfRange { index: mu, len: patterns.len() });
        }
        Self::new(patterns, params, patterns.pattern(mu).clone())
    }

    pub fn state(&self) -> &BipolarVector {
        &self.s
    }

    pub fn cached_kernels(&self) -> &[f64] {
        &self.cached
    }

    pub fn patterns(&self) -> &PatternSet {
        self.patterns
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// Flips neuron `i` and updates every cached kernel in O(P).
    pub fn flip(&mut self, i: usize) {
        let old = self.s.get(i);
        self.s.flip(i);
        for (c, xi) in self.cached.iter_mut().zip(self.patterns.iter()) {
            *c *= if xi.get(i) == old { self.factor_away } else { self.factor_closer };
        }
    }

    /// Cached kernels after a hypothetical flip of neuron `i`, without
    /// touching the state.
    pub fn kernels_after_flip(&self, i: usize) -> Vec<f64> {
        let old = self.s.get(i);
        self.cached
            .iter()
            .zip(self.patterns.iter())
            .map(|(c, xi)| c * if xi.get(i) == old { self.factor_away } else { self.factor_closer })
            .collect()
    }

    /// Replaces the whole state and recomputes the cache from scratch.
    pub fn assign(&mut self, s: BipolarVector) -> Result<()> {
        if s.len() != self.patterns.n() {
            return Err(Error::DimensionMismatch { left: s.len(), right: self.patterns.n() });
        }
        self.s = s;
        self.rebuild_cache();
        Ok(())
    }

    pub fn rebuild_cache(&mut self) {
        for (c, xi) in self.cached.iter_mut().zip(self.patterns.iter()) {
            *c = rbf_kernel(&self.s, xi, &self.params).expect("lengths fixed at construction");
        }
    }

    /// Largest absolute deviation between the incrementally maintained cache
    /// and a full recomputation.
    pub fn cache_deviation(&self) -> f64 {
        self.cached
            .iter()
            .zip(self.patterns.iter())
            .map(|(c, xi)| (c - rbf_kernel(&self.s, xi, &self.params).expect("lengths fixed")).abs())
            .fold(0.0, f64::max)
    }
}

/// One state transition: neuron `neuron` left `old_sign` during `epoch`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlipEvent {
    pub epoch: usize,
    pub neuron: usize,
    pub old_sign: i8,
}

/// How a retrieval run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetrievalOutcome {
    /// An epoch completed with zero flips.
    FixedPoint,
    /// Synchronous state matched the state two steps earlier (length-2
    /// limit cycle).
    TwoCycle,
    /// The epoch budget ran out.
    EpochLimit,
}

/// Per-epoch log of a retrieval run.
///
/// `overlaps` and `energies` have length `epochs_run + 1`: entry 0 describes
/// the initial state. `events` holds every bit flip in order.
#[derive(Debug, Clone)]
pub struct RetrievalTrace {
    pub overlaps: Vec<f64>,
    pub energies: Vec<f64>,
    pub events: Vec<FlipEvent>,
    pub converged: bool,
    pub outcome: RetrievalOutcome,
    pub epochs_run: usize,
}

impl RetrievalTrace {
    pub fn new() -> Self {
        Self {
            overlaps: Vec::new(),
            energies: Vec::new(),
            events: Vec::new(),
            converged: false,
            outcome: RetrievalOutcome::EpochLimit,
            epochs_run: 0,
        }
    }

    pub fn total_events(&self) -> usize {
        self.events.len()
    }

    pub fn final_overlap(&self) -> f64 {
        *self.overlaps.last().expect("trace always records the initial state")
    }
}

impl Default for RetrievalTrace {
    fn default() -> Self {
        Self::new()
    }
}

fn check_compat(w: &DualWeights, state: &NetworkState) {
    assert_eq!(w.n(), state.state().len(), "weights and state disagree on network size");
    assert_eq!(w.p(), state.patterns().len(), "weights and state disagree on pattern count");
    assert_eq!(
        w.params().gamma(),
        state.params().gamma(),
        "weights and state were built with different kernel parameters"
    );
}

/// Local field `h_i(s) = sum_mu alpha[mu][i] K(s, xi^mu)` from the cache.
pub fn local_field(w: &DualWeights, state: &NetworkState, i: usize) -> Result<f64> {
    check_compat(w, state);
    if i >= w.n() {
        return Err(Error::IndexOutOfRange { index: i, len: w.n() });
    }
    Ok(dot_sequential(w.neuron(i), state.cached_kernels()))
}

fn sign_of(h: f64) -> i8 {
    if h >= 0.0 {
        1
    } else {
        -1
    }
}

/// One synchronous step: every neuron takes the sign of its field computed
/// from the pre-step state (`sign(0) = +1`). Returns the number of flips;
/// the kernel cache is rebuilt for the new state.
pub fn sync_step(w: &DualWeights, state: &mut NetworkState) -> usize {
    check_compat(w, state);
    let n = w.n();
    let mut next = Vec::with_capacity(n);
    let mut flips = 0;
    for i in 0..n {
        let h = dot_sequential(w.neuron(i), state.cached_kernels());
        let sign = sign_of(h);
        if sign != state.state().get(i) {
            flips += 1;
        }
        next.push(sign);
    }
    let next = BipolarVector::new(next).expect("signs are bipolar");
    state.assign(next).expect("length preserved");
    flips
}

/// One asynchronous epoch: visits neurons in `order`, updating each from the
/// state as already modified within the epoch. Every sign change is appended
/// to `trace.events` (tagged with epoch `trace.epochs_run + 1`) and applied
/// through the incremental cache. Returns the number of flips.
pub fn async_epoch(
    w: &DualWeights,
    state: &mut NetworkState,
    order: &[usize],
    trace: &mut RetrievalTrace,
) -> Result<usize> {
    check_compat(w, state);
    let n = w.n();
    if order.len() != n {
        return Err(Error::NotAPermutation { n });
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || seen[i] {
            return Err(Error::NotAPermutation { n });
        }
        seen[i] = true;
    }

    let epoch = trace.epochs_run + 1;
    let mut flips = 0;
    for &i in order {
        let h = dot_sequential(w.neuron(i), state.cached_kernels());
        let sign = sign_of(h);
        let old = state.state().get(i);
        if sign != old {
            state.flip(i);
            trace.events.push(FlipEvent { epoch, neuron: i, old_sign: old });
            flips += 1;
        }
    }
    Ok(flips)
}

/// Alignment functional `V(s) = -sum_i s_i h_i(s)`.
pub fn pseudo_energy(w: &DualWeights, state: &NetworkState) -> f64 {
    check_compat(w, state);
    -(0..w.n())
        .map(|i| {
            f64::from(state.state().get(i)) * dot_sequential(w.neuron(i), state.cached_kernels())
        })
        .sum::<f64>()
}

/// Runs retrieval from `s0` toward `target` until convergence or
/// `max_epochs`.
///
/// Convergence is a zero-flip epoch (fixed point) for either scheme, or, for
/// the synchronous scheme only, a state equal to the state two steps earlier
/// (flagged as [`RetrievalOutcome::TwoCycle`]). Asynchronous epochs draw a
/// fresh random permutation from `rng` each epoch. Overlap with the target
/// and pseudo-energy are recorded for the initial state and after every
/// epoch. Non-convergence is reported in the trace, not as an error.
pub fn run_retrieval<R: Rng>(
    w: &DualWeights,
    patterns: &PatternSet,
    s0: &BipolarVector,
    target: &BipolarVector,
    scheme: UpdateScheme,
    max_epochs: usize,
    rng: &mut R,
) -> Result<RetrievalTrace> {
    if max_epochs == 0 {
        return Err(Error::InvalidParameter("max_epochs must be at least 1".into()));
    }
    if target.len() != s0.len() {
        return Err(Error::DimensionMismatch { left: s0.len(), right: target.len() });
    }

    let mut state = NetworkState::new(patterns, *w.params(), s0.clone())?;
    let mut trace = RetrievalTrace::new();
    trace.overlaps.push(overlap(s0, target)?);
    trace.energies.push(pseudo_energy(w, &state));

    let mut order: Vec<usize> = (0..w.n()).collect();
    let mut one_ago: Option<BipolarVector> = None;
    let mut two_ago: Option<BipolarVector> = None;

    for epoch in 1..=max_epochs {
        let flips = match scheme {
            UpdateScheme::Synchronous => {
                two_ago = one_ago.take();
                one_ago = Some(state.state().clone());
                let before = one_ago.as_ref().expect("just stored").clone();
                let flips = sync_step(w, &mut state);
                for i in 0..w.n() {
                    let old = before.get(i);
                    if old != state.state().get(i) {
                        trace.events.push(FlipEvent { epoch, neuron: i, old_sign: old });
                    }
                }
                flips
            }
            UpdateScheme::Asynchronous => {
                order.shuffle(rng);
                async_epoch(w, &mut state, &order, &mut trace)?
            }
        };

        trace.epochs_run = epoch;
        trace.overlaps.push(overlap(state.state(), target)?);
        trace.energies.push(pseudo_energy(w, &state));

        #[cfg(debug_assertions)]
        {
            let dev = state.cache_deviation();
            debug_assert!(dev < 1e-9, "kernel cache drifted by {dev} at epoch {epoch}");
        }

        if flips == 0 {
            trace.converged = true;
            trace.outcome = RetrievalOutcome::FixedPoint;
            break;
        }
        if scheme == UpdateScheme::Synchronous {
            if let Some(ref old) = two_ago {
                if old == state.state() {
                    trace.converged = true;
                    trace.outcome = RetrievalOutcome::TwoCycle;
                    break;
                }
            }
        }
    }
    Ok(trace)
}
