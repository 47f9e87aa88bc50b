//! Seeded, trial-averaged retrieval experiments.
//!
//! Every trial draws a fresh random pattern set, trains from scratch, picks
//! the target pattern `trial mod P`, corrupts it by flipping an exact number
//! of bits, and runs retrieval. Trials are embarrassingly parallel; each one
//! derives its own RNG streams from the master seed (see [`crate::seed`]),
//! so results are bit-identical regardless of scheduling and no trial
//! depends on another.

use crate::dynamics::{run_retrieval, RetrievalOutcome, RetrievalTrace, UpdateScheme};
use crate::kernel::{BipolarVector, KernelParams, PatternSet};
use crate::seed;
use crate::trainer::{train_network, TrainConfig};
use crate::{Error, Result};
use rand::Rng;
use rayon::prelude::*;

const TAG_DYNAMICS: u64 = 1;
const TAG_CAPACITY: u64 = 2;
const TAG_EFFICIENCY: u64 = 3;

const STREAM_PATTERNS: u64 = 0;
const STREAM_NOISE: u64 = 1;
const STREAM_SYNC: u64 = 2;
const STREAM_ASYNC: u64 = 3;

/// Normalized state/target agreement `(1/N) sum_i a_i b_i`; 1 at perfect
/// recall, -1 at full inversion, and `1 - 2d/N` at Hamming distance `d`.
pub fn overlap(a: &BipolarVector, b: &BipolarVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { left: a.len(), right: b.len() });
    }
    let sum: i64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| i64::from(x) * i64::from(y))
        .sum();
    Ok(sum as f64 / a.len() as f64)
}

/// Flips exactly `round(fraction * N)` distinct positions, chosen uniformly
/// without replacement. Returns the corrupted vector and the flip count.
pub fn inject_noise<R: Rng>(
    pattern: &BipolarVector,
    fraction: f64,
    rng: &mut R,
) -> Result<(BipolarVector, usize)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "noise fraction must lie in [0, 1], got {fraction}"
        )));
    }
    let n = pattern.len();
    let d = (fraction * n as f64).round() as usize;
    let mut corrupted = pattern.clone();
    for i in rand::seq::index::sample(rng, n, d) {
        corrupted.flip(i);
    }
    Ok((corrupted, d))
}

/// Parameters of one experimental condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Storage load `P/N`; the trial pattern count is `round(load * n)`.
    pub load: f64,
    pub gamma: f64,
    pub train: TrainConfig,
    pub noise_fraction: f64,
    pub trials: usize,
    pub schemes: Vec<UpdateScheme>,
    pub max_epochs: usize,
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// Robust-regime defaults: gamma 0.1, learning rate 0.1, weight decay
    /// 0.01, 500 iterations, 20% noise, 50 trials, both schemes, 100 epochs.
    pub fn new(n: usize, load: f64) -> Self {
        Self {
            n,
            load,
            gamma: 0.1,
            train: TrainConfig::default(),
            noise_fraction: 0.2,
            trials: 50,
            schemes: vec![UpdateScheme::Synchronous, UpdateScheme::Asynchronous],
            max_epochs: 100,
            master_seed: 0,
        }
    }

    pub fn patterns_per_trial(&self) -> usize {
        (self.load * self.n as f64).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("network size must be positive".into()));
        }
        if self.patterns_per_trial() == 0 {
            return Err(Error::InvalidParameter(format!(
                "load {} at n = {} rounds to zero patterns",
                self.load, self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_fraction) {
            return Err(Error::InvalidParameter(format!(
                "noise fraction must lie in [0, 1], got {}",
                self.noise_fraction
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trial count must be positive".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidParameter("max_epochs must be at least 1".into()));
        }
        KernelParams::new(self.gamma)?;
        Ok(())
    }
}

/// Outcome of a single retrieval within an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub scheme: UpdateScheme,
    pub initial_hamming: usize,
    /// Final state equals the target exactly.
    pub success: bool,
    pub total_events: usize,
    pub overlaps: Vec<f64>,
    pub energies: Vec<f64>,
    pub epochs_run: usize,
    pub outcome: RetrievalOutcome,
}

impl TrialResult {
    fn from_trace(trial: usize, scheme: UpdateScheme, initial_hamming: usize, trace: &RetrievalTrace) -> Self {
        // Overlap 1.0 is exact: the bit-product sum equals N only when every
        // coordinate agrees.
        let success = trace.final_overlap() == 1.0;
        debug_assert!(
            !success || trace.total_events() >= initial_hamming,
            "successful trial flipped fewer bits than its initial errors"
        );
        Self {
            trial,
            scheme,
            initial_hamming,
            success,
            total_events: trace.total_events(),
            overlaps: trace.overlaps.clone(),
            energies: trace.energies.clone(),
            epochs_run: trace.epochs_run,
            outcome: trace.outcome,
        }
    }
}

/// Per-scheme trajectory statistics. Trials that converge early are padded
/// with their final value so that epoch-wise means stay defined.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeTrajectory {
    pub scheme: UpdateScheme,
    pub overlap_mean: Vec<f64>,
    pub overlap_std: Vec<f64>,
    pub energy_mean: Vec<f64>,
    pub accuracy: f64,
}

impl SchemeTrajectory {
    pub fn final_overlap_mean(&self) -> f64 {
        *self.overlap_mean.last().expect("at least the initial epoch exists")
    }
}

/// Aggregated dynamics-comparison results (overlap trajectories per scheme).
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsAggregate {
    pub config: ExperimentConfig,
    pub schemes: Vec<SchemeTrajectory>,
    pub trials: Vec<TrialResult>,
    /// Fraction of asynchronous trials whose recorded pseudo-energy sequence
    /// was non-increasing epoch over epoch (statistical diagnostic only).
    pub async_energy_monotone_fraction: f64,
}

/// Accuracy at one capacity grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityPoint {
    pub n: usize,
    pub load: f64,
    pub p: usize,
    pub scheme: UpdateScheme,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityAggregate {
    pub base: ExperimentConfig,
    pub sizes: Vec<usize>,
    pub loads: Vec<f64>,
    pub points: Vec<CapacityPoint>,
}

impl CapacityAggregate {
    pub fn accuracy(&self, n: usize, load: f64, scheme: UpdateScheme) -> Option<f64> {
        self.points
            .iter()
            .find(|pt| pt.n == n && pt.load == load && pt.scheme == scheme)
            .map(|pt| pt.accuracy_mean)
    }
}

/// Event statistics at one noise level (asynchronous scheme only).
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyPoint {
    pub noise_fraction: f64,
    pub mean_events: f64,
    pub std_events: f64,
    pub mean_initial_hamming: f64,
    pub std_initial_hamming: f64,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyAggregate {
    pub base: ExperimentConfig,
    pub noise_grid: Vec<f64>,
    pub points: Vec<EfficiencyPoint>,
    /// Trials grouped per noise level, parallel to `noise_grid`.
    pub per_level_trials: Vec<Vec<TrialResult>>,
}

/// Mean and population standard deviation.
fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    (mean, var.sqrt())
}

/// One full trial: sample patterns, train, corrupt the target, retrieve with
/// every requested scheme from the identical corrupted state.
fn run_trial(
    cfg: &ExperimentConfig,
    tag: u64,
    grid: &[u64],
    trial: usize,
    noise_fraction: f64,
    n: usize,
    p: usize,
) -> Result<Vec<TrialResult>> {
    let wrap = |e: Error| Error::Trial { trial, source: Box::new(e) };
    let params = KernelParams::new(cfg.gamma)?;

    let mut path = vec![tag];
    path.extend_from_slice(grid);
    path.push(trial as u64);

    let mut pattern_path = path.clone();
    pattern_path.push(STREAM_PATTERNS);
    let mut pattern_rng = seed::rng(cfg.master_seed, &pattern_path);
    let ps = PatternSet::random(n, p, &mut pattern_rng).map_err(wrap)?;

    let weights = train_network(&ps, &params, &cfg.train).map_err(wrap)?;

    let target_index = trial % p;
    let target = ps.pattern(target_index);
    let mut noise_path = path.clone();
    noise_path.push(STREAM_NOISE);
    let mut noise_rng = seed::rng(cfg.master_seed, &noise_path);
    let (corrupted, d) = inject_noise(target, noise_fraction, &mut noise_rng).map_err(wrap)?;

    let mut results = Vec::with_capacity(cfg.schemes.len());
    for &scheme in &cfg.schemes {
        let stream = match scheme {
            UpdateScheme::Synchronous => STREAM_SYNC,
            UpdateScheme::Asynchronous => STREAM_ASYNC,
        };
        let mut retrieval_path = path.clone();
        retrieval_path.push(stream);
        let mut rng = seed::rng(cfg.master_seed, &retrieval_path);
        let trace = run_retrieval(&weights, &ps, &corrupted, target, scheme, cfg.max_epochs, &mut rng)
            .map_err(wrap)?;
        results.push(TrialResult::from_trace(trial, scheme, d, &trace));
    }
    Ok(results)
}

/// Extends a trajectory to `len` entries by repeating its final value
/// (a converged network stays where it is).
fn padded(values: &[f64], len: usize) -> Vec<f64> {
    let mut v = values.to_vec();
    let last = *values.last().expect("trajectories are never empty");
    v.resize(len, last);
    v
}

fn aggregate_scheme(scheme: UpdateScheme, trials: &[TrialResult]) -> SchemeTrajectory {
    let of_scheme: Vec<&TrialResult> = trials.iter().filter(|t| t.scheme == scheme).collect();
    let len = of_scheme.iter().map(|t| t.overlaps.len()).max().unwrap_or(1);
    let overlaps: Vec<Vec<f64>> = of_scheme.iter().map(|t| padded(&t.overlaps, len)).collect();
    let energies: Vec<Vec<f64>> = of_scheme.iter().map(|t| padded(&t.energies, len)).collect();

    let mut overlap_mean = Vec::with_capacity(len);
    let mut overlap_std = Vec::with_capacity(len);
    let mut energy_mean = Vec::with_capacity(len);
    for e in 0..len {
        let column: Vec<f64> = overlaps.iter().map(|t| t[e]).collect();
        let (m, s) = mean_and_std(&column);
        overlap_mean.push(m);
        overlap_std.push(s);
        energy_mean.push(energies.iter().map(|t| t[e]).sum::<f64>() / energies.len() as f64);
    }
    let accuracy = of_scheme.iter().filter(|t| t.success).count() as f64 / of_scheme.len() as f64;
    SchemeTrajectory { scheme, overlap_mean, overlap_std, energy_mean, accuracy }
}

/// Trajectory comparison: every trial runs all configured schemes from the
/// identical corrupted state. Requires both schemes to be configured.
pub fn run_dynamics_experiment(cfg: &ExperimentConfig) -> Result<DynamicsAggregate> {
    cfg.validate()?;
    for scheme in [UpdateScheme::Synchronous, UpdateScheme::Asynchronous] {
        if !cfg.schemes.contains(&scheme) {
            return Err(Error::InvalidParameter(format!(
                "dynamics experiment compares both schemes, `{scheme}` missing"
            )));
        }
    }

    let n = cfg.n;
    let p = cfg.patterns_per_trial();
    let per_trial: Vec<Vec<TrialResult>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, TAG_DYNAMICS, &[], trial, cfg.noise_fraction, n, p))
        .collect::<Result<_>>()?;
    let trials: Vec<TrialResult> = per_trial.into_iter().flatten().collect();

    let schemes: Vec<SchemeTrajectory> =
        cfg.schemes.iter().map(|&s| aggregate_scheme(s, &trials)).collect();

    let async_trials: Vec<&TrialResult> = trials
        .iter()
        .filter(|t| t.scheme == UpdateScheme::Asynchronous)
        .collect();
    let monotone = async_trials
        .iter()
        .filter(|t| t.energies.windows(2).all(|w| w[1] <= w[0] + 1e-9))
        .count();
    let async_energy_monotone_fraction = monotone as f64 / async_trials.len().max(1) as f64;

    Ok(DynamicsAggregate { config: cfg.clone(), schemes, trials, async_energy_monotone_fraction })
}

/// Recall accuracy across a `(network size, load)` grid at fixed noise.
/// Loads must be sorted ascending.
pub fn run_capacity_experiment(
    base: &ExperimentConfig,
    sizes: &[usize],
    loads: &[f64],
) -> Result<CapacityAggregate> {
    base.validate()?;
    if sizes.is_empty() || loads.is_empty() {
        return Err(Error::InvalidParameter("capacity grid must be non-empty".into()));
    }
    if loads.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("loads must be sorted strictly ascending".into()));
    }

    let mut points = Vec::new();
    for &n in sizes {
        for &load in loads {
            let p = (load * n as f64).round() as usize;
            if p == 0 {
                return Err(Error::InvalidParameter(format!(
                    "load {load} at n = {n} rounds to zero patterns"
                )));
            }
            let per_trial: Vec<Vec<TrialResult>> = (0..base.trials)
                .into_par_iter()
                .map(|trial| {
                    run_trial(
                        base,
                        TAG_CAPACITY,
                        &[n as u64, p as u64],
                        trial,
                        base.noise_fraction,
                        n,
                        p,
                    )
                })
                .collect::<Result<_>>()?;
            let trials: Vec<TrialResult> = per_trial.into_iter().flatten().collect();
            for &scheme in &base.schemes {
                let successes: Vec<f64> = trials
                    .iter()
                    .filter(|t| t.scheme == scheme)
                    .map(|t| if t.success { 1.0 } else { 0.0 })
                    .collect();
                let (accuracy_mean, accuracy_std) = mean_and_std(&successes);
                points.push(CapacityPoint { n, load, p, scheme, accuracy_mean, accuracy_std });
            }
        }
    }
    Ok(CapacityAggregate {
        base: base.clone(),
        sizes: sizes.to_vec(),
        loads: loads.to_vec(),
        points,
    })
}

/// Event-count efficiency across a noise grid, asynchronous scheme only.
pub fn run_efficiency_experiment(
    base: &ExperimentConfig,
    noise_grid: &[f64],
) -> Result<EfficiencyAggregate> {
    let mut cfg = base.clone();
    cfg.schemes = vec![UpdateScheme::Asynchronous];
    cfg.validate()?;
    if noise_grid.is_empty() {
        return Err(Error::InvalidParameter("noise grid must be non-empty".into()));
    }

    let n = cfg.n;
    let p = cfg.patterns_per_trial();
    let mut points = Vec::new();
    let mut per_level_trials = Vec::new();
    for &noise in noise_grid {
        if !(0.0..=1.0).contains(&noise) {
            return Err(Error::InvalidParameter(format!(
                "noise fraction must lie in [0, 1], got {noise}"
            )));
        }
        let per_trial: Vec<Vec<TrialResult>> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| run_trial(&cfg, TAG_EFFICIENCY, &[noise.to_bits()], trial, noise, n, p))
            .collect::<Result<_>>()?;
        let trials: Vec<TrialResult> = per_trial.into_iter().flatten().collect();

        let events: Vec<f64> = trials.iter().map(|t| t.total_events as f64).collect();
        let hammings: Vec<f64> = trials.iter().map(|t| t.initial_hamming as f64).collect();
        let (mean_events, std_events) = mean_and_std(&events);
        let (mean_initial_hamming, std_initial_hamming) = mean_and_std(&hammings);
        let success_rate = trials.iter().filter(|t| t.success).count() as f64 / trials.len() as f64;
        points.push(EfficiencyPoint {
            noise_fraction: noise,
            mean_events,
            std_events,
            mean_initial_hamming,
            std_initial_hamming,
            success_rate,
        });
        per_level_trials.push(trials);
    }
    Ok(EfficiencyAggregate {
        base: cfg,
        noise_grid: noise_grid.to_vec(),
        points,
        per_level_trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bv(values: &[i8]) -> BipolarVector {
        BipolarVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn overlap_counting_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = BipolarVector::random(40, &mut rng);
        assert_eq!(overlap(&x, &x).unwrap(), 1.0);

        let neg = BipolarVector::new(x.values().iter().map(|v| -v).collect()).unwrap();
        assert_eq!(overlap(&x, &neg).unwrap(), -1.0);

        let mut y = x.clone();
        for i in [3, 17, 21, 39] {
            y.flip(i);
        }
        assert_eq!(overlap(&x, &y).unwrap(), 1.0 - 2.0 * 4.0 / 40.0);

        assert!(overlap(&x, &bv(&[1, -1])).is_err());
    }

    #[test]
    fn noise_flips_exactly_the_requested_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pattern = BipolarVector::random(50, &mut rng);

        let (same, d0) = inject_noise(&pattern, 0.0, &mut rng).unwrap();
        assert_eq!(d0, 0);
        assert_eq!(same, pattern);

        let (noisy, d) = inject_noise(&pattern, 0.2, &mut rng).unwrap();
        assert_eq!(d, 10);
        assert_eq!(pattern.hamming(&noisy).unwrap(), 10);
        assert_eq!(overlap(&pattern, &noisy).unwrap(), 0.6);

        let (inverted, dn) = inject_noise(&pattern, 1.0, &mut rng).unwrap();
        assert_eq!(dn, 50);
        assert_eq!(overlap(&pattern, &inverted).unwrap(), -1.0);

        assert!(inject_noise(&pattern, 1.5, &mut rng).is_err());
        assert!(inject_noise(&pattern, -0.1, &mut rng).is_err());
    }

    fn tiny_config() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(14, 1.0);
        cfg.train.iterations = 150;
        cfg.trials = 5;
        cfg.master_seed = 41;
        cfg
    }

    #[test]
    fn dynamics_requires_both_schemes() {
        let mut cfg = tiny_config();
        cfg.schemes = vec![UpdateScheme::Asynchronous];
        assert!(run_dynamics_experiment(&cfg).is_err());
    }

    #[test]
    fn dynamics_experiment_is_reproducible() {
        let cfg = tiny_config();
        let a = run_dynamics_experiment(&cfg).unwrap();
        let b = run_dynamics_experiment(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trials_are_independent_of_the_trial_count() {
        let mut cfg = tiny_config();
        let five = run_dynamics_experiment(&cfg).unwrap();
        cfg.trials = 4;
        let four = run_dynamics_experiment(&cfg).unwrap();
        // Removing the last trial leaves every other trial untouched.
        assert_eq!(four.trials.as_slice(), &five.trials[..four.trials.len()]);
    }

    #[test]
    fn zero_noise_converges_immediately_with_no_events() {
        let mut cfg = tiny_config();
        cfg.noise_fraction = 0.0;
        cfg.train.iterations = 400;
        let agg = run_dynamics_experiment(&cfg).unwrap();
        for t in &agg.trials {
            assert!(t.success, "trial {} failed from a clean start", t.trial);
            assert_eq!(t.total_events, 0);
            assert_eq!(t.epochs_run, 1);
            assert!(t.overlaps.iter().all(|&o| o == 1.0));
        }
        for s in &agg.schemes {
            assert_eq!(s.accuracy, 1.0);
        }
    }

    #[test]
    fn successful_trials_respect_the_parity_bound() {
        let mut cfg = tiny_config();
        cfg.noise_fraction = 0.15;
        let agg = run_dynamics_experiment(&cfg).unwrap();
        for t in agg.trials.iter().filter(|t| t.success) {
            assert!(
                t.total_events >= t.initial_hamming,
                "trial {} ({}) flipped {} bits for {} initial errors",
                t.trial,
                t.scheme,
                t.total_events,
                t.initial_hamming
            );
        }
    }

    #[test]
    fn capacity_rejects_unsorted_loads() {
        let cfg = tiny_config();
        assert!(run_capacity_experiment(&cfg, &[14], &[2.0, 1.0]).is_err());
        assert!(run_capacity_experiment(&cfg, &[], &[1.0]).is_err());
    }

    #[test]
    fn capacity_reports_every_grid_point() {
        let mut cfg = tiny_config();
        cfg.trials = 3;
        cfg.noise_fraction = 0.1;
        let agg = run_capacity_experiment(&cfg, &[10, 14], &[0.5, 1.0]).unwrap();
        assert_eq!(agg.points.len(), 2 * 2 * 2);
        for pt in &agg.points {
            assert!((0.0..=1.0).contains(&pt.accuracy_mean));
            assert!(pt.accuracy_std >= 0.0);
        }
        assert!(agg.accuracy(10, 0.5, UpdateScheme::Synchronous).is_some());
        assert!(agg.accuracy(99, 0.5, UpdateScheme::Synchronous).is_none());
    }

    #[test]
    fn efficiency_runs_async_only_and_counts_events() {
        let mut cfg = tiny_config();
        cfg.trials = 4;
        let agg = run_efficiency_experiment(&cfg, &[0.0, 0.2]).unwrap();
        assert_eq!(agg.points.len(), 2);
        assert_eq!(agg.per_level_trials.len(), 2);

        let clean = &agg.points[0];
        assert_eq!(clean.mean_events, 0.0);
        assert_eq!(clean.mean_initial_hamming, 0.0);

        let noisy = &agg.points[1];
        // Exact-count noise makes the initial Hamming distance deterministic.
        assert_eq!(noisy.mean_initial_hamming, 3.0); // round(0.2 * 14)
        assert_eq!(noisy.std_initial_hamming, 0.0);
        for t in &agg.per_level_trials[1] {
            assert_eq!(t.scheme, UpdateScheme::Asynchronous);
        }
    }
}
