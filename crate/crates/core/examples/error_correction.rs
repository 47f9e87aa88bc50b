//! Store random patterns, corrupt one, and watch both update schemes
//! recover it.
//!
//! Run: cargo run --release --example error_correction

use klr_hopfield::experiments::{inject_noise, overlap};
use klr_hopfield::kernel::{KernelParams, PatternSet};
use klr_hopfield::trainer::{train_network, TrainConfig};
use klr_hopfield::{dynamics, stability_report, NetworkState, UpdateScheme};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let n = 50;
    let p = 150;
    let gamma = 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    println!("storing {p} random patterns in a {n}-neuron network (gamma = {gamma})");
    let patterns = PatternSet::random(n, p, &mut rng).unwrap();
    let params = KernelParams::new(gamma).unwrap();
    let weights = train_network(&patterns, &params, &TrainConfig::default()).unwrap();

    let target = patterns.pattern(0);
    let (corrupted, flipped) = inject_noise(target, 0.2, &mut rng).unwrap();
    println!(
        "corrupted pattern 0 in {flipped} positions (overlap {:.2})\n",
        overlap(&corrupted, target).unwrap()
    );

    for scheme in [UpdateScheme::Synchronous, UpdateScheme::Asynchronous] {
        let trace = dynamics::run_retrieval(
            &weights, &patterns, &corrupted, target, scheme, 100, &mut rng,
        )
        .unwrap();
        println!(
            "{scheme:>5}: {} epochs, {} bit flips, final overlap {:.3}",
            trace.epochs_run,
            trace.total_events(),
            trace.final_overlap()
        );
        let path: Vec<String> = trace.overlaps.iter().map(|m| format!("{m:.2}")).collect();
        println!("       overlap per epoch: {}", path.join(" -> "));
    }

    // Margins at the recovered attractor.
    let state = NetworkState::at_pattern(&patterns, params, 0).unwrap();
    let report = stability_report(&weights, &state);
    let min_margin = report.margins.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_cross = report.exact_cross.iter().map(|c| c.abs()).fold(0.0, f64::max);
    println!(
        "\nat the stored pattern: min margin {min_margin:.3}, max measured |cross talk| {max_cross:.3e}"
    );
}
