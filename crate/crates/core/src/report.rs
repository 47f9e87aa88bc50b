//! CSV and plot-script emission.
//!
//! Every file starts with `#`-prefixed metadata echoing the full
//! configuration, the master seed, and the code version, so a result file is
//! self-reproducing. Floating-point fields are serialized with 17
//! significant digits and parse back bit-exactly.

use crate::experiments::{CapacityAggregate, DynamicsAggregate, EfficiencyAggregate, ExperimentConfig};
use crate::stability::MarginReport;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn schemes_label(cfg: &ExperimentConfig) -> String {
    cfg.schemes.iter().map(|s| s.label()).collect::<Vec<_>>().join(",")
}

const CONVENTIONS: &str = "# conventions: alpha init=zero full-batch gradient descent; \
overlap=(1/N) sum_i s_i*target_i; async epoch=N sequential updates in a fresh random \
permutation; convergence=zero-flip epoch (sync also stops on a 2-cycle); \
noise=round(f*N) distinct flips; std=population";

fn config_metadata(kind: &str, cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# klr-hopfield v{} {kind}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(
        out,
        "# n={} load={} p={} gamma={} noise_fraction={} trials={} max_epochs={} master_seed={}",
        cfg.n,
        cfg.load,
        cfg.patterns_per_trial(),
        cfg.gamma,
        cfg.noise_fraction,
        cfg.trials,
        cfg.max_epochs,
        cfg.master_seed
    );
    let _ = writeln!(
        out,
        "# learning_rate={} weight_decay={} iterations={} schemes={}",
        cfg.train.learning_rate,
        cfg.train.weight_decay,
        cfg.train.iterations,
        schemes_label(cfg)
    );
    let _ = writeln!(out, "{CONVENTIONS}");
    out
}

/// `scheme,epoch,overlap_mean,overlap_std,energy_mean`
pub fn dynamics_csv(agg: &DynamicsAggregate) -> String {
    let mut out = config_metadata("dynamics", &agg.config);
    let _ = writeln!(
        out,
        "# async_energy_monotone_fraction={}",
        agg.async_energy_monotone_fraction
    );
    out.push_str("scheme,epoch,overlap_mean,overlap_std,energy_mean\n");
    for traj in &agg.schemes {
        for epoch in 0..traj.overlap_mean.len() {
            let _ = writeln!(
                out,
                "{},{epoch},{},{},{}",
                traj.scheme.label(),
                fmt_f(traj.overlap_mean[epoch]),
                fmt_f(traj.overlap_std[epoch]),
                fmt_f(traj.energy_mean[epoch])
            );
        }
    }
    out
}

/// `n,load,scheme,accuracy_mean,accuracy_std`
pub fn capacity_csv(agg: &CapacityAggregate) -> String {
    let mut out = config_metadata("capacity", &agg.base);
    let _ = writeln!(
        out,
        "# sizes={} loads={}",
        agg.sizes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
        agg.loads.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
    );
    out.push_str("n,load,scheme,accuracy_mean,accuracy_std\n");
    for pt in &agg.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            pt.n,
            fmt_f(pt.load),
            pt.scheme.label(),
            fmt_f(pt.accuracy_mean),
            fmt_f(pt.accuracy_std)
        );
    }
    out
}

/// `noise_fraction,mean_events,std_events,mean_initial_hamming,success_rate`
pub fn efficiency_csv(agg: &EfficiencyAggregate) -> String {
    let mut out = config_metadata("efficiency", &agg.base);
    let _ = writeln!(
        out,
        "# noise_grid={}",
        agg.noise_grid.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    );
    out.push_str("noise_fraction,mean_events,std_events,mean_initial_hamming,success_rate\n");
    for pt in &agg.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f(pt.noise_fraction),
            fmt_f(pt.mean_events),
            fmt_f(pt.std_events),
            fmt_f(pt.mean_initial_hamming),
            fmt_f(pt.success_rate)
        );
    }
    out
}

/// `neuron,margin,exact_cross,condition_satisfied,exact_satisfied`
pub fn stability_csv(report: &MarginReport, n: usize, p: usize, gamma: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# klr-hopfield v{} stability report", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# n={n} p={p} gamma={gamma}");
    let _ = writeln!(out, "# interference_bound={}", fmt_f(report.interference_bound));
    let _ = writeln!(out, "# fraction_satisfied={}", fmt_f(report.fraction_satisfied));
    out.push_str("neuron,margin,exact_cross,condition_satisfied,exact_satisfied\n");
    for i in 0..report.margins.len() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{}",
            fmt_f(report.margins[i]),
            fmt_f(report.exact_cross[i]),
            report.condition_satisfied[i],
            report.exact_satisfied[i]
        );
    }
    out
}

pub fn stability_json(report: &MarginReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// Writes `contents` to `path`, surfacing I/O failures with the path.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn plot_prelude(csv: &str) -> String {
    format!(
        "set datafile separator \",\"\nset datafile commentschars \"#\"\ncsv = \"{csv}\"\n"
    )
}

/// Companion gnuplot script for a dynamics CSV.
pub fn dynamics_plotscript(csv_name: &str) -> String {
    let mut out = plot_prelude(csv_name);
    out.push_str(
        "set xlabel \"epoch\"\n\
         set ylabel \"overlap\"\n\
         set yrange [0:1.05]\n\
         plot csv every ::1 using 2:(strcol(1) eq \"sync\" ? $3 : 1/0) with linespoints title \"synchronous\", \\\n\
         \x20    csv every ::1 using 2:(strcol(1) eq \"async\" ? $3 : 1/0) with linespoints title \"asynchronous\"\n",
    );
    out
}

/// Companion gnuplot script for a capacity CSV.
pub fn capacity_plotscript(csv_name: &str, sizes: &[usize]) -> String {
    let mut out = plot_prelude(csv_name);
    out.push_str("set xlabel \"load P/N\"\nset ylabel \"recall accuracy\"\nset yrange [0:1.05]\nplot ");
    let mut parts = Vec::new();
    for &n in sizes {
        for scheme in ["sync", "async"] {
            parts.push(format!(
                "csv every ::1 using 2:(strcol(3) eq \"{scheme}\" && $1 == {n} ? $4 : 1/0) \
                 with linespoints title \"N={n} {scheme}\""
            ));
        }
    }
    out.push_str(&parts.join(", \\\n     "));
    out.push('\n');
    out
}

/// Companion gnuplot script for an efficiency CSV.
pub fn efficiency_plotscript(csv_name: &str) -> String {
    let mut out = plot_prelude(csv_name);
    out.push_str(
        "set xlabel \"noise fraction\"\n\
         set ylabel \"bit flips\"\n\
         set y2label \"success rate\"\n\
         set y2range [0:1.05]\n\
         set y2tics\n\
         plot csv every ::1 using 1:2 with linespoints title \"events\", \\\n\
         \x20    csv every ::1 using 1:4 with lines dashtype 2 title \"initial errors\", \\\n\
         \x20    csv every ::1 using 1:5 axes x1y2 with points pt 5 title \"success rate\"\n",
    );
    out
}
