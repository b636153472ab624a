//! The weak-pulse counting experiment: 2000 shots of 0.1 photons through a
//! lossy detection chain, a handful of counts per histogram, and the area
//! ratio that turns them into an efficiency.
//!
//! cargo run --release --example photon_counting

use afc_memory::scenario::{run_counts, Scenario};

fn main() -> afc_memory::Result<()> {
    let mut s = Scenario::preset("fig3")?;
    s.counts.injected_efficiency = Some(0.25);
    println!(
        "{:>4} {:>4} {:>4} {:>8} {:>8} {:>17}",
        "seed", "ref", "echo", "eta", "stderr", "95% interval"
    );
    for seed in 0..10 {
        s.seed = seed;
        match run_counts(&s) {
            Ok(report) => {
                let r = &report.results;
                let e = &r.estimate;
                println!(
                    "{seed:>4} {:>4} {:>4} {:>8.3} {:>8.3} [{:>6.3}, {:>6.3}]",
                    r.reference_total, r.echo_total, e.eta, e.stderr, e.ci_low, e.ci_high
                );
            }
            Err(err) => println!("{seed:>4} {err}"),
        }
    }
    let first = run_counts(&Scenario {
        seed: 0,
        ..s.clone()
    })?;
    println!(
        "expected reference counts {:.3}",
        first.results.expected_reference_counts
    );
    println!(
        "expected echo counts      {:.3}",
        first.results.expected_echo_counts
    );
    Ok(())
}
