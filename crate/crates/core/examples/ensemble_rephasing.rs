//! The same comb seen as a cloud of discrete ions: sample detunings from the
//! absorption profile, let each ion precess, and watch the phases realign
//! at 1/Δ.
//!
//! cargo run --release --example ensemble_rephasing

use afc_memory::propagation::{ensemble_echo, ensemble_efficiency, first_echo, IonEnsemble};
use afc_memory::scenario::Scenario;

fn main() -> afc_memory::Result<()> {
    let s = Scenario::preset("wide-comb")?;
    let run = s.echo_model().run()?;
    let layout = run.profile.comb.expect("comb profile");
    let peaks = layout.peak_positions();
    let range = (
        peaks[0] - s.comb.delta,
        peaks[peaks.len() - 1] + s.comb.delta,
    );
    let ens = IonEnsemble::sample(&run.profile, range, 100_000, Some(&run.input), 0.0, s.seed)?;

    let period = 1e3 / s.comb.delta;
    let times: Vec<f64> = (0..=12).map(|k| k as f64 * period / 4.0).collect();
    for (t, v) in times.iter().zip(ensemble_echo(&ens, &times)?) {
        println!("t {t:7.1} ns  coherence {v:.4}");
    }

    let echo = first_echo(&ens, s.comb.delta, 100.0, 1.0)?;
    let depth = run.profile.effective_depth().unwrap_or(0.0);
    println!(
        "first echo     {:.2} ns, rephasing {:.4}",
        echo.time, echo.relative_intensity
    );
    println!("ensemble η     {:.4}", ensemble_efficiency(depth, &echo));
    println!("propagated η   {:.4}", run.echo.efficiency);
    Ok(())
}
