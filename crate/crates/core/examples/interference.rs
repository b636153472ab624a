//! Beat the recalled echo against a 2.3 MHz-offset probe, once with the
//! probe phase at 0 and once at π.
//!
//! cargo run --release --example interference [preset]

use afc_memory::scenario::{run_interference, Scenario};

fn main() -> afc_memory::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "fig4".into());
    let report = run_interference(&Scenario::preset(&name)?)?;
    let r = &report.results;
    println!("preset              {name}");
    println!("expected period     {:.2} ns", r.expected_period_ns);
    println!("fitted period       {:.2} ns", r.phase_0.period_ns);
    println!("probe transmission  {:.4}", r.probe_transmission);
    println!(
        "visibility (0, π)   {:.4}, {:.4}",
        r.phase_0.visibility, r.phase_pi.visibility
    );
    println!("two-wave bound      {:.4}", r.visibility_two_wave);
    println!("phase difference    {:.4} rad", r.phase_difference);
    Ok(())
}
