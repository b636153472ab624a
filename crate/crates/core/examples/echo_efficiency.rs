//! Store a 200 ns pulse in the 1.2 MHz comb and compare the numeric echo
//! efficiency with the closed form.
//!
//! cargo run --release --example echo_efficiency

use afc_memory::propagation::analytic_efficiency;
use afc_memory::scenario::Scenario;

fn main() -> afc_memory::Result<()> {
    let s = Scenario::preset("fig3")?;
    let run = s.echo_model().run()?;
    let echo = &run.echo;
    let finesse = s.comb.finesse()?;

    println!(
        "comb          Δ {} MHz, γ {} MHz, αL {}, F {finesse:.2}",
        s.comb.delta, s.comb.gamma_fwhm, s.comb.alpha_l
    );
    println!("numeric η     {:.4}", echo.efficiency);
    println!(
        "closed form η {:.4}",
        analytic_efficiency(s.comb.alpha_l, finesse)?
    );
    println!("transmitted   {:.4}", echo.transmitted_fraction);
    if let Some(t) = echo.echo_time {
        println!(
            "storage delay {t:.1} ns (1/Δ = {:.1} ns)",
            1e3 / s.comb.delta
        );
    }
    println!("echo peak     {:.1} ns", echo.echo_peak_time);
    println!("causality     {:.2e}", run.transfer.causality_leak());
    Ok(())
}
