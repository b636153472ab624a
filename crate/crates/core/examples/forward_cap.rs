//! Forward re-emission is re-absorbed on its way out, which caps the echo
//! efficiency near 4/e² however deep the comb is made.
//!
//! cargo run --release --example forward_cap

use afc_memory::scenario::{run_sweep, Axis, Scenario};

fn main() -> afc_memory::Result<()> {
    let s = Scenario::preset("forward-cap")?;
    let axis: Axis = "alphaL=40:160:7".parse()?;
    let report = run_sweep(&s, &[axis])?;
    for row in &report.rows {
        println!(
            "alphaL {:>5.1}  alphaL/F {:.2}  eta {:.4}",
            row.alpha_l,
            row.alpha_l / row.finesse,
            row.eta_numeric
        );
    }
    match &report.forward_maximum {
        Some(m) => println!(
            "maximum {:.4} at alphaL {:.2} (alphaL/F {:.3}); 4/e² = {:.4}",
            m.eta_max,
            m.alpha_l_at_max,
            m.alpha_l_at_max * s.comb.gamma_fwhm / s.comb.delta,
            4.0 * (-2.0f64).exp()
        ),
        None => println!("no interior maximum: {:?}", report.forward_message),
    }
    Ok(())
}
