//! The comb's phase is not free: it follows from the absorption through the
//! Kramers–Kronig relation, and the impulse response it produces vanishes
//! before t = 0.

use afc_memory::propagation::{make_transfer_function_with, Dispersion, CAUSALITY_TOLERANCE};
use afc_memory::spectral::{build_comb, CombParams, FrequencyGrid, MaterialParams};

fn main() -> afc_memory::Result<()> {
    let grid = FrequencyGrid::new(0.0, 40.0, 16384)?;
    let profile = build_comb(&CombParams::default(), &MaterialParams::default(), &grid)?;
    for d in [Dispersion::KramersKronig, Dispersion::None] {
        let tf = make_transfer_function_with(&profile, d)?;
        println!(
            "{d:?}: pre-zero energy fraction {:.3e} (tolerance {CAUSALITY_TOLERANCE:.0e})",
            tf.causality_leak()
        );
    }
    let tf = make_transfer_function_with(&profile, Dispersion::KramersKronig)?;
    for f in [0.0, 0.15, 0.6, 2.3] {
        let l = tf.log_at(f);
        println!(
            "f {f:>5} MHz  |t|² {:.4}  phase {:+.4} rad",
            (2.0 * l.re).exp(),
            l.im
        );
    }
    Ok(())
}
