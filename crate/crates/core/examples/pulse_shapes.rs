//! The three pulse families: Gaussian storage pulse, flat-topped probe and
//! the chirped hyperbolic-secant pulse used to burn comb peaks.

use afc_memory::pulses::{
    gaussian_pulse, instantaneous_frequency, sechyp_pulse, supergaussian_pulse, SechypParams,
    TimeGrid,
};

fn main() -> afc_memory::Result<()> {
    let grid = TimeGrid::new(-8000.0, 8000.0, 1 << 15)?;

    let storage = gaussian_pulse(&grid, 200.0, 0.1, 0.0, 0.0)?;
    let probe = supergaussian_pulse(&grid, 840.0, 7, 0.05, 2.3, 0.0)?;
    let sech = SechypParams {
        // 1/µs: a 440 ns pulse sweeping ±3.2 MHz.
        beta: 4.0,
        mu: 5.0,
        center_ns: 0.0,
    };
    let burn = sechyp_pulse(&grid, 1.2, sech, 1.0)?;

    for (name, p) in [
        ("gaussian", &storage),
        ("supergaussian", &probe),
        ("sechyp", &burn),
    ] {
        let fwhm = p.measured_fwhm().unwrap_or(f64::NAN);
        let bw = p.spectral_fwhm().unwrap_or(f64::NAN);
        println!(
            "{name:14} photons {:.3}  fwhm {fwhm:7.1} ns  spectrum {bw:.3} MHz  centroid {:+.3} MHz  tbp {:.3}",
            p.energy(),
            p.spectral_centroid(),
            fwhm * bw * 1e-3
        );
    }

    // The secant pulse sweeps ±μβ/2π around its center frequency.
    let f = instantaneous_frequency(&burn);
    let i = grid.index_of(0.0);
    let span = (f[grid.index_of(1000.0)] - f[grid.index_of(-1000.0)]).abs();
    println!(
        "sechyp chirp: {:.3} MHz at center, {:.3} MHz across ±1 µs (limit {:.3})",
        f[i],
        span,
        2.0 * sech.max_frequency_deviation()
    );
    Ok(())
}
