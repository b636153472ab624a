//! Beating between the echo and a frequency-offset probe.

use crate::error::{Error, Result};
use crate::pulses::Pulse;

/// Detected intensity `|E_echo(t) + E_probe(t)|²` on the shared time grid.
pub fn interference_trace(echo: &Pulse, probe: &Pulse) -> Result<Vec<f64>> {
    if echo.grid != probe.grid {
        return Err(Error::config("echo and probe are on different time grids"));
    }
    if echo.carrier_detuning == probe.carrier_detuning {
        return Err(Error::config(format!(
            "probe carrier {} MHz equals the echo carrier; there is no beat",
            probe.carrier_detuning
        )));
    }
    Ok(echo
        .envelope
        .iter()
        .zip(&probe.envelope)
        .map(|(a, b)| (a + b).norm_sqr())
        .collect())
}

/// Beat period in ns for two carriers.
pub fn beat_period(echo: &Pulse, probe: &Pulse) -> f64 {
    1e3 / (probe.carrier_detuning - echo.carrier_detuning).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::{supergaussian_pulse, TimeGrid};

    fn grid() -> TimeGrid {
        TimeGrid::new(-4000.0, 4000.0, 8192).unwrap()
    }

    #[test]
    fn pi_flip_inverts_the_beat() {
        let g = grid();
        let echo = supergaussian_pulse(&g, 1000.0, 7, 1.0, 0.0, 0.0).unwrap();
        let p0 = supergaussian_pulse(&g, 1000.0, 7, 1.0, 2.3, 0.0).unwrap();
        let a = interference_trace(&echo, &p0).unwrap();
        let b = interference_trace(&echo, &p0.with_phase(std::f64::consts::PI)).unwrap();
        let dc: Vec<f64> = echo
            .envelope
            .iter()
            .zip(&p0.envelope)
            .map(|(x, y)| x.norm_sqr() + y.norm_sqr())
            .collect();
        for i in 0..a.len() {
            assert!(((a[i] - dc[i]) + (b[i] - dc[i])).abs() < 1e-12);
        }
        assert!((beat_period(&echo, &p0) - 434.78).abs() < 0.01);
    }

    #[test]
    fn mismatches_rejected() {
        let g = grid();
        let a = supergaussian_pulse(&g, 1000.0, 7, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(interference_trace(&a, &a), Err(Error::Config(_))));
        let other = TimeGrid::new(-4000.0, 4000.0, 4096).unwrap();
        let b = supergaussian_pulse(&other, 1000.0, 7, 1.0, 2.3, 0.0).unwrap();
        assert!(matches!(interference_trace(&a, &b), Err(Error::Config(_))));
    }
}
