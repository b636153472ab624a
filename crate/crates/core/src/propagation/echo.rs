//! Echo and transmission windows of a propagated pulse.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pulses::Pulse;

/// Fraction of the input energy that must fall inside its own window for the
/// windows to be considered separated.
pub const WINDOW_CONTAINMENT: f64 = 0.99;

/// Echo-window energy, relative to the input, below which no echo is
/// reported. The Gaussian tail of the input alone reaches ~1e-6 there.
pub const ECHO_DETECTION_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct EchoResult {
    pub output_pulse: Pulse,
    /// Storage delay: lag of the best overlap between the echo field and the
    /// transmitted field. `None` when the echo window carries no energy.
    pub echo_time: Option<f64>,
    /// Time of the largest output intensity inside the echo window. Includes
    /// the group delay of the medium, which the storage delay does not.
    pub echo_peak_time: f64,
    pub echo_window: (f64, f64),
    pub transmitted_window: (f64, f64),
    pub efficiency: f64,
    pub transmitted_fraction: f64,
}

/// Window half-width `min(1/(2Δ), 3τ)` in ns.
pub fn window_half_width(delta_mhz: f64, fwhm_ns: f64) -> f64 {
    (500.0 / delta_mhz).min(3.0 * fwhm_ns)
}

/// Splits `output` into a transmitted window around the input center and an
/// echo window one period `1/Δ` later, and measures both against the input.
pub fn echo_efficiency(input: &Pulse, output: &Pulse, delta: f64) -> Result<EchoResult> {
    if !(delta > 0.0) {
        return Err(Error::domain(format!(
            "peak spacing must be positive, got {delta}"
        )));
    }
    if input.grid != output.grid {
        return Err(Error::config(
            "input and output pulses are on different time grids",
        ));
    }
    let grid = output.grid;
    let period = 1e3 / delta;
    let center = input.shape_meta.center_ns;
    let hw = window_half_width(delta, input.shape_meta.fwhm_ns);
    let transmitted_window = (center - hw, center + hw);
    let echo_window = (center + period - hw, center + period + hw);
    if echo_window.1 > grid.t_end || transmitted_window.0 < grid.t_start {
        return Err(Error::config(format!(
            "time grid [{:.0}, {:.0}] ns does not hold the windows [{:.0}, {:.0}] ns",
            grid.t_start, grid.t_end, transmitted_window.0, echo_window.1
        )));
    }
    let e_in = input.energy();
    if !(e_in > 0.0) {
        return Err(Error::analysis("input pulse carries no energy"));
    }
    let contained = input.energy_between(transmitted_window.0, transmitted_window.1) / e_in;
    if contained < WINDOW_CONTAINMENT {
        return Err(Error::analysis(format!(
            "only {:.1}% of the input lies within ±{hw:.0} ns; the pulse is too long \
             for a comb spacing of {delta} MHz",
            100.0 * contained
        )));
    }
    let efficiency = output.energy_between(echo_window.0, echo_window.1) / e_in;
    let transmitted_fraction =
        output.energy_between(transmitted_window.0, transmitted_window.1) / e_in;

    let echo_peak_time = peak_time(output, echo_window);
    let echo_time = if efficiency > ECHO_DETECTION_FLOOR {
        storage_delay(output, transmitted_window, period, hw)
    } else {
        None
    };
    Ok(EchoResult {
        output_pulse: output.clone(),
        echo_time,
        echo_peak_time,
        echo_window,
        transmitted_window,
        efficiency,
        transmitted_fraction,
    })
}

fn peak_time(pulse: &Pulse, window: (f64, f64)) -> f64 {
    let g = pulse.grid;
    let (lo, hi) = (g.index_of(window.0), g.index_of(window.1));
    let intensity = pulse.intensity();
    let imax = (lo..=hi)
        .max_by(|a, b| intensity[*a].total_cmp(&intensity[*b]))
        .unwrap_or(lo);
    g.time(imax) + parabolic_offset(&intensity, imax) * g.dt()
}

/// Lag in `[period - hw, period + hw]` maximizing `|Σ E(t+τ)·E*(t)|` over the
/// transmitted window.
fn storage_delay(pulse: &Pulse, window: (f64, f64), period: f64, hw: f64) -> Option<f64> {
    let g = pulse.grid;
    let dt = g.dt();
    let env = &pulse.envelope;
    let (t0, t1) = (g.index_of(window.0), g.index_of(window.1));
    let lag_lo = ((period - hw) / dt).floor().max(1.0) as usize;
    let lag_hi = ((period + hw) / dt).ceil() as usize;
    let overlap: Vec<f64> = (lag_lo..=lag_hi)
        .map(|lag| {
            (t0..=t1)
                .filter(|i| i + lag < env.len())
                .map(|i| env[i + lag] * env[i].conj())
                .sum::<Complex64>()
                .norm()
        })
        .collect();
    let k = (0..overlap.len()).max_by(|a, b| overlap[*a].total_cmp(&overlap[*b]))?;
    if overlap[k] == 0.0 {
        return None;
    }
    Some((lag_lo as f64 + k as f64 + parabolic_offset(&overlap, k)) * dt)
}

/// Vertex offset, in samples, of the parabola through `y[k-1..=k+1]`.
pub(crate) fn parabolic_offset(y: &[f64], k: usize) -> f64 {
    if k == 0 || k + 1 >= y.len() {
        return 0.0;
    }
    let (a, b, c) = (y[k - 1], y[k], y[k + 1]);
    let den = a - 2.0 * b + c;
    if den >= 0.0 {
        return 0.0;
    }
    (0.5 * (a - c) / den).clamp(-0.5, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::transfer::{make_transfer_function, propagate, TransferFunction};
    use crate::pulses::{gaussian_pulse, TimeGrid};
    use crate::spectral::{build_comb, CombParams, FrequencyGrid, MaterialParams};

    #[test]
    fn empty_pit_has_no_echo() {
        let fg = FrequencyGrid::default();
        let tg = TimeGrid::paired(&fg, 1 << 16);
        let p = gaussian_pulse(&tg, 200.0, 0.1, 0.0, 0.0).unwrap();
        let out = propagate(&p, &TransferFunction::identity(fg)).unwrap();
        let r = echo_efficiency(&p, &out, 1.2).unwrap();
        assert!(r.efficiency < ECHO_DETECTION_FLOOR);
        assert!((r.transmitted_fraction - 1.0).abs() < ECHO_DETECTION_FLOOR);
        assert_eq!(r.echo_time, None);
    }

    #[test]
    fn fig3_echo_lands_in_band() {
        let fg = FrequencyGrid::default();
        let profile = build_comb(&CombParams::default(), &MaterialParams::default(), &fg).unwrap();
        let tf = make_transfer_function(&profile).unwrap();
        let tg = TimeGrid::paired(&fg, 1 << 17);
        let p = gaussian_pulse(&tg, 200.0, 0.1, 0.0, 0.0).unwrap();
        let out = propagate(&p, &tf).unwrap();
        let r = echo_efficiency(&p, &out, 1.2).unwrap();
        assert!(
            r.efficiency > 0.25 && r.efficiency < 0.40,
            "{}",
            r.efficiency
        );
        assert!(r.efficiency + r.transmitted_fraction <= 1.0 + 1e-9);
        let t = r.echo_time.unwrap();
        assert!((t - 833.3).abs() < 40.0, "{t}");
    }

    #[test]
    fn long_pulse_rejected() {
        let fg = FrequencyGrid::default();
        let tg = TimeGrid::paired(&fg, 1 << 16);
        let p = gaussian_pulse(&tg, 900.0, 0.1, 0.0, 0.0).unwrap();
        let r = echo_efficiency(&p, &p, 1.2);
        assert!(matches!(r, Err(Error::Analysis(_))));
    }

    #[test]
    fn parabola_vertex() {
        let y: Vec<f64> = (0..5).map(|i| -((i as f64 - 2.3).powi(2))).collect();
        assert!((parabolic_offset(&y, 2) - 0.3).abs() < 1e-12);
    }
}
