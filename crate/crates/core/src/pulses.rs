//! Complex time-domain envelopes for the storage, probe and preparation
//! pulses.
//!
//! Times are in ns and detunings in MHz, so a carrier contributes the phase
//! `2π·f·t·1e-3`. Envelopes are scaled so that `Σ|E|²·dt` equals the mean
//! photon number of the pulse.

use std::f64::consts::{LN_2, PI};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{CombLayout, FrequencyGrid};
use crate::{fft, io};

/// Uniform time axis. The FFT treats it as one period of length `n_points·dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        let grid = Self {
            t_start,
            t_end,
            n_points,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Time grid whose FFT bins are spaced like the frequency grid, so that
    /// one period of the time axis matches the memory the frequency sampling
    /// can represent. An eighth of the period, at most 16 µs, lies before `t = 0`.
    pub fn paired(freq: &FrequencyGrid, n_points: usize) -> Self {
        let dt = 1e3 / (freq.resolution() * n_points as f64);
        let t_start = -(n_points as f64 * dt / 8.0).min(16_000.0);
        Self {
            t_start,
            t_end: t_start + (n_points - 1) as f64 * dt,
            n_points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 16 {
            return Err(Error::config(format!(
                "time grid needs at least 16 points, got {}",
                self.n_points
            )));
        }
        if !(self.t_end > self.t_start) || !self.t_start.is_finite() || !self.t_end.is_finite() {
            return Err(Error::config(format!(
                "time grid [{}, {}] ns is empty",
                self.t_start, self.t_end
            )));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_points - 1) as f64
    }

    /// Period of the circular time axis.
    pub fn period(&self) -> f64 {
        self.n_points as f64 * self.dt()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.time(i)).collect()
    }

    /// Index of the sample nearest to `t`, clamped to the grid.
    pub fn index_of(&self, t: f64) -> usize {
        let pos = ((t - self.t_start) / self.dt()).round();
        pos.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    /// Frequency (MHz) of FFT bin `k`.
    pub fn bin_frequency(&self, k: usize) -> f64 {
        fft::bin_frequency(k, self.n_points, self.dt()) * 1e3
    }

    /// Checks sampling against a frequency grid: `dt ≤ 1/(4·span)` and a
    /// period at least as long as the reciprocal frequency resolution.
    pub fn check_pairing(&self, freq: &FrequencyGrid) -> Result<()> {
        let dt_max = 1e3 / (4.0 * freq.span);
        if self.dt() > dt_max * (1.0 + 1e-9) {
            return Err(Error::config(format!(
                "time step {:.4} ns exceeds 1/(4*span) = {dt_max:.4} ns",
                self.dt()
            )));
        }
        let needed = 1e3 / freq.resolution();
        if self.period() < needed * (1.0 - 1e-9) {
            return Err(Error::config(format!(
                "time window {:.1} ns is shorter than 1/resolution = {needed:.1} ns",
                self.period()
            )));
        }
        Ok(())
    }

    /// Checks that the grid holds the input pulse and the first two echoes.
    pub fn check_echo_coverage(&self, fwhm_ns: f64, delta_mhz: f64) -> Result<()> {
        let need_lo = -3.0 * fwhm_ns;
        let need_hi = 2.5e3 / delta_mhz;
        if self.t_start > need_lo || self.t_end < need_hi {
            return Err(Error::config(format!(
                "time grid [{:.0}, {:.0}] ns does not cover [{need_lo:.0}, {need_hi:.0}] ns",
                self.t_start, self.t_end
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    #[default]
    Gaussian,
    Supergaussian,
    Sechyp,
    /// Envelope produced by propagation rather than a constructor.
    Propagated,
}

/// Chirped hyperbolic-secant parameters: `E(t) ∝ sech(β t)^(1 + iµ)`.
///
/// `beta` is in 1/µs, so the instantaneous frequency sweeps over
/// `± µ·β/(2π)` MHz around the center frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SechypParams {
    pub beta: f64,
    pub mu: f64,
    pub center_ns: f64,
}

impl SechypParams {
    pub fn intensity_fwhm_ns(&self) -> f64 {
        2.0 * (2f64.sqrt()).acosh() / self.beta * 1e3
    }

    pub fn max_frequency_deviation(&self) -> f64 {
        self.mu * self.beta / (2.0 * PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeMeta {
    pub shape: PulseShape,
    pub fwhm_ns: f64,
    pub supergauss_n: u32,
    pub phase_offset: f64,
    pub center_ns: f64,
    pub sechyp: Option<SechypParams>,
}

/// Declarative pulse description as it appears in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSpec {
    pub shape: PulseShape,
    pub fwhm_ns: f64,
    pub supergauss_n: u32,
    pub mean_photons: f64,
    pub carrier_detuning: f64,
    pub phase: f64,
    pub center_ns: f64,
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self {
            shape: PulseShape::Gaussian,
            fwhm_ns: 200.0,
            supergauss_n: 1,
            mean_photons: 0.1,
            carrier_detuning: 0.0,
            phase: 0.0,
            center_ns: 0.0,
        }
    }
}

impl PulseSpec {
    pub fn build(&self, grid: &TimeGrid) -> Result<Pulse> {
        match self.shape {
            PulseShape::Gaussian => shaped_pulse(grid, self, 1),
            PulseShape::Supergaussian => shaped_pulse(grid, self, self.supergauss_n),
            PulseShape::Sechyp | PulseShape::Propagated => Err(Error::config(format!(
                "pulse shape {:?} cannot be built from a scenario pulse spec",
                self.shape
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub grid: TimeGrid,
    pub envelope: Vec<Complex64>,
    pub carrier_detuning: f64,
    pub mean_photons: f64,
    pub shape_meta: ShapeMeta,
}

impl Pulse {
    /// Photon number `Σ|E|²·dt`.
    pub fn energy(&self) -> f64 {
        self.envelope.iter().map(|e| e.norm_sqr()).sum::<f64>() * self.grid.dt()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.envelope.iter().map(|e| e.norm_sqr()).collect()
    }

    /// Photon number inside `[t0, t1]`.
    pub fn energy_between(&self, t0: f64, t1: f64) -> f64 {
        let dt = self.grid.dt();
        self.envelope
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let t = self.grid.time(*i);
                t >= t0 && t <= t1
            })
            .map(|(_, e)| e.norm_sqr())
            .sum::<f64>()
            * dt
    }

    /// Intensity FWHM measured on the samples, with linear interpolation of
    /// the half-maximum crossings.
    pub fn measured_fwhm(&self) -> Option<f64> {
        measured_fwhm(&self.grid.times(), &self.intensity())
    }

    /// `(frequency MHz, spectral power)` in FFT bin order.
    pub fn power_spectrum(&self) -> Vec<(f64, f64)> {
        let mut buf = self.envelope.clone();
        fft::forward(&mut buf);
        buf.iter()
            .enumerate()
            .map(|(k, v)| (self.grid.bin_frequency(k), v.norm_sqr()))
            .collect()
    }

    /// Power-weighted mean frequency in MHz.
    pub fn spectral_centroid(&self) -> f64 {
        let spec = self.power_spectrum();
        let total: f64 = spec.iter().map(|(_, p)| p).sum();
        spec.iter().map(|(f, p)| f * p).sum::<f64>() / total
    }

    /// Spectral power FWHM in MHz.
    pub fn spectral_fwhm(&self) -> Option<f64> {
        let mut spec = self.power_spectrum();
        spec.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (f, p): (Vec<f64>, Vec<f64>) = spec.into_iter().unzip();
        measured_fwhm(&f, &p)
    }

    /// Copy with an extra global phase factor `e^{iφ}`.
    pub fn with_phase(&self, phi: f64) -> Pulse {
        let rot = Complex64::from_polar(1.0, phi);
        let mut out = self.clone();
        out.envelope.iter_mut().for_each(|e| *e *= rot);
        out.shape_meta.phase_offset += phi;
        out
    }

    /// Copy with the amplitude scaled so that the energy becomes `photons`.
    pub fn rescaled(&self, photons: f64) -> Pulse {
        let e = self.energy();
        let mut out = self.clone();
        let s = if e > 0.0 { (photons / e).sqrt() } else { 0.0 };
        out.envelope.iter_mut().for_each(|v| *v *= s);
        out.mean_photons = photons;
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.write_csv_between(path, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// As [`Pulse::write_csv`], keeping only samples with `t0 ≤ t ≤ t1`.
    pub fn write_csv_between(&self, path: &Path, t0: f64, t1: f64) -> Result<()> {
        let rows = self
            .envelope
            .iter()
            .enumerate()
            .map(|(i, e)| [self.grid.time(i), e.re, e.im])
            .filter(|r| r[0] >= t0 && r[0] <= t1);
        io::write_csv(path, &["t_ns", "re", "im"], rows)
    }
}

pub(crate) fn measured_fwhm(x: &[f64], y: &[f64]) -> Option<f64> {
    let (imax, ymax) = y
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    if !(ymax > 0.0) {
        return None;
    }
    let half = 0.5 * ymax;
    let left = (1..=imax).rev().find(|&i| y[i - 1] < half).map(|i| {
        let w = (half - y[i - 1]) / (y[i] - y[i - 1]);
        x[i - 1] + w * (x[i] - x[i - 1])
    })?;
    let right = (imax..y.len() - 1).find(|&i| y[i + 1] < half).map(|i| {
        let w = (y[i] - half) / (y[i] - y[i + 1]);
        x[i] + w * (x[i + 1] - x[i])
    })?;
    Some(right - left)
}

fn carrier(freq_mhz: f64, t_ns: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * freq_mhz * t_ns * 1e-3)
}

fn normalize(envelope: &mut [Complex64], dt: f64, photons: f64) {
    let e: f64 = envelope.iter().map(|v| v.norm_sqr()).sum::<f64>() * dt;
    let s = if e > 0.0 { (photons / e).sqrt() } else { 0.0 };
    envelope.iter_mut().for_each(|v| *v *= s);
}

fn check_photons(n: f64) -> Result<()> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::domain(format!(
            "mean photon number must be non-negative, got {n}"
        )));
    }
    Ok(())
}

fn shaped_pulse(grid: &TimeGrid, spec: &PulseSpec, order: u32) -> Result<Pulse> {
    grid.validate()?;
    check_photons(spec.mean_photons)?;
    if order < 1 {
        return Err(Error::domain("super-Gaussian order must be at least 1"));
    }
    if !(spec.fwhm_ns > 0.0) {
        return Err(Error::domain(format!(
            "pulse FWHM must be positive, got {}",
            spec.fwhm_ns
        )));
    }
    // Three amplitude standard deviations of the Gaussian on either side.
    let margin = 3.0 * spec.fwhm_ns / (2.0 * LN_2.sqrt());
    if spec.center_ns - margin < grid.t_start || spec.center_ns + margin > grid.t_end {
        return Err(Error::config(format!(
            "pulse of FWHM {} ns at {} ns is truncated by the grid [{}, {}] ns",
            spec.fwhm_ns, spec.center_ns, grid.t_start, grid.t_end
        )));
    }
    let p = 2 * order as i32;
    let phase = Complex64::from_polar(1.0, spec.phase);
    let mut envelope: Vec<Complex64> = grid
        .times()
        .into_iter()
        .map(|t| {
            let x = 2.0 * (t - spec.center_ns) / spec.fwhm_ns;
            // Intensity exp(-ln2·x^{2n}); the field carries half the exponent.
            let amp = (-0.5 * LN_2 * x.powi(p)).exp();
            phase * carrier(spec.carrier_detuning, t) * amp
        })
        .collect();
    normalize(&mut envelope, grid.dt(), spec.mean_photons);
    let shape = if order == 1 && spec.shape == PulseShape::Gaussian {
        PulseShape::Gaussian
    } else {
        PulseShape::Supergaussian
    };
    Ok(Pulse {
        grid: *grid,
        envelope,
        carrier_detuning: spec.carrier_detuning,
        mean_photons: spec.mean_photons,
        shape_meta: ShapeMeta {
            shape,
            fwhm_ns: spec.fwhm_ns,
            supergauss_n: order,
            phase_offset: spec.phase,
            center_ns: spec.center_ns,
            sechyp: None,
        },
    })
}

/// Transform-limited Gaussian centered at `t = 0`.
pub fn gaussian_pulse(
    grid: &TimeGrid,
    fwhm_ns: f64,
    mean_photons: f64,
    carrier_detuning: f64,
    phase: f64,
) -> Result<Pulse> {
    PulseSpec {
        shape: PulseShape::Gaussian,
        fwhm_ns,
        supergauss_n: 1,
        mean_photons,
        carrier_detuning,
        phase,
        center_ns: 0.0,
    }
    .build(grid)
}

/// Super-Gaussian of order `n` with intensity `exp(-ln2·(2t/FWHM)^{2n})`,
/// which makes the intensity FWHM exact for every order.
pub fn supergaussian_pulse(
    grid: &TimeGrid,
    fwhm_ns: f64,
    n: u32,
    mean_photons: f64,
    carrier_detuning: f64,
    phase: f64,
) -> Result<Pulse> {
    PulseSpec {
        shape: PulseShape::Supergaussian,
        fwhm_ns,
        supergauss_n: n,
        mean_photons,
        carrier_detuning,
        phase,
        center_ns: 0.0,
    }
    .build(grid)
}

/// Complex hyperbolic-secant pulse `sech(βt)^(1+iµ)` on a carrier at
/// `center_freq`. Envelope only: no population dynamics are attached.
pub fn sechyp_pulse(
    grid: &TimeGrid,
    center_freq: f64,
    params: SechypParams,
    mean_photons: f64,
) -> Result<Pulse> {
    grid.validate()?;
    check_photons(mean_photons)?;
    if !(params.beta > 0.0) {
        return Err(Error::domain(format!(
            "sechyp width parameter beta must be positive, got {}",
            params.beta
        )));
    }
    if !(params.mu >= 0.0) {
        return Err(Error::domain(format!(
            "sechyp chirp mu must be non-negative, got {}",
            params.mu
        )));
    }
    let mut envelope: Vec<Complex64> = grid
        .times()
        .into_iter()
        .map(|t| {
            let x = params.beta * (t - params.center_ns) * 1e-3;
            // ln sech(x) = -|x| - ln((1 + e^{-2|x|})/2), stable for large |x|.
            let ln_sech = -x.abs() - (0.5 * (1.0 + (-2.0 * x.abs()).exp())).ln();
            Complex64::new(ln_sech, params.mu * ln_sech).exp() * carrier(center_freq, t)
        })
        .collect();
    normalize(&mut envelope, grid.dt(), mean_photons);
    Ok(Pulse {
        grid: *grid,
        envelope,
        carrier_detuning: center_freq,
        mean_photons,
        shape_meta: ShapeMeta {
            shape: PulseShape::Sechyp,
            fwhm_ns: params.intensity_fwhm_ns(),
            supergauss_n: 1,
            phase_offset: 0.0,
            center_ns: params.center_ns,
            sechyp: Some(params),
        },
    })
}

/// One sechyp pulse per comb tooth, stepping the center frequency by Δ.
pub fn burn_schedule(
    comb: &CombLayout,
    grid: &TimeGrid,
    params: SechypParams,
    mean_photons: f64,
) -> Result<Vec<Pulse>> {
    comb.peak_positions()
        .into_iter()
        .map(|f| sechyp_pulse(grid, f, params, mean_photons))
        .collect()
}

/// Instantaneous frequency in MHz from the unwrapped phase of the samples.
pub fn instantaneous_frequency(pulse: &Pulse) -> Vec<f64> {
    let dt = pulse.grid.dt();
    let env = &pulse.envelope;
    let mut out = vec![0.0; env.len()];
    for i in 1..env.len() - 1 {
        let dphi = (env[i + 1] * env[i - 1].conj()).arg();
        out[i] = dphi / (2.0 * PI * 2.0 * dt * 1e-3);
    }
    out[0] = out[1];
    let n = env.len();
    out[n - 1] = out[n - 2];
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TimeGrid {
        TimeGrid::new(-4000.0, 12000.0, 1 << 13).unwrap()
    }

    #[test]
    fn gaussian_energy_and_width() {
        let g = grid();
        let p = gaussian_pulse(&g, 200.0, 0.1, 0.0, 0.0).unwrap();
        assert!((p.energy() - 0.1).abs() < 1e-4);
        let w = p.measured_fwhm().unwrap();
        assert!((w - 200.0).abs() < 2.0 * g.dt(), "fwhm {w}");
    }

    #[test]
    fn gaussian_time_bandwidth() {
        // Oracle: a transform-limited Gaussian has Δt·Δf = 2 ln2 / π ≈ 0.441.
        let g = TimeGrid::new(-50_000.0, 50_000.0, 1 << 16).unwrap();
        let p = gaussian_pulse(&g, 200.0, 0.1, 0.0, 0.0).unwrap();
        let bw = p.spectral_fwhm().unwrap();
        let expected = 2.0 * LN_2 / PI / 200.0 * 1e3;
        assert!((bw - expected).abs() < 0.02, "bandwidth {bw} vs {expected}");
        assert!((bw - 2.2).abs() < 0.03);
    }

    #[test]
    fn zero_photons_is_zero_envelope() {
        let p = gaussian_pulse(&grid(), 200.0, 0.0, 0.0, 0.0).unwrap();
        assert!(p.envelope.iter().all(|e| *e == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn truncated_pulse_rejected() {
        let g = TimeGrid::new(-100.0, 1000.0, 1024).unwrap();
        assert!(matches!(
            gaussian_pulse(&g, 200.0, 0.1, 0.0, 0.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn supergaussian_order_one_is_gaussian() {
        let g = grid();
        let a = gaussian_pulse(&g, 420.0, 0.1, 0.7, 0.3).unwrap();
        let b = supergaussian_pulse(&g, 420.0, 1, 0.1, 0.7, 0.3).unwrap();
        for (x, y) in a.envelope.iter().zip(&b.envelope) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn fig4_probe_width() {
        let g = grid();
        let p = supergaussian_pulse(&g, 840.0, 7, 0.1, 2.3, 0.0).unwrap();
        let w = p.measured_fwhm().unwrap();
        assert!((w - 840.0).abs() < 2.0 * g.dt());
        assert!((p.spectral_centroid() - 2.3).abs() < 0.01);
    }

    #[test]
    fn pi_flip_is_sign_change() {
        let g = grid();
        let a = supergaussian_pulse(&g, 840.0, 7, 0.1, 2.3, 0.0).unwrap();
        let b = supergaussian_pulse(&g, 840.0, 7, 0.1, 2.3, PI).unwrap();
        for (x, y) in a.envelope.iter().zip(&b.envelope) {
            assert!((x + y).norm() < 1e-12);
        }
    }

    #[test]
    fn unchirped_sechyp_is_real() {
        let g = grid();
        let s = SechypParams {
            beta: 10.0,
            mu: 0.0,
            center_ns: 1000.0,
        };
        let p = sechyp_pulse(&g, 0.0, s, 1.0).unwrap();
        assert!(p.envelope.iter().all(|e| e.im.abs() < 1e-15 && e.re >= 0.0));
        let f = instantaneous_frequency(&p);
        let i = g.index_of(1000.0);
        assert!(f[i - 200..i + 200].iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn sechyp_sweep_matches_analytic_phase_derivative() {
        // Oracle: phase µ·ln sech(βt) gives f(t) = -µβ tanh(βt)/(2π).
        let g = TimeGrid::new(-2000.0, 2000.0, 1 << 14).unwrap();
        let s = SechypParams {
            beta: 5.0,
            mu: 4.0,
            center_ns: 0.0,
        };
        let p = sechyp_pulse(&g, 0.0, s, 1.0).unwrap();
        let f = instantaneous_frequency(&p);
        for (i, t) in g.times().iter().enumerate().skip(1).step_by(97) {
            if i + 1 >= g.n_points {
                break;
            }
            let want = -s.mu * s.beta * (s.beta * t * 1e-3).tanh() / (2.0 * PI);
            assert!((f[i] - want).abs() < 1e-3, "t={t}: {} vs {want}", f[i]);
        }
        let extreme = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((extreme - s.max_frequency_deviation()).abs() < 1e-3);
    }

    #[test]
    fn sechyp_rejects_bad_width() {
        let s = SechypParams {
            beta: 0.0,
            mu: 1.0,
            center_ns: 0.0,
        };
        assert!(matches!(
            sechyp_pulse(&grid(), 0.0, s, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn burn_schedule_steps_by_delta() {
        use crate::spectral::{build_comb, CombParams, MaterialParams};
        let prof = build_comb(
            &CombParams::default(),
            &MaterialParams::default(),
            &FrequencyGrid::default(),
        )
        .unwrap();
        let comb = prof.comb.unwrap();
        let s = SechypParams {
            beta: 2.0,
            mu: 3.0,
            center_ns: 4000.0,
        };
        let pulses = burn_schedule(&comb, &grid(), s, 1.0).unwrap();
        let centers: Vec<f64> = pulses.iter().map(|p| p.carrier_detuning).collect();
        for w in centers.windows(2) {
            assert!((w[1] - w[0] - comb.params.delta).abs() < 1e-12);
        }
    }

    #[test]
    fn paired_grid_satisfies_pairing() {
        let f = FrequencyGrid::default();
        let t = TimeGrid::paired(&f, 1 << 17);
        t.check_pairing(&f).unwrap();
        assert!(t.dt() <= 6.25);
        let coarse = TimeGrid::paired(&f, 1 << 15);
        assert!(coarse.check_pairing(&f).is_err());
    }
}
