//! Discrete-ion picture of the comb: each absorber keeps the phase
//! `e^{i(δ_j t − k z_j)}` after the pulse, and the collective field is the
//! weighted sum over ions. It shares no code path with the transfer-function
//! model and serves as its independent check.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::echo::parabolic_offset;
use crate::error::{Error, Result};
use crate::fft;
use crate::pulses::Pulse;
use crate::spectral::SpectralProfile;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ion {
    /// MHz.
    pub detuning: f64,
    /// Position along the crystal as a fraction of its length.
    pub position: f64,
    pub weight: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IonEnsemble {
    pub ions: Vec<Ion>,
    /// Carrier wavenumber times the crystal length, in radians.
    pub k: f64,
    pub seed: u64,
}

impl IonEnsemble {
    /// Draws `n_ions` detunings in `range` with density proportional to the
    /// optical depth of `profile`. With `excitation` given, each ion's weight
    /// is the pulse spectral amplitude at its detuning; otherwise all weights
    /// are equal. Weights are normalized to `Σ|c_j|² = 1`.
    pub fn sample(
        profile: &SpectralProfile,
        range: (f64, f64),
        n_ions: usize,
        excitation: Option<&Pulse>,
        k: f64,
        seed: u64,
    ) -> Result<Self> {
        let (lo, hi) = range;
        if !(hi > lo) {
            return Err(Error::config(format!(
                "empty sampling range [{lo}, {hi}] MHz"
            )));
        }
        let i0 = nearest_index(profile, lo);
        let i1 = nearest_index(profile, hi);
        let ceiling = profile.alpha_l[i0..=i1].iter().copied().fold(0.0, f64::max) * 1.0001;
        if n_ions > 0 && !(ceiling > 0.0) {
            return Err(Error::domain("no absorbers in the sampling range"));
        }
        let spectrum = excitation.map(SpectralAmplitude::new);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ions = Vec::with_capacity(n_ions);
        while ions.len() < n_ions {
            let f = rng.random_range(lo..hi);
            if rng.random::<f64>() * ceiling >= profile.depth_at(f) {
                continue;
            }
            let weight = spectrum
                .as_ref()
                .map_or(Complex64::new(1.0, 0.0), |s| s.at(f));
            ions.push(Ion {
                detuning: f,
                position: rng.random(),
                weight,
            });
        }
        Ok(Self::normalized(ions, k, seed))
    }

    /// Ideal comb of infinitely narrow lines `δ_j = m_j·Δ`, one ion per line,
    /// equal weights. Lines are symmetric about zero.
    pub fn dirac_comb(delta: f64, n_lines: usize) -> Self {
        let half = 0.5 * (n_lines as f64 - 1.0);
        let ions = (0..n_lines)
            .map(|m| Ion {
                detuning: (m as f64 - half) * delta,
                position: 0.0,
                weight: Complex64::new(1.0, 0.0),
            })
            .collect();
        Self::normalized(ions, 0.0, 0)
    }

    fn normalized(mut ions: Vec<Ion>, k: f64, seed: u64) -> Self {
        let norm = ions.iter().map(|i| i.weight.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            ions.iter_mut().for_each(|i| i.weight /= norm);
        }
        Self { ions, k, seed }
    }

    pub fn len(&self) -> usize {
        self.ions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ions.is_empty()
    }
}

fn nearest_index(profile: &SpectralProfile, f: f64) -> usize {
    let pos = ((f - profile.grid.start()) / profile.grid.resolution()).round();
    pos.clamp(0.0, (profile.grid.n_points - 1) as f64) as usize
}

/// Pulse spectrum with linear interpolation between FFT bins.
struct SpectralAmplitude {
    bins: Vec<Complex64>,
    df: f64,
}

impl SpectralAmplitude {
    fn new(pulse: &Pulse) -> Self {
        let mut bins = pulse.envelope.clone();
        fft::forward(&mut bins);
        // Undo the time offset of the grid so the phase refers to t = 0.
        let n = bins.len();
        let t0 = pulse.grid.t_start;
        for (k, b) in bins.iter_mut().enumerate() {
            let f = pulse.grid.bin_frequency(k);
            *b *= Complex64::from_polar(1.0, -2.0 * PI * f * t0 * 1e-3);
        }
        let df = pulse.grid.bin_frequency(1);
        debug_assert!(n > 1);
        Self { bins, df }
    }

    fn at(&self, f: f64) -> Complex64 {
        let n = self.bins.len() as f64;
        let pos = (f / self.df).rem_euclid(n);
        let i = pos.floor() as usize % self.bins.len();
        let j = (i + 1) % self.bins.len();
        let w = pos - pos.floor();
        self.bins[i] * (1.0 - w) + self.bins[j] * w
    }
}

/// Collective emission `|Σ_j c_j e^{i(2πδ_j t − k z_j)}·e^{i k z_j}|²` in the
/// forward mode, where the detected wave's `e^{ikz}` cancels the stored
/// phase. Normalized by `(Σ|c_j|)²`, so a perfectly rephased ensemble gives 1.
/// Times in ns.
pub fn ensemble_echo(ensemble: &IonEnsemble, times: &[f64]) -> Result<Vec<f64>> {
    if ensemble.is_empty() {
        return Err(Error::domain("ensemble has no ions"));
    }
    let norm: f64 = ensemble.ions.iter().map(|i| i.weight.norm()).sum();
    if !(norm > 0.0) {
        return Err(Error::domain("ensemble weights are all zero"));
    }
    let norm_sq = norm * norm;
    Ok(times
        .par_iter()
        .map(|t| {
            let w = 2.0 * PI * t * 1e-3;
            let s: Complex64 = ensemble
                .ions
                .iter()
                .map(|ion| {
                    let (sin, cos) = (w * ion.detuning).sin_cos();
                    ion.weight * Complex64::new(cos, sin)
                })
                .sum();
            s.norm_sqr() / norm_sq
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleEcho {
    pub time: f64,
    pub relative_intensity: f64,
}

/// Largest emission within `±half_width` of `1/Δ`, sampled every `step_ns`
/// and refined by a parabola through the top three samples.
pub fn first_echo(
    ensemble: &IonEnsemble,
    delta: f64,
    half_width: f64,
    step_ns: f64,
) -> Result<EnsembleEcho> {
    let t_echo = 1e3 / delta;
    let n = (2.0 * half_width / step_ns).ceil() as usize + 1;
    let times: Vec<f64> = (0..n)
        .map(|i| t_echo - half_width + i as f64 * step_ns)
        .collect();
    let trace = ensemble_echo(ensemble, &times)?;
    let k = (0..n)
        .max_by(|a, b| trace[*a].total_cmp(&trace[*b]))
        .unwrap_or(0);
    let dk = parabolic_offset(&trace, k);
    let time = times[k] + dk * step_ns;
    let relative_intensity = ensemble_echo(ensemble, &[time])?[0].max(trace[k]);
    Ok(EnsembleEcho {
        time,
        relative_intensity,
    })
}

/// Forward echo efficiency from the ensemble picture: the fraction
/// `d̃²·e^{−d̃}` absorbed and re-emitted past the re-absorbing comb at mean
/// depth `d̃`, times the ensemble's first-echo rephasing.
pub fn ensemble_efficiency(effective_depth: f64, first_echo: &EnsembleEcho) -> f64 {
    let d = effective_depth;
    d * d * (-d).exp() * first_echo.relative_intensity
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_comb, CombParams, FrequencyGrid, MaterialParams};

    #[test]
    fn dirac_comb_rephases_exactly() {
        let ens = IonEnsemble::dirac_comb(1.2, 7);
        let t = 1e3 / 1.2;
        let trace = ensemble_echo(&ens, &[0.0, t, 2.0 * t, 3.0 * t, 0.5 * t]).unwrap();
        for v in &trace[..4] {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!(trace[4] < 0.5);
        let total: f64 = ens.ions.iter().map(|i| i.weight.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_frequency_has_flat_trace() {
        let ens = IonEnsemble::normalized(
            vec![
                Ion {
                    detuning: 0.7,
                    position: 0.0,
                    weight: Complex64::new(1.0, 0.0)
                };
                50
            ],
            0.0,
            0,
        );
        let times: Vec<f64> = (0..40).map(|i| i as f64 * 37.0).collect();
        for v in ensemble_echo(&ens, &times).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_ensemble_is_a_domain_error() {
        let ens = IonEnsemble::normalized(vec![], 0.0, 0);
        assert!(matches!(ensemble_echo(&ens, &[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn gaussian_peaks_dephase_by_the_closed_form_factor() {
        let m = MaterialParams {
            excited_splitting_limit: 20.0,
            probe_window: false,
            ..Default::default()
        };
        let c = CombParams {
            delta: 1.2,
            gamma_fwhm: 0.3,
            n_peaks: Some(9),
            ..Default::default()
        };
        let profile = build_comb(&c, &m, &FrequencyGrid::default()).unwrap();
        let ens = IonEnsemble::sample(&profile, (-6.0, 6.0), 20_000, None, 0.0, 7).unwrap();
        let echo = first_echo(&ens, 1.2, 100.0, 2.0).unwrap();
        let closed = (-7.0f64 / 16.0).exp();
        assert!(
            (echo.relative_intensity / closed - 1.0).abs() < 0.05,
            "{} vs {closed}",
            echo.relative_intensity
        );
        assert!((echo.time - 1e3 / 1.2).abs() < 2.0);
    }

    #[test]
    fn sampling_is_seeded() {
        let profile = build_comb(
            &CombParams::default(),
            &MaterialParams::default(),
            &FrequencyGrid::default(),
        )
        .unwrap();
        let a = IonEnsemble::sample(&profile, (-3.0, 3.0), 500, None, 1.0, 3).unwrap();
        let b = IonEnsemble::sample(&profile, (-3.0, 3.0), 500, None, 1.0, 3).unwrap();
        assert_eq!(a, b);
    }
}
