//! Linear response of the prepared medium.
//!
//! The field transmission is `t(f) = exp(-αL(f)/2 + iφ(f))`. The phase is the
//! Kramers–Kronig partner of the absorption, obtained by folding the cepstrum
//! of `ln|t|` onto non-negative delays: a response whose logarithm is causal
//! is itself causal.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::pulses::{Pulse, PulseShape};
use crate::spectral::{FrequencyGrid, SpectralProfile};

/// Largest fraction of impulse-response energy tolerated at negative delay.
pub const CAUSALITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dispersion {
    /// Causal phase from the absorption profile.
    #[default]
    KramersKronig,
    /// Real transmission, no refractive phase. Acausal; for comparisons only.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    pub grid: FrequencyGrid,
    /// `ln t(f)`, kept for interpolation onto pulse spectra.
    pub log_response: Vec<Complex64>,
    pub amplitude_response: Vec<Complex64>,
    pub dispersion: Dispersion,
    /// Optical coherence time in µs; `None` disables the echo decay.
    pub decoherence_t2: Option<f64>,
}

impl TransferFunction {
    /// Lossless medium on `grid`.
    pub fn identity(grid: FrequencyGrid) -> Self {
        let n = grid.n_points;
        Self {
            grid,
            log_response: vec![Complex64::new(0.0, 0.0); n],
            amplitude_response: vec![Complex64::new(1.0, 0.0); n],
            dispersion: Dispersion::KramersKronig,
            decoherence_t2: None,
        }
    }

    pub fn with_decoherence(mut self, t2_us: Option<f64>) -> Self {
        self.decoherence_t2 = t2_us;
        self
    }

    /// `ln t` at an arbitrary detuning: linear interpolation inside the grid,
    /// the edge value outside.
    pub fn log_at(&self, f: f64) -> Complex64 {
        let n = self.grid.n_points;
        let pos = (f - self.grid.start()) / self.grid.resolution();
        if pos <= 0.0 {
            return self.log_response[0];
        }
        if pos >= (n - 1) as f64 {
            return self.log_response[n - 1];
        }
        let i = pos.floor() as usize;
        let w = pos - i as f64;
        self.log_response[i] * (1.0 - w) + self.log_response[i + 1] * w
    }

    /// Impulse response over one period of `1/resolution`, index `n` at
    /// delay `n/(N·resolution)`. Indices past `N/2` are negative delays.
    pub fn impulse_response(&self) -> Vec<Complex64> {
        let mut h = self.amplitude_response.clone();
        fft::inverse(&mut h);
        h
    }

    /// Fraction of impulse-response energy at negative delay.
    pub fn causality_leak(&self) -> f64 {
        let h = self.impulse_response();
        let total: f64 = h.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let half = h.len() / 2;
        h[half + 1..].iter().map(|v| v.norm_sqr()).sum::<f64>() / total
    }
}

pub fn make_transfer_function(profile: &SpectralProfile) -> Result<TransferFunction> {
    make_transfer_function_with(profile, Dispersion::KramersKronig)
}

pub fn make_transfer_function_with(
    profile: &SpectralProfile,
    dispersion: Dispersion,
) -> Result<TransferFunction> {
    let grid = profile.grid;
    grid.validate()?;
    if let Some(comb) = profile.comb {
        let extent = comb.extent();
        if grid.span < 4.0 * extent {
            return Err(Error::config(format!(
                "frequency span {} MHz is below 4x the comb extent {extent:.3} MHz",
                grid.span
            )));
        }
    }
    let n = grid.n_points;
    let log_response: Vec<Complex64> = match dispersion {
        Dispersion::None => profile
            .alpha_l
            .iter()
            .map(|a| Complex64::new(-0.5 * a, 0.0))
            .collect(),
        Dispersion::KramersKronig => {
            let mut cep: Vec<Complex64> = profile
                .alpha_l
                .iter()
                .map(|a| Complex64::new(-0.5 * a, 0.0))
                .collect();
            fft::inverse(&mut cep);
            fold_causal(&mut cep);
            fft::forward(&mut cep);
            // Pin the real part to the exact absorption; the fold only sets the phase.
            cep.iter_mut()
                .zip(&profile.alpha_l)
                .for_each(|(l, a)| l.re = -0.5 * a);
            cep
        }
    };
    let amplitude_response = log_response.iter().map(|l| l.exp()).collect();
    let tf = TransferFunction {
        grid,
        log_response,
        amplitude_response,
        dispersion,
        decoherence_t2: None,
    };
    debug_assert_eq!(tf.amplitude_response.len(), n);
    if dispersion == Dispersion::KramersKronig {
        let leak = tf.causality_leak();
        if leak > CAUSALITY_TOLERANCE {
            return Err(Error::config(format!(
                "impulse response leaks {leak:.2e} of its energy to negative delay; \
                 refine the frequency grid"
            )));
        }
    }
    Ok(tf)
}

/// Doubles positive quefrencies and clears negative ones.
fn fold_causal(cep: &mut [Complex64]) {
    let n = cep.len();
    let half = n / 2;
    for (i, c) in cep.iter_mut().enumerate() {
        let w = if i == 0 || (n.is_multiple_of(2) && i == half) {
            1.0
        } else if i < n.div_ceil(2) {
            2.0
        } else {
            0.0
        };
        *c *= w;
    }
}

/// Passes `pulse` through `tf`: multiply the pulse spectrum by `t(f)` and
/// transform back. With decoherence enabled the field at `t > 0` is scaled by
/// `e^{-t/T2}`, taking the input arrival as the time origin.
pub fn propagate(pulse: &Pulse, tf: &TransferFunction) -> Result<Pulse> {
    let grid = pulse.grid;
    grid.check_pairing(&tf.grid)?;
    let mut spec = pulse.envelope.clone();
    fft::forward(&mut spec);
    for (k, s) in spec.iter_mut().enumerate() {
        *s *= tf.log_at(grid.bin_frequency(k)).exp();
    }
    fft::inverse(&mut spec);
    if let Some(t2) = tf.decoherence_t2 {
        let t2_ns = t2 * 1e3;
        for (i, e) in spec.iter_mut().enumerate() {
            let t = grid.time(i);
            if t > 0.0 {
                *e *= (-t / t2_ns).exp();
            }
        }
    }
    let mut out = Pulse {
        grid,
        envelope: spec,
        carrier_detuning: pulse.carrier_detuning,
        mean_photons: 0.0,
        shape_meta: pulse.shape_meta,
    };
    out.shape_meta.shape = PulseShape::Propagated;
    out.mean_photons = out.energy();
    Ok(out)
}
