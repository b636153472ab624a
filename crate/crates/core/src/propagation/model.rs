use serde::{Deserialize, Serialize};

use super::echo::{echo_efficiency, EchoResult};
use super::transfer::{make_transfer_function_with, propagate, Dispersion, TransferFunction};
use crate::error::Result;
use crate::pulses::{Pulse, PulseSpec, TimeGrid};
use crate::spectral::{build_comb, CombParams, FrequencyGrid, MaterialParams, SpectralProfile};

/// Everything needed to send one pulse through one comb.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EchoModel {
    pub material: MaterialParams,
    pub comb: CombParams,
    pub frequency_grid: FrequencyGrid,
    /// Points of the time grid paired with `frequency_grid`.
    pub time_points: usize,
    pub pulse: PulseSpec,
    pub dispersion: Dispersion,
    /// Apply the `e^{−t/T2}` field decay with the material's coherence time.
    pub decoherence: bool,
}

impl Default for EchoModel {
    fn default() -> Self {
        Self {
            material: MaterialParams::default(),
            comb: CombParams::default(),
            frequency_grid: FrequencyGrid::default(),
            time_points: 1 << 17,
            pulse: PulseSpec::default(),
            dispersion: Dispersion::KramersKronig,
            decoherence: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EchoRun {
    pub profile: SpectralProfile,
    pub transfer: TransferFunction,
    pub input: Pulse,
    pub echo: EchoResult,
}

impl EchoModel {
    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid::paired(&self.frequency_grid, self.time_points)
    }

    /// Same model with both grids refined by a factor of two.
    pub fn refined(&self) -> Self {
        Self {
            frequency_grid: self.frequency_grid.refined(),
            time_points: 2 * self.time_points,
            ..*self
        }
    }

    pub fn transfer_function(&self) -> Result<(SpectralProfile, TransferFunction)> {
        let profile = build_comb(&self.comb, &self.material, &self.frequency_grid)?;
        let tf = make_transfer_function_with(&profile, self.dispersion)?
            .with_decoherence(self.decoherence.then_some(self.material.optical_t2));
        Ok((profile, tf))
    }

    pub fn run(&self) -> Result<EchoRun> {
        let (profile, transfer) = self.transfer_function()?;
        let grid = self.time_grid();
        grid.check_echo_coverage(self.pulse.fwhm_ns, self.comb.delta)?;
        let input = self.pulse.build(&grid)?;
        let output = propagate(&input, &transfer)?;
        let echo = echo_efficiency(&input, &output, self.comb.delta)?;
        Ok(EchoRun {
            profile,
            transfer,
            input,
            echo,
        })
    }

    /// Numeric efficiency with the peak depth and finesse replaced; the
    /// spacing Δ is kept and γ = Δ/F.
    pub fn efficiency_at(&self, alpha_l: f64, finesse: f64) -> Result<f64> {
        let mut m = *self;
        m.comb.alpha_l = alpha_l;
        m.comb.gamma_fwhm = m.comb.delta / finesse;
        Ok(m.run()?.echo.efficiency)
    }
}
