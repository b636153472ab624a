//! Scenario files: one TOML document describing the crystal, the comb, the
//! pulses, the detector and the numerical grids of a run.

mod output;
mod runs;
mod sweep;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detection::DetectorParams;
use crate::error::{Error, Result};
use crate::propagation::{window_half_width, Dispersion, EchoModel};
use crate::pulses::{PulseSpec, TimeGrid};
use crate::spectral::{build_comb, CombParams, FrequencyGrid, MaterialParams};

pub use output::RunDir;
pub use runs::{
    beat_counts, run_counts, run_efficiency, run_interference, CountsReport, CountsResults,
    EfficiencyReport, EfficiencyResults, InterferenceReport, InterferenceResults, VisibilityCounts,
};
pub use sweep::{run_sweep, Axis, AxisName, SweepReport, SweepRow};

const PRESETS: &[(&str, &str)] = &[
    ("fig3", include_str!("../../presets/fig3.toml")),
    (
        "fig3-gamma200",
        include_str!("../../presets/fig3-gamma200.toml"),
    ),
    ("fig4", include_str!("../../presets/fig4.toml")),
    ("empty-pit", include_str!("../../presets/empty-pit.toml")),
    (
        "forward-cap",
        include_str!("../../presets/forward-cap.toml"),
    ),
    ("wide-comb", include_str!("../../presets/wide-comb.toml")),
    (
        "interference-ideal",
        include_str!("../../presets/interference-ideal.toml"),
    ),
    (
        "interference-mismatched",
        include_str!("../../presets/interference-mismatched.toml"),
    ),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub frequency: FrequencyGrid,
    /// Points of the time grid; its step and origin follow from the
    /// frequency grid.
    pub time_points: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            frequency: FrequencyGrid::default(),
            time_points: 1 << 17,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOptions {
    pub dispersion: Dispersion,
    pub decoherence: bool,
    /// Remove the comb entirely and keep only the pit.
    pub empty_pit: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            dispersion: Dispersion::KramersKronig,
            decoherence: true,
            empty_pit: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountsOptions {
    /// Rescale the echo so that its efficiency equals this value before
    /// counting.
    pub injected_efficiency: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EchoSource {
    /// The storage pulse is propagated through the comb.
    #[default]
    Propagated,
    /// The storage pulse itself, moved to the echo time, stands in for the
    /// echo. Used to check the interference analysis on known fields.
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterferenceOptions {
    pub echo: EchoSource,
    /// Half-width of the beat window in beat periods.
    pub window_periods: f64,
}

impl Default for InterferenceOptions {
    fn default() -> Self {
        Self {
            echo: EchoSource::Propagated,
            window_periods: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub outputs: PathBuf,
    pub material: MaterialParams,
    pub comb: CombParams,
    pub storage_pulse: PulseSpec,
    pub probe_pulse: Option<PulseSpec>,
    pub detector: DetectorParams,
    pub grids: Grids,
    pub model: ModelOptions,
    pub counts: CountsOptions,
    pub interference: InterferenceOptions,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            seed: 0,
            outputs: PathBuf::from("runs"),
            material: MaterialParams::default(),
            comb: CombParams::default(),
            storage_pulse: PulseSpec::default(),
            probe_pulse: None,
            detector: DetectorParams::default(),
            grids: Grids::default(),
            model: ModelOptions::default(),
            counts: CountsOptions::default(),
            interference: InterferenceOptions::default(),
        }
    }
}

impl Scenario {
    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|(n, _)| *n)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
            Error::config(format!(
                "unknown preset {name:?}; available: {}",
                Self::preset_names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        Self::from_toml(text, Path::new(name))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("cannot serialize scenario: {e}")))
    }

    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid::paired(&self.grids.frequency, self.grids.time_points)
    }

    pub fn echo_model(&self) -> EchoModel {
        EchoModel {
            material: self.material,
            comb: self.comb,
            frequency_grid: self.grids.frequency,
            time_points: self.grids.time_points,
            pulse: self.storage_pulse,
            dispersion: self.model.dispersion,
            decoherence: self.model.decoherence,
        }
    }

    /// Cross-checks every section against the others before anything runs.
    pub fn validate(&self) -> Result<()> {
        self.material.validate().map_err(|e| e.at("material"))?;
        self.comb.validate().map_err(|e| e.at("comb"))?;
        self.detector.validate().map_err(|e| e.at("detector"))?;
        self.grids
            .frequency
            .validate()
            .map_err(|e| e.at("grids.frequency"))?;
        let tg = self.time_grid();
        tg.validate().map_err(|e| e.at("grids.time_points"))?;
        tg.check_pairing(&self.grids.frequency)
            .map_err(|e| e.at("grids"))?;
        if !self.model.empty_pit {
            build_comb(&self.comb, &self.material, &self.grids.frequency)
                .map_err(|e| e.at("comb"))?;
        }
        tg.check_echo_coverage(self.storage_pulse.fwhm_ns, self.comb.delta)
            .map_err(|e| e.at("grids"))?;
        self.storage_pulse
            .build(&tg)
            .map_err(|e| e.at("storage_pulse"))?;
        let hw = window_half_width(self.comb.delta, self.storage_pulse.fwhm_ns);
        if self.detector.gate_start_ns > self.storage_pulse.center_ns - hw
            || self.detector.gate_start_ns + self.detector.gate_ns
                < self.storage_pulse.center_ns + 1e3 / self.comb.delta + hw
        {
            return Err(Error::config(format!(
                "gate [{}, {}] ns does not cover the reference and echo windows",
                self.detector.gate_start_ns,
                self.detector.gate_start_ns + self.detector.gate_ns
            ))
            .at("detector"));
        }
        if let Some(probe) = &self.probe_pulse {
            probe.build(&tg).map_err(|e| e.at("probe_pulse"))?;
        }
        if let Some(eta) = self.counts.injected_efficiency {
            if !(0.0..=1.0).contains(&eta) {
                return Err(
                    Error::config(format!("injected efficiency {eta} is outside [0, 1]"))
                        .at("counts.injected_efficiency"),
                );
            }
        }
        if !(self.interference.window_periods > 0.0) {
            return Err(
                Error::config("window_periods must be positive").at("interference.window_periods")
            );
        }
        Ok(())
    }
}
