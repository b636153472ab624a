//! The named experiments behind the command-line subcommands. Each returns a
//! serializable report carrying the full scenario next to its results, and
//! writes its traces on request.

use std::f64::consts::PI;

use serde::Serialize;

use super::{EchoSource, RunDir, Scenario};
use crate::detection::{
    efficiency_from_histograms, expected_counts, fit_beats, fit_gaussian, simulate_counts,
    two_wave_visibility, visibility_joint, AreaRatioOptions, BeatFit, CountHistogram,
    DetectorParams, EfficiencyEstimate, IntensityTrace, Profiles, Series, ShapeTemplate,
};
use crate::error::{Error, Result};
use crate::io;
use crate::propagation::{
    analytic_efficiency, beat_period, echo_efficiency, interference_trace,
    make_transfer_function_with, propagate, EchoResult, TransferFunction, ECHO_DETECTION_FLOOR,
};
use crate::pulses::Pulse;
use crate::spectral::{build_comb, build_pit, SpectralProfile};

/// Photon number a probe must keep after the comb for its window to count
/// as transparent.
const PROBE_MIN_TRANSMISSION: f64 = 0.5;

/// Counts per bin aimed for in the noiseless calibration histograms.
const CALIBRATION_COUNTS: f64 = 1e7;

pub(super) struct Arm {
    profile: SpectralProfile,
    transfer: TransferFunction,
    input: Pulse,
    pub(super) echo: EchoResult,
}

fn medium(s: &Scenario, empty_pit: bool) -> Result<(SpectralProfile, TransferFunction)> {
    let profile = if empty_pit {
        build_pit(&s.material, &s.grids.frequency).map_err(|e| e.at("material"))?
    } else {
        build_comb(&s.comb, &s.material, &s.grids.frequency).map_err(|e| e.at("comb"))?
    };
    let tf = make_transfer_function_with(&profile, s.model.dispersion)
        .map_err(|e| e.at("grids.frequency"))?
        .with_decoherence(s.model.decoherence.then_some(s.material.optical_t2));
    Ok((profile, tf))
}

pub(super) fn run_arm(s: &Scenario, empty_pit: bool) -> Result<Arm> {
    let (profile, transfer) = medium(s, empty_pit)?;
    let tg = s.time_grid();
    tg.check_echo_coverage(s.storage_pulse.fwhm_ns, s.comb.delta)
        .map_err(|e| e.at("grids"))?;
    let input = s
        .storage_pulse
        .build(&tg)
        .map_err(|e| e.at("storage_pulse"))?;
    let output = propagate(&input, &transfer)?;
    let echo = echo_efficiency(&input, &output, s.comb.delta)?;
    Ok(Arm {
        profile,
        transfer,
        input,
        echo,
    })
}

/// Time span written to trace files: the input and the first two echoes.
fn trace_span(s: &Scenario) -> (f64, f64) {
    let p = &s.storage_pulse;
    (
        p.center_ns - 4.0 * p.fwhm_ns,
        p.center_ns + 2.5e3 / s.comb.delta,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyResults {
    pub finesse: f64,
    pub n_peaks: usize,
    pub effective_depth: Option<f64>,
    pub eta_numeric: f64,
    /// Closed form at the comb's (αL, F); absent for an empty pit.
    pub eta_analytic: Option<f64>,
    pub transmitted_fraction: f64,
    /// Transmission of the same pulse through the empty pit.
    pub reference_transmitted_fraction: f64,
    pub echo_time_ns: Option<f64>,
    pub echo_peak_time_ns: f64,
    pub echo_window_ns: [f64; 2],
    pub transmitted_window_ns: [f64; 2],
    pub causality_leak: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyReport {
    pub scenario: Scenario,
    pub results: EfficiencyResults,
    #[serde(skip)]
    profile: SpectralProfile,
    #[serde(skip)]
    input: Pulse,
    #[serde(skip)]
    output: Pulse,
    #[serde(skip)]
    reference: Pulse,
}

impl EfficiencyReport {
    pub fn profile(&self) -> &SpectralProfile {
        &self.profile
    }

    pub fn output(&self) -> &Pulse {
        &self.output
    }

    /// `report.toml`, `profile.csv` and the input, output and reference
    /// pulses as `t_ns,re,im`.
    pub fn write(&self, dir: &mut RunDir) -> Result<()> {
        dir.write_toml("report.toml", self)?;
        self.profile.write_csv(&dir.file("profile.csv"))?;
        let (t0, t1) = trace_span(&self.scenario);
        self.input
            .write_csv_between(&dir.file("input.csv"), t0, t1)?;
        self.output
            .write_csv_between(&dir.file("output.csv"), t0, t1)?;
        self.reference
            .write_csv_between(&dir.file("reference.csv"), t0, t1)
    }
}

/// Propagates the storage pulse through the comb and through the empty pit
/// and compares the numeric echo efficiency with the closed form.
pub fn run_efficiency(s: &Scenario) -> Result<EfficiencyReport> {
    s.validate()?;
    let arm = run_arm(s, s.model.empty_pit)?;
    let reference = run_arm(s, true)?;
    let finesse = s.comb.finesse().map_err(|e| e.at("comb"))?;
    let eta_analytic = if s.model.empty_pit {
        None
    } else {
        Some(analytic_efficiency(s.comb.alpha_l, finesse).map_err(|e| e.at("comb"))?)
    };
    let e = &arm.echo;
    let results = EfficiencyResults {
        finesse,
        n_peaks: arm.profile.comb.map_or(0, |c| c.n_peaks),
        effective_depth: arm.profile.effective_depth(),
        eta_numeric: e.efficiency,
        eta_analytic,
        transmitted_fraction: e.transmitted_fraction,
        reference_transmitted_fraction: reference.echo.transmitted_fraction,
        echo_time_ns: e.echo_time,
        echo_peak_time_ns: e.echo_peak_time,
        echo_window_ns: [e.echo_window.0, e.echo_window.1],
        transmitted_window_ns: [e.transmitted_window.0, e.transmitted_window.1],
        causality_leak: arm.transfer.causality_leak(),
    };
    Ok(EfficiencyReport {
        scenario: s.clone(),
        results,
        profile: arm.profile,
        input: arm.input,
        output: arm.echo.output_pulse,
        reference: reference.echo.output_pulse,
    })
}

/// Echo and probe fields at the detector.
struct Beat {
    echo: Pulse,
    probe: Pulse,
    probe_transmission: f64,
    window: (f64, f64),
    period: f64,
}

fn beat_fields(s: &Scenario) -> Result<Beat> {
    let spec = s
        .probe_pulse
        .ok_or_else(|| Error::config("this run needs a [probe_pulse] section"))?;
    let tg = s.time_grid();
    let probe_in = spec.build(&tg).map_err(|e| e.at("probe_pulse"))?;
    let (echo, probe, probe_transmission, center) = match s.interference.echo {
        EchoSource::Propagated => {
            let (_, tf) = medium(s, s.model.empty_pit)?;
            let storage = s
                .storage_pulse
                .build(&tg)
                .map_err(|e| e.at("storage_pulse"))?;
            let echo = propagate(&storage, &tf)?;
            let peak = echo_efficiency(&storage, &echo, s.comb.delta)?.echo_peak_time;
            let probe = propagate(&probe_in, &tf)?;
            let t = probe.energy() / probe_in.energy();
            (echo, probe, t, peak)
        }
        EchoSource::Synthetic => {
            let mut moved = s.storage_pulse;
            moved.center_ns += 1e3 / s.comb.delta;
            let echo = moved.build(&tg).map_err(|e| e.at("storage_pulse"))?;
            (echo, probe_in, 1.0, spec.center_ns)
        }
    };
    if probe_transmission < PROBE_MIN_TRANSMISSION {
        return Err(Error::constraint(format!(
            "probe at {} MHz keeps only {:.1}% of its energy; no transparent window there",
            spec.carrier_detuning,
            100.0 * probe_transmission
        ))
        .at("probe_pulse"));
    }
    // The window follows the echo, which the comb delays past 1/Δ.
    let period = beat_period(&echo, &probe);
    let hw = s.interference.window_periods * period;
    Ok(Beat {
        echo,
        probe,
        probe_transmission,
        window: (center - hw, center + hw),
        period,
    })
}

fn phase_difference(a: &BeatFit, b: &BeatFit) -> f64 {
    (b.phase - a.phase).rem_euclid(2.0 * PI)
}

#[derive(Debug, Clone, Serialize)]
pub struct InterferenceResults {
    pub expected_period_ns: f64,
    pub probe_transmission: f64,
    pub echo_photons_in_window: f64,
    pub probe_photons_in_window: f64,
    /// `2√(I₁I₂)/(I₁+I₂)` from the photon numbers inside the window.
    pub visibility_two_wave: f64,
    /// Fitted phase of the π trace minus that of the 0 trace, in [0, 2π).
    pub phase_difference: f64,
    pub phase_0: BeatFit,
    pub phase_pi: BeatFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct InterferenceReport {
    pub scenario: Scenario,
    pub results: InterferenceResults,
    #[serde(skip)]
    times: Vec<f64>,
    #[serde(skip)]
    traces: [Vec<f64>; 2],
}

impl InterferenceReport {
    /// `report.toml` and `interference.csv` with columns
    /// `t_ns,intensity_phase0,intensity_phase_pi` in photons/ns.
    pub fn write(&self, dir: &mut RunDir) -> Result<()> {
        dir.write_toml("report.toml", self)?;
        let p = self.scenario.probe_pulse.unwrap_or_default();
        let (t0, t1) = (p.center_ns - 1.5 * p.fwhm_ns, p.center_ns + 1.5 * p.fwhm_ns);
        let rows = (0..self.times.len())
            .filter(|&i| self.times[i] >= t0 && self.times[i] <= t1)
            .map(|i| [self.times[i], self.traces[0][i], self.traces[1][i]]);
        io::write_csv(
            &dir.file("interference.csv"),
            &["t_ns", "intensity_phase0", "intensity_phase_pi"],
            rows,
        )
    }
}

/// Beats the echo against the probe with probe phase 0 and π and fits both
/// traces over the beat window.
pub fn run_interference(s: &Scenario) -> Result<InterferenceReport> {
    s.validate()?;
    let b = beat_fields(s)?;
    let times = b.echo.grid.times();
    let t0 = interference_trace(&b.echo, &b.probe)?;
    let tpi = interference_trace(&b.echo, &b.probe.with_phase(PI))?;
    let ie = b.echo.intensity();
    let ip = b.probe.intensity();
    let profiles = Some(Profiles {
        echo: &ie,
        probe: &ip,
    });
    let series = [&t0, &tpi].map(|values| Series {
        times: &times,
        values,
        variances: None,
        profiles,
    });
    let [f0, fpi]: [BeatFit; 2] = fit_beats(&series, b.window)?
        .try_into()
        .expect("one fit per trace");
    let ie = b.echo.energy_between(b.window.0, b.window.1);
    let ip = b.probe.energy_between(b.window.0, b.window.1);
    Ok(InterferenceReport {
        scenario: s.clone(),
        results: InterferenceResults {
            expected_period_ns: b.period,
            probe_transmission: b.probe_transmission,
            echo_photons_in_window: ie,
            probe_photons_in_window: ip,
            visibility_two_wave: two_wave_visibility(ie, ip),
            phase_difference: phase_difference(&f0, &fpi),
            phase_0: f0,
            phase_pi: fpi,
        },
        times,
        traces: [t0, tpi],
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VisibilityCounts {
    pub window_ns: [f64; 2],
    pub phase_difference: f64,
    pub phase_0: BeatFit,
    pub phase_pi: BeatFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountsResults {
    pub injected_efficiency: Option<f64>,
    /// Echo-to-reference photon ratio of the traces that were counted.
    pub trace_efficiency: f64,
    /// `shots·n̄·η_det·∫reference`: mean signal counts of the reference.
    pub expected_reference_counts: f64,
    pub expected_echo_counts: f64,
    pub reference_total: u64,
    pub echo_total: u64,
    pub estimate: EfficiencyEstimate,
    pub visibility: Option<VisibilityCounts>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountsReport {
    pub scenario: Scenario,
    pub results: CountsResults,
    #[serde(skip)]
    pub reference: CountHistogram,
    #[serde(skip)]
    pub echo: CountHistogram,
    #[serde(skip)]
    pub beat: Option<[CountHistogram; 2]>,
}

impl CountsReport {
    /// `report.toml` and histograms as `bin_start_ns,count`.
    pub fn write(&self, dir: &mut RunDir) -> Result<()> {
        dir.write_toml("report.toml", self)?;
        self.reference
            .write_csv(&dir.file("reference_counts.csv"))?;
        self.echo.write_csv(&dir.file("echo_counts.csv"))?;
        if let Some([h0, hpi]) = &self.beat {
            h0.write_csv(&dir.file("beat_phase0_counts.csv"))?;
            hpi.write_csv(&dir.file("beat_phase_pi_counts.csv"))?;
        }
        Ok(())
    }
}

/// Detector settings for the `k`-th histogram of a run.
fn detector(s: &Scenario, k: u64) -> DetectorParams {
    DetectorParams {
        seed: s.seed.wrapping_mul(4).wrapping_add(k),
        ..s.detector
    }
}

/// Center and width of a peak from a bright, noiseless exposure of `trace`.
fn calibrate(
    trace: &IntensityTrace,
    params: &DetectorParams,
    window: (f64, f64),
) -> Result<ShapeTemplate> {
    let bright = DetectorParams {
        dark_rate: 0.0,
        shots: 1,
        ..*params
    };
    let photons = CALIBRATION_COUNTS / (bright.detection_efficiency() * trace.integral());
    let lambda = expected_counts(trace, photons, &bright)?;
    let counts = lambda.iter().map(|l| l.round() as u64).collect();
    let hist = CountHistogram::new(bright.bin_edges(), counts, bright)?;
    Ok(ShapeTemplate::from(&fit_gaussian(&hist, Some(window))?))
}

fn trace_between(trace: &IntensityTrace, w: (f64, f64)) -> f64 {
    let g = trace.grid;
    trace
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| (w.0..=w.1).contains(&g.time(*i)))
        .map(|(_, v)| v)
        .sum::<f64>()
        * g.dt()
}

/// Simulates the reference (empty pit) and memory histograms, optionally
/// forces the echo to a chosen efficiency, and recovers the efficiency from
/// fitted areas. With a probe pulse the beat histograms for phase 0 and π
/// are simulated and fitted as well.
pub fn run_counts(s: &Scenario) -> Result<CountsReport> {
    s.validate()?;
    if s.detector.shots == 0 {
        return Err(Error::analysis("zero shots: no data to histogram").at("detector.shots"));
    }
    let n_in = s.storage_pulse.mean_photons;
    let memory = run_arm(s, s.model.empty_pit)?;
    let reference = run_arm(s, true)?;
    let ref_window = memory.echo.transmitted_window;
    let echo_window = memory.echo.echo_window;
    let ref_trace = IntensityTrace::from_pulse(&reference.echo.output_pulse, n_in)?;
    let mut echo_trace = IntensityTrace::from_pulse(&memory.echo.output_pulse, n_in)?;
    let ref_photons = trace_between(&ref_trace, ref_window);
    if let Some(target) = s.counts.injected_efficiency {
        let current = trace_between(&echo_trace, echo_window) / ref_photons;
        if !(current > 0.0) {
            return Err(
                Error::config("there is no echo to rescale").at("counts.injected_efficiency")
            );
        }
        let k = target / current;
        let g = echo_trace.grid;
        for (i, v) in echo_trace.values.iter_mut().enumerate() {
            if (echo_window.0..=echo_window.1).contains(&g.time(i)) {
                *v *= k;
            }
        }
    }
    let trace_efficiency = trace_between(&echo_trace, echo_window) / ref_photons;

    let ref_params = detector(s, 0);
    let echo_params = detector(s, 1);
    let ref_hist = simulate_counts(&ref_trace, n_in, &ref_params)?;
    let echo_hist = simulate_counts(&echo_trace, n_in, &echo_params)?;
    let reference_shape = calibrate(&ref_trace, &ref_params, ref_window)?;
    // Without an echo the reference shape, one period later, stands in.
    let echo_shape = if trace_efficiency > ECHO_DETECTION_FLOOR {
        calibrate(&echo_trace, &echo_params, echo_window)?
    } else {
        ShapeTemplate {
            center_ns: reference_shape.center_ns + 1e3 / s.comb.delta,
            ..reference_shape
        }
    };
    let opts = AreaRatioOptions {
        reference_window: Some(ref_window),
        echo_window: Some(echo_window),
        reference_shape: Some(reference_shape),
        echo_shape: Some(echo_shape),
    };
    let estimate = efficiency_from_histograms(&ref_hist, &echo_hist, &opts)?;
    let scale = s.detector.shots as f64 * n_in * s.detector.detection_efficiency();

    let (visibility_counts, beat) = match s.probe_pulse {
        Some(_) => {
            let (v, h) = beat_counts(s)?;
            (Some(v), Some(h))
        }
        None => (None, None),
    };
    let sum_in = |h: &CountHistogram, w: (f64, f64)| -> u64 {
        h.bins_in(Some(w)).iter().map(|&i| h.counts[i]).sum()
    };
    Ok(CountsReport {
        scenario: s.clone(),
        results: CountsResults {
            injected_efficiency: s.counts.injected_efficiency,
            trace_efficiency,
            expected_reference_counts: scale * ref_photons,
            expected_echo_counts: scale * trace_efficiency * ref_photons,
            reference_total: sum_in(&ref_hist, ref_window),
            echo_total: sum_in(&echo_hist, echo_window),
            estimate,
            visibility: visibility_counts,
        },
        reference: ref_hist,
        echo: echo_hist,
        beat,
    })
}

/// Beat histograms for probe phase 0 and π and their joint visibility fit,
/// without the storage-efficiency arms of [`run_counts`].
pub fn beat_counts(s: &Scenario) -> Result<(VisibilityCounts, [CountHistogram; 2])> {
    s.validate()?;
    let b = beat_fields(s)?;
    let normalized = |values: Vec<f64>| -> Result<(IntensityTrace, f64)> {
        let total: f64 = values.iter().sum::<f64>() * b.echo.grid.dt();
        let values = values.into_iter().map(|v| v / total).collect();
        Ok((IntensityTrace::new(b.echo.grid, values)?, total))
    };
    let count = |phi: f64, k: u64| -> Result<CountHistogram> {
        let (trace, total) = normalized(interference_trace(&b.echo, &b.probe.with_phase(phi))?)?;
        simulate_counts(&trace, total, &detector(s, k))
    };
    let h0 = count(0.0, 2)?;
    let hpi = count(PI, 3)?;
    // Expected signal counts of each field alone give the beat envelope.
    let profile = |field: &Pulse| -> Result<Vec<f64>> {
        let (trace, total) = normalized(field.intensity())?;
        let det = detector(s, 0);
        let dark = det.dark_counts_per_bin();
        Ok(expected_counts(&trace, total, &det)?
            .into_iter()
            .map(|l| l - dark)
            .collect())
    };
    let (pe, pp) = (profile(&b.echo)?, profile(&b.probe)?);
    let profiles = Profiles {
        echo: &pe,
        probe: &pp,
    };
    let [f0, fpi]: [BeatFit; 2] = visibility_joint(&[&h0, &hpi], Some(profiles), b.window, None)?
        .try_into()
        .expect("one fit per histogram");
    Ok((
        VisibilityCounts {
            window_ns: [b.window.0, b.window.1],
            phase_difference: phase_difference(&f0, &fpi),
            phase_0: f0,
            phase_pi: fpi,
        },
        [h0, hpi],
    ))
}
