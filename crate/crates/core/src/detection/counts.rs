use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::pulses::{Pulse, TimeGrid};

pub const MIN_GATE_NS: f64 = 100.0;

/// Single-photon detector and acquisition settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorParams {
    pub quantum_efficiency: f64,
    pub pinhole_efficiency: f64,
    /// Gate opening relative to the input pulse center, ns.
    pub gate_start_ns: f64,
    pub gate_ns: f64,
    /// Dark counts per second while the gate is open.
    pub dark_rate: f64,
    pub shots: u64,
    pub rep_rate_khz: f64,
    pub bin_ns: f64,
    pub seed: u64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            quantum_efficiency: 0.075,
            pinhole_efficiency: 0.35,
            gate_start_ns: -1000.0,
            gate_ns: 4096.0,
            dark_rate: 200.0,
            shots: 2000,
            rep_rate_khz: 3.0,
            bin_ns: 25.6,
            seed: 0,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("quantum_efficiency", self.quantum_efficiency),
            ("pinhole_efficiency", self.pinhole_efficiency),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("{name} = {p} is not a probability")));
            }
        }
        if !(self.gate_ns >= MIN_GATE_NS) {
            return Err(Error::config(format!(
                "gate_ns = {} is below the {MIN_GATE_NS} ns minimum gate",
                self.gate_ns
            )));
        }
        if !(self.bin_ns > 0.0) || self.bin_ns > self.gate_ns {
            return Err(Error::config(format!(
                "bin_ns = {} must be positive and no longer than the gate",
                self.bin_ns
            )));
        }
        if !(self.dark_rate >= 0.0) {
            return Err(Error::config("dark_rate must be non-negative"));
        }
        if !(self.rep_rate_khz > 0.0) {
            return Err(Error::config("rep_rate_khz must be positive"));
        }
        Ok(())
    }

    pub fn detection_efficiency(&self) -> f64 {
        self.quantum_efficiency * self.pinhole_efficiency
    }

    pub fn n_bins(&self) -> usize {
        (self.gate_ns / self.bin_ns).round().max(1.0) as usize
    }

    pub fn bin_edges(&self) -> Vec<f64> {
        (0..=self.n_bins())
            .map(|i| self.gate_start_ns + i as f64 * self.bin_ns)
            .collect()
    }

    /// Expected dark counts in one bin over all shots.
    pub fn dark_counts_per_bin(&self) -> f64 {
        self.dark_rate * self.bin_ns * 1e-9 * self.shots as f64
    }

    /// Wall-clock acquisition time in seconds.
    pub fn acquisition_seconds(&self) -> f64 {
        self.shots as f64 / (self.rep_rate_khz * 1e3)
    }
}

/// Photon flux at the detector, in photons per ns per input photon.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityTrace {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl IntensityTrace {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::config(format!(
                "{} trace samples for a {}-point grid",
                values.len(),
                grid.n_points
            )));
        }
        Ok(Self { grid, values })
    }

    /// `|E(t)|²` of `pulse` divided by the photon number of the input that
    /// produced it.
    pub fn from_pulse(pulse: &Pulse, input_photons: f64) -> Result<Self> {
        if !(input_photons > 0.0) {
            return Err(Error::domain("input photon number must be positive"));
        }
        let values = pulse
            .intensity()
            .into_iter()
            .map(|v| v / input_photons)
            .collect();
        Self::new(pulse.grid, values)
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_points],
        }
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dt()
    }

    /// Integral from the grid start to `t`, with the samples linearly
    /// interpolated.
    fn cumulative_at(&self, cum: &[f64], t: f64) -> f64 {
        let dt = self.grid.dt();
        let pos = (t - self.grid.t_start) / dt;
        if pos <= 0.0 {
            return 0.0;
        }
        let last = self.values.len() - 1;
        if pos >= last as f64 {
            return cum[last];
        }
        let i = pos.floor() as usize;
        let w = pos - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        cum[i] + dt * (y0 * w + 0.5 * (y1 - y0) * w * w)
    }

    fn cumulative(&self) -> Vec<f64> {
        let dt = self.grid.dt();
        let mut acc = 0.0;
        let mut cum = Vec::with_capacity(self.values.len());
        cum.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * dt;
            cum.push(acc);
        }
        cum
    }
}

/// Binned photon counts accumulated over `shots` repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub shots: u64,
    pub params: DetectorParams,
}

impl CountHistogram {
    pub fn new(bin_edges: Vec<f64>, counts: Vec<u64>, params: DetectorParams) -> Result<Self> {
        if bin_edges.len() != counts.len() + 1 {
            return Err(Error::config(format!(
                "{} bin edges for {} bins",
                bin_edges.len(),
                counts.len()
            )));
        }
        if bin_edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("bin edges must increase"));
        }
        Ok(Self {
            bin_edges,
            counts,
            shots: params.shots,
            params,
        })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    pub fn bin_width(&self, i: usize) -> f64 {
        self.bin_edges[i + 1] - self.bin_edges[i]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Indices of bins whose centers fall inside `window`, or all bins.
    pub fn bins_in(&self, window: Option<(f64, f64)>) -> Vec<usize> {
        let centers = self.bin_centers();
        (0..self.len())
            .filter(|&i| window.is_none_or(|(a, b)| centers[i] >= a && centers[i] <= b))
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows = self
            .bin_edges
            .iter()
            .zip(&self.counts)
            .map(|(t, c)| [*t, *c as f64]);
        io::write_csv(path, &["bin_start_ns", "count"], rows)
    }

    /// Reads a `bin_start_ns,count` file. The last bin gets the width of the
    /// one before it; `params.bin_ns` is used when there is a single bin.
    pub fn read_csv(path: &Path, params: DetectorParams) -> Result<Self> {
        let (header, rows) = io::read_csv(path)?;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        if header.len() < 2 || header[0] != "bin_start_ns" || header[1] != "count" {
            return Err(parse_err(format!(
                "expected header bin_start_ns,count, found {}",
                header.join(",")
            )));
        }
        if rows.is_empty() {
            return Err(parse_err("histogram has no bins".into()));
        }
        let mut edges: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let counts = rows
            .iter()
            .map(|r| {
                let c = r[1];
                if c < 0.0 || c.fract() != 0.0 {
                    Err(parse_err(format!(
                        "count {c} is not a non-negative integer"
                    )))
                } else {
                    Ok(c as u64)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let width = if edges.len() > 1 {
            edges[edges.len() - 1] - edges[edges.len() - 2]
        } else {
            params.bin_ns
        };
        edges.push(edges[edges.len() - 1] + width);
        Self::new(edges, counts, params)
    }
}

/// Mean counts per bin: signal `shots·n̄·η_det·∫trace` plus dark counts.
pub fn expected_counts(
    trace: &IntensityTrace,
    mean_photons: f64,
    params: &DetectorParams,
) -> Result<Vec<f64>> {
    params.validate()?;
    if let Some(v) = trace.values.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::domain(format!(
            "intensity trace has a negative sample {v}"
        )));
    }
    if !(mean_photons >= 0.0) {
        return Err(Error::domain("mean photon number must be non-negative"));
    }
    let integral = trace.integral();
    if integral > 1.0 + 1e-6 {
        return Err(Error::domain(format!(
            "trace carries {integral:.6} photons per input photon; a passive memory emits at most 1"
        )));
    }
    let scale = params.shots as f64 * mean_photons * params.detection_efficiency();
    let dark = params.dark_counts_per_bin();
    let cum = trace.cumulative();
    Ok(params
        .bin_edges()
        .windows(2)
        .map(|w| {
            let s = trace.cumulative_at(&cum, w[1]) - trace.cumulative_at(&cum, w[0]);
            scale * s.max(0.0) + dark
        })
        .collect())
}

/// Poisson counts drawn from [`expected_counts`] with the detector seed.
pub fn simulate_counts(
    trace: &IntensityTrace,
    mean_photons: f64,
    params: &DetectorParams,
) -> Result<CountHistogram> {
    if params.shots == 0 {
        return Err(Error::analysis("zero shots: no data to histogram"));
    }
    let lambda = expected_counts(trace, mean_photons, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let counts = lambda
        .iter()
        .map(|&l| {
            if l > 0.0 {
                Poisson::new(l)
                    .map(|d| d.sample(&mut rng) as u64)
                    .map_err(|e| Error::domain(format!("bad Poisson mean {l}: {e}")))
            } else {
                Ok(0)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    CountHistogram::new(params.bin_edges(), counts, *params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::gaussian_pulse;

    fn grid() -> TimeGrid {
        TimeGrid::new(-2000.0, 4000.0, 6001).unwrap()
    }

    #[test]
    fn zero_trace_without_dark_counts() {
        let p = DetectorParams {
            dark_rate: 0.0,
            ..Default::default()
        };
        let h = simulate_counts(&IntensityTrace::zeros(grid()), 0.1, &p).unwrap();
        assert_eq!(h.total(), 0);
        assert_eq!(h.len(), 160);
    }

    #[test]
    fn lossless_expectation_matches_closed_form() {
        let g = grid();
        let pulse = gaussian_pulse(&g, 200.0, 0.1, 0.0, 0.0).unwrap();
        let trace = IntensityTrace::from_pulse(&pulse, 0.1).unwrap();
        let p = DetectorParams {
            dark_rate: 0.0,
            ..Default::default()
        };
        let total: f64 = expected_counts(&trace, 0.1, &p).unwrap().iter().sum();
        assert!(
            (total - 2000.0 * 0.1 * 0.35 * 0.075).abs() < 1e-6,
            "{total}"
        );
        let doubled = DetectorParams { shots: 4000, ..p };
        let total2: f64 = expected_counts(&trace, 0.1, &doubled).unwrap().iter().sum();
        assert!((total2 - 2.0 * total).abs() < 1e-9);
    }

    #[test]
    fn negative_and_excess_traces_rejected() {
        let g = grid();
        let mut t = IntensityTrace::zeros(g);
        t.values[10] = -1e-3;
        let p = DetectorParams::default();
        assert!(matches!(
            simulate_counts(&t, 0.1, &p),
            Err(Error::Domain(_))
        ));
        let t = IntensityTrace::new(g, vec![1.0; g.n_points]).unwrap();
        assert!(matches!(
            simulate_counts(&t, 0.1, &p),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn seeded_and_reproducible() {
        let g = grid();
        let pulse = gaussian_pulse(&g, 200.0, 1.0, 0.0, 0.0).unwrap();
        let trace = IntensityTrace::from_pulse(&pulse, 1.0).unwrap();
        let p = DetectorParams {
            seed: 11,
            ..Default::default()
        };
        let a = simulate_counts(&trace, 50.0, &p).unwrap();
        let b = simulate_counts(&trace, 50.0, &p).unwrap();
        assert_eq!(a, b);
        let c = simulate_counts(&trace, 50.0, &DetectorParams { seed: 12, ..p }).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn zero_shots_is_an_analysis_error() {
        let p = DetectorParams {
            shots: 0,
            ..Default::default()
        };
        let r = simulate_counts(&IntensityTrace::zeros(grid()), 0.1, &p);
        assert!(matches!(r, Err(Error::Analysis(_))));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        let p = DetectorParams::default();
        let h = CountHistogram::new(p.bin_edges(), (0..160).map(|i| i % 7).collect(), p).unwrap();
        h.write_csv(&path).unwrap();
        let back = CountHistogram::read_csv(&path, p).unwrap();
        assert_eq!(back.counts, h.counts);
        for (a, b) in back.bin_edges.iter().zip(&h.bin_edges) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn gate_below_minimum_rejected() {
        let p = DetectorParams {
            gate_ns: 50.0,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(Error::Config(_))));
    }
}
