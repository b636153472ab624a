//! Spectral absorption structures: the inhomogeneous line, the emptied pit
//! and the periodic comb painted inside it.
//!
//! All frequencies are detunings in MHz from the storage transition; all
//! depths are dimensionless optical depths `αL`.

use std::f64::consts::LN_2;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::io;

/// Width of the raised-cosine shoulder on each side of the pit.
pub const PIT_EDGE_MHZ: f64 = 1.0;

/// Largest residual depth, as a fraction of the comb depth, tolerated
/// inside the probe window.
pub const PROBE_WINDOW_TOLERANCE: f64 = 0.02;

/// Gaussian edge width of the `square` peak, as a fraction of its FWHM.
pub const SQUARE_EDGE_FRACTION: f64 = 0.125;

/// Uniform frequency axis, `n_points` samples across `span` centered on
/// `center_detuning`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrequencyGrid {
    pub center_detuning: f64,
    pub span: f64,
    pub n_points: usize,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self {
            center_detuning: 0.0,
            span: 40.0,
            n_points: 1 << 14,
        }
    }
}

impl FrequencyGrid {
    pub fn new(center_detuning: f64, span: f64, n_points: usize) -> Result<Self> {
        let grid = Self {
            center_detuning,
            span,
            n_points,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.span > 0.0) || !self.span.is_finite() {
            return Err(Error::config(format!(
                "frequency span must be positive, got {}",
                self.span
            )));
        }
        if self.n_points < 16 {
            return Err(Error::config(format!(
                "frequency grid needs at least 16 points, got {}",
                self.n_points
            )));
        }
        if !self.center_detuning.is_finite() {
            return Err(Error::config("frequency grid center must be finite"));
        }
        Ok(())
    }

    pub fn resolution(&self) -> f64 {
        self.span / (self.n_points - 1) as f64
    }

    pub fn start(&self) -> f64 {
        self.center_detuning - 0.5 * self.span
    }

    pub fn end(&self) -> f64 {
        self.center_detuning + 0.5 * self.span
    }

    pub fn frequency(&self, i: usize) -> f64 {
        self.start() + i as f64 * self.resolution()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.frequency(i)).collect()
    }

    /// Same span with twice the sample density.
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakShape {
    #[default]
    Gaussian,
    Lorentzian,
    /// Flat-top of width γ with Gaussian shoulders of σ = γ/8. The half-maximum
    /// points sit exactly at ±γ/2 and the area is exactly αL·γ.
    Square,
}

impl PeakShape {
    /// Line shape normalized to 1 at its center.
    pub fn value(self, x: f64, fwhm: f64) -> f64 {
        match self {
            PeakShape::Gaussian => (-4.0 * LN_2 * x * x / (fwhm * fwhm)).exp(),
            PeakShape::Lorentzian => {
                let hw = 0.5 * fwhm;
                hw * hw / (x * x + hw * hw)
            }
            PeakShape::Square => {
                let s = SQUARE_EDGE_FRACTION * fwhm * std::f64::consts::SQRT_2;
                0.5 * (erf((0.5 * fwhm - x) / s) - erf((-0.5 * fwhm - x) / s))
            }
        }
    }

    /// Distance from the center beyond which the shape stays under 1% of its peak.
    pub fn clearance(self, fwhm: f64) -> f64 {
        match self {
            PeakShape::Gaussian => fwhm * (100f64.ln() / (4.0 * LN_2)).sqrt(),
            PeakShape::Lorentzian => 0.5 * fwhm * 99f64.sqrt(),
            PeakShape::Square => fwhm * (0.5 + 2.33 * SQUARE_EDGE_FRACTION),
        }
    }

    /// Integral of the unit-height shape, in units of its FWHM.
    pub fn area_factor(self) -> f64 {
        match self {
            PeakShape::Gaussian => 0.5 * (std::f64::consts::PI / LN_2).sqrt(),
            PeakShape::Lorentzian => 0.5 * std::f64::consts::PI,
            PeakShape::Square => 1.0,
        }
    }
}

/// Comb geometry: spacing Δ, peak FWHM γ and peak depth αL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CombParams {
    pub delta: f64,
    pub gamma_fwhm: f64,
    #[serde(rename = "alphaL")]
    pub alpha_l: f64,
    /// `None` fills the pit with as many peaks as the constraints allow.
    pub n_peaks: Option<usize>,
    pub peak_shape: PeakShape,
    #[serde(rename = "background_alphaL")]
    pub background_alpha_l: f64,
}

impl Default for CombParams {
    fn default() -> Self {
        Self {
            delta: 1.2,
            gamma_fwhm: 0.3,
            alpha_l: 6.0,
            n_peaks: None,
            peak_shape: PeakShape::Gaussian,
            background_alpha_l: 0.0,
        }
    }
}

impl CombParams {
    pub fn finesse(&self) -> Result<f64> {
        finesse(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::domain(format!(
                "peak spacing must be positive, got {}",
                self.delta
            )));
        }
        let f = self.finesse()?;
        if !(f > 1.0) {
            return Err(Error::constraint(format!(
                "finesse delta/gamma = {f} must exceed 1"
            )));
        }
        if !(self.alpha_l >= 0.0) {
            return Err(Error::domain(format!(
                "alphaL must be non-negative, got {}",
                self.alpha_l
            )));
        }
        if !(self.background_alpha_l >= 0.0) {
            return Err(Error::domain(format!(
                "background_alphaL must be non-negative, got {}",
                self.background_alpha_l
            )));
        }
        if self.n_peaks == Some(0) {
            return Err(Error::domain("n_peaks must be at least 1"));
        }
        Ok(())
    }
}

/// Comb finesse F = Δ/γ.
pub fn finesse(params: &CombParams) -> Result<f64> {
    if params.gamma_fwhm == 0.0 {
        return Err(Error::domain("finesse undefined for zero peak width"));
    }
    if !(params.gamma_fwhm > 0.0) {
        return Err(Error::domain(format!(
            "peak width must be positive, got {}",
            params.gamma_fwhm
        )));
    }
    Ok(params.delta / params.gamma_fwhm)
}

/// Crystal-level parameters shared by every comb.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialParams {
    pub inhomogeneous_fwhm: f64,
    /// Depth of the unpumped inhomogeneous line at its center.
    #[serde(rename = "inhomogeneous_alphaL")]
    pub inhomogeneous_alpha_l: f64,
    pub pit_width: f64,
    /// Separation between the two excited hyperfine levels; bounds the comb extent.
    pub excited_splitting_limit: f64,
    /// Optical coherence time in µs.
    pub optical_t2: f64,
    /// Keep a transparent window clear for a frequency-offset probe.
    pub probe_window: bool,
    /// Center of the probe window relative to the storage carrier.
    pub probe_window_offset: f64,
    pub probe_window_width: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            inhomogeneous_fwhm: 5000.0,
            inhomogeneous_alpha_l: 10.0,
            pit_width: 18.0,
            excited_splitting_limit: 4.6,
            optical_t2: 100.0,
            probe_window: true,
            probe_window_offset: 2.3,
            probe_window_width: 1.0,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.inhomogeneous_fwhm > 0.0) {
            return Err(Error::domain("inhomogeneous_fwhm must be positive"));
        }
        if !(self.inhomogeneous_alpha_l >= 0.0) {
            return Err(Error::domain("inhomogeneous_alphaL must be non-negative"));
        }
        if !(self.pit_width >= 0.0) {
            return Err(Error::domain("pit_width must be non-negative"));
        }
        if self.pit_width > 0.1 * self.inhomogeneous_fwhm {
            return Err(Error::constraint(format!(
                "pit_width {} is not small against the inhomogeneous width {}",
                self.pit_width, self.inhomogeneous_fwhm
            )));
        }
        if !(self.optical_t2 > 0.0) {
            return Err(Error::domain("optical_t2 must be positive"));
        }
        if !(self.excited_splitting_limit > 0.0) {
            return Err(Error::domain("excited_splitting_limit must be positive"));
        }
        if !(self.probe_window_width > 0.0) {
            return Err(Error::domain("probe_window_width must be positive"));
        }
        Ok(())
    }

    /// Depth of the unpumped line at `detuning`.
    pub fn inhomogeneous_depth(&self, detuning: f64) -> f64 {
        self.inhomogeneous_alpha_l * PeakShape::Gaussian.value(detuning, self.inhomogeneous_fwhm)
    }

    /// Fraction of the inhomogeneous absorption left after pumping: 0 inside
    /// the pit, 1 outside, raised-cosine in between.
    pub fn pit_transmission_mask(&self, detuning: f64) -> f64 {
        if self.pit_width <= 0.0 {
            return 1.0;
        }
        let a = detuning.abs();
        let inner = 0.5 * self.pit_width;
        if a <= inner {
            0.0
        } else if a >= inner + PIT_EDGE_MHZ {
            1.0
        } else {
            0.5 * (1.0 - (std::f64::consts::PI * (a - inner) / PIT_EDGE_MHZ).cos())
        }
    }
}

/// Positions of a painted comb, kept with the profile for windowing checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombLayout {
    pub params: CombParams,
    pub n_peaks: usize,
    /// Detuning of the comb's center of symmetry.
    pub center: f64,
}

impl CombLayout {
    pub fn peak_positions(&self) -> Vec<f64> {
        let half = 0.5 * (self.n_peaks as f64 - 1.0);
        (0..self.n_peaks)
            .map(|k| self.center + (k as f64 - half) * self.params.delta)
            .collect()
    }

    /// Full spectral extent, Δ(N−1) + γ.
    pub fn extent(&self) -> f64 {
        self.params.delta * (self.n_peaks as f64 - 1.0) + self.params.gamma_fwhm
    }
}

/// Optical depth sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    pub grid: FrequencyGrid,
    pub alpha_l: Vec<f64>,
    pub comb: Option<CombLayout>,
}

impl SpectralProfile {
    /// Uniform depth everywhere on the grid.
    pub fn uniform(grid: FrequencyGrid, depth: f64) -> Result<Self> {
        grid.validate()?;
        if !(depth >= 0.0) {
            return Err(Error::domain("optical depth must be non-negative"));
        }
        Ok(Self {
            grid,
            alpha_l: vec![depth; grid.n_points],
            comb: None,
        })
    }

    /// Profile from explicit samples; rejects negative or non-finite depth.
    pub fn from_samples(grid: FrequencyGrid, alpha_l: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if alpha_l.len() != grid.n_points {
            return Err(Error::config(format!(
                "{} samples for a {}-point grid",
                alpha_l.len(),
                grid.n_points
            )));
        }
        if let Some(bad) = alpha_l.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain(format!("invalid optical depth sample {bad}")));
        }
        Ok(Self {
            grid,
            alpha_l,
            comb: None,
        })
    }

    /// Linearly interpolated depth; clamps outside the grid.
    pub fn depth_at(&self, detuning: f64) -> f64 {
        io::interp_uniform(
            &self.alpha_l,
            self.grid.start(),
            self.grid.resolution(),
            detuning,
        )
    }

    /// Average depth over `[lo, hi]` by trapezoidal integration of the samples.
    pub fn mean_depth(&self, lo: f64, hi: f64) -> f64 {
        assert!(hi > lo);
        let n = 512.max(((hi - lo) / self.grid.resolution()).ceil() as usize * 4);
        let h = (hi - lo) / n as f64;
        let mut acc = 0.5 * (self.depth_at(lo) + self.depth_at(hi));
        for i in 1..n {
            acc += self.depth_at(lo + i as f64 * h);
        }
        acc * h / (hi - lo)
    }

    /// Mean depth over one comb period around the comb center, the effective
    /// depth seen by a pulse much narrower than the comb.
    pub fn effective_depth(&self) -> Option<f64> {
        let comb = self.comb?;
        let d = comb.params.delta;
        Some(self.mean_depth(comb.center - 0.5 * d, comb.center + 0.5 * d))
    }

    pub fn max_depth(&self) -> f64 {
        self.alpha_l.iter().copied().fold(0.0, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows = self
            .grid
            .frequencies()
            .into_iter()
            .zip(self.alpha_l.iter())
            .map(|(f, a)| vec![f, *a]);
        io::write_csv(path, &["detuning_MHz", "alphaL"], rows)
    }
}

/// Inhomogeneous line with a transparent pit of `material.pit_width` centered
/// on zero detuning. The pit floor is zero.
pub fn build_pit(material: &MaterialParams, grid: &FrequencyGrid) -> Result<SpectralProfile> {
    build_pit_with_floor(material, grid, 0.0)
}

/// As [`build_pit`], with a residual depth `floor` left inside the pit.
pub fn build_pit_with_floor(
    material: &MaterialParams,
    grid: &FrequencyGrid,
    floor: f64,
) -> Result<SpectralProfile> {
    material.validate()?;
    grid.validate()?;
    if !(floor >= 0.0) {
        return Err(Error::domain("pit floor must be non-negative"));
    }
    if material.pit_width > 0.0 {
        if material.pit_width > grid.span {
            return Err(Error::config(format!(
                "pit width {} MHz exceeds the grid span {} MHz",
                material.pit_width, grid.span
            )));
        }
        if grid.resolution() > material.pit_width / 32.0 {
            return Err(Error::config(format!(
                "grid resolution {} MHz is coarser than pit_width/32 = {} MHz",
                grid.resolution(),
                material.pit_width / 32.0
            )));
        }
    }
    let alpha_l = grid
        .frequencies()
        .into_iter()
        .map(|f| {
            let bg = material.inhomogeneous_depth(f);
            let mask = material.pit_transmission_mask(f);
            floor + (bg - floor).max(0.0) * mask
        })
        .collect();
    Ok(SpectralProfile {
        grid: *grid,
        alpha_l,
        comb: None,
    })
}

/// Paint a comb of `params` into the pit of `material`.
///
/// With `n_peaks = None` the comb takes the largest peak count that satisfies
/// the excited-splitting bound, fits in the pit and keeps the probe window
/// clear.
pub fn build_comb(
    params: &CombParams,
    material: &MaterialParams,
    grid: &FrequencyGrid,
) -> Result<SpectralProfile> {
    params.validate()?;
    material.validate()?;
    grid.validate()?;
    if grid.resolution() > params.gamma_fwhm / 8.0 {
        return Err(Error::config(format!(
            "grid resolution {} MHz is coarser than gamma/8 = {} MHz",
            grid.resolution(),
            params.gamma_fwhm / 8.0
        )));
    }
    let pit = build_pit_with_floor(material, grid, params.background_alpha_l)?;

    match params.n_peaks {
        Some(n) => {
            check_comb_constraints(params, material, n)?;
            let profile = paint(&pit, params, n);
            check_probe_window(&profile, material)?;
            Ok(profile)
        }
        None => {
            // Constraint-limited upper bound, then step down until the probe window clears.
            let mut n = max_peaks(params, material).ok_or_else(|| {
                Error::constraint(format!(
                    "no comb fits: 3*gamma = {} exceeds pit_width = {}",
                    3.0 * params.gamma_fwhm,
                    material.pit_width
                ))
            })?;
            loop {
                let profile = paint(&pit, params, n);
                match check_probe_window(&profile, material) {
                    Ok(()) => return Ok(profile),
                    Err(e) if n == 1 => return Err(e),
                    Err(_) => n -= 1,
                }
            }
        }
    }
}

fn max_peaks(params: &CombParams, material: &MaterialParams) -> Option<usize> {
    (1..=100_000usize)
        .take_while(|&n| check_comb_constraints(params, material, n).is_ok())
        .last()
}

fn check_comb_constraints(params: &CombParams, material: &MaterialParams, n: usize) -> Result<()> {
    let span = params.delta * (n as f64 - 1.0);
    if span >= material.excited_splitting_limit {
        return Err(Error::constraint(format!(
            "delta*(n_peaks-1) = {span} MHz must be < excited_splitting_limit = {} MHz",
            material.excited_splitting_limit
        )));
    }
    let footprint = span + 3.0 * params.gamma_fwhm;
    if footprint > material.pit_width {
        return Err(Error::constraint(format!(
            "delta*(n_peaks-1) + 3*gamma = {footprint} MHz must be <= pit_width = {} MHz",
            material.pit_width
        )));
    }
    Ok(())
}

fn check_probe_window(profile: &SpectralProfile, material: &MaterialParams) -> Result<()> {
    let Some(comb) = profile.comb.filter(|_| material.probe_window) else {
        return Ok(());
    };
    let offset = material.probe_window_offset;
    let lo = offset - 0.5 * material.probe_window_width;
    let hi = offset + 0.5 * material.probe_window_width;
    let pit_half = 0.5 * material.pit_width;
    if lo < -pit_half || hi > pit_half {
        return Err(Error::constraint(format!(
            "probe window [{lo}, {hi}] MHz lies outside the pit"
        )));
    }
    let floor = comb.params.background_alpha_l;
    let limit = PROBE_WINDOW_TOLERANCE * comb.params.alpha_l.max(f64::MIN_POSITIVE);
    let worst = profile
        .grid
        .frequencies()
        .iter()
        .zip(&profile.alpha_l)
        .filter(|(f, _)| **f >= lo && **f <= hi)
        .map(|(_, a)| a - floor)
        .fold(0.0, f64::max);
    if worst > limit {
        return Err(Error::constraint(format!(
            "probe window [{lo:.3}, {hi:.3}] MHz is absorbing: residual depth {worst:.4} > {limit:.4}"
        )));
    }
    Ok(())
}

fn paint(pit: &SpectralProfile, params: &CombParams, n: usize) -> SpectralProfile {
    // One peak always sits on the storage carrier at zero detuning; an even
    // comb extends one peak further to the red.
    let center = if n.is_multiple_of(2) {
        -0.5 * params.delta
    } else {
        0.0
    };
    let layout = CombLayout {
        params: *params,
        n_peaks: n,
        center,
    };
    let peaks = layout.peak_positions();
    let reach = params.peak_shape.clearance(params.gamma_fwhm) * 40.0;
    let mut alpha_l = pit.alpha_l.clone();
    for (i, a) in alpha_l.iter_mut().enumerate() {
        let f = pit.grid.frequency(i);
        let comb: f64 = peaks
            .iter()
            .filter(|p| params.peak_shape == PeakShape::Lorentzian || (f - **p).abs() < reach)
            .map(|p| params.peak_shape.value(f - p, params.gamma_fwhm))
            .sum();
        *a += params.alpha_l * comb;
    }
    SpectralProfile {
        grid: pit.grid,
        alpha_l,
        comb: Some(layout),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> CombParams {
        CombParams::default()
    }

    #[test]
    fn finesse_values() {
        assert_eq!(finesse(&fig3()).unwrap(), 4.0);
        let p = CombParams {
            gamma_fwhm: 0.2,
            ..fig3()
        };
        assert!((finesse(&p).unwrap() - 6.0).abs() < 1e-12);
        let p = CombParams {
            delta: 0.7,
            gamma_fwhm: 0.7,
            ..fig3()
        };
        assert_eq!(finesse(&p).unwrap(), 1.0);
        let p = CombParams {
            gamma_fwhm: 0.0,
            ..fig3()
        };
        assert!(matches!(finesse(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn default_pit_is_empty_over_18_mhz() {
        let grid = FrequencyGrid::default();
        let pit = build_pit(&MaterialParams::default(), &grid).unwrap();
        for (f, a) in grid.frequencies().iter().zip(&pit.alpha_l) {
            if f.abs() < 9.0 {
                assert_eq!(*a, 0.0, "absorption at {f}");
            }
            if f.abs() > 10.0 {
                assert!((a - 10.0).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn zero_width_pit_is_pure_background() {
        let grid = FrequencyGrid::default();
        let m = MaterialParams {
            pit_width: 0.0,
            ..Default::default()
        };
        let pit = build_pit(&m, &grid).unwrap();
        for (f, a) in grid.frequencies().iter().zip(&pit.alpha_l) {
            assert!((a - m.inhomogeneous_depth(*f)).abs() < 1e-12);
        }
    }

    #[test]
    fn pit_floor_passthrough() {
        let grid = FrequencyGrid::default();
        let pit = build_pit_with_floor(&MaterialParams::default(), &grid, 0.1).unwrap();
        let inside = grid
            .frequencies()
            .iter()
            .zip(&pit.alpha_l)
            .filter(|(f, _)| f.abs() < 9.0)
            .map(|(_, a)| *a)
            .fold(f64::INFINITY, f64::min);
        assert!((inside - 0.1).abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_rejected_for_pit() {
        let grid = FrequencyGrid::new(0.0, 40.0, 64).unwrap();
        assert!(matches!(
            build_pit(&MaterialParams::default(), &grid),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn fig3_comb_peaks() {
        let grid = FrequencyGrid::default();
        let profile = build_comb(&fig3(), &MaterialParams::default(), &grid).unwrap();
        let comb = profile.comb.unwrap();
        // The 2.3 MHz probe window leaves room for four peaks at 1.2 MHz
        // spacing, one of them on the carrier.
        assert_eq!(comb.n_peaks, 4);
        assert!(comb.peak_positions().iter().any(|p| p.abs() < 1e-12));
        for p in comb.peak_positions() {
            let v = profile.depth_at(p);
            assert!((v - 6.0).abs() < 0.06, "peak at {p} has depth {v}");
        }
    }

    #[test]
    fn fig4_comb_builds() {
        let p = CombParams {
            delta: 1.0,
            gamma_fwhm: 0.2,
            ..fig3()
        };
        let profile =
            build_comb(&p, &MaterialParams::default(), &FrequencyGrid::default()).unwrap();
        let comb = profile.comb.unwrap();
        assert_eq!(comb.n_peaks, 4);
        assert!(profile.depth_at(2.3) < 0.12);
    }

    #[test]
    fn splitting_constraint_rejected() {
        let p = CombParams {
            n_peaks: Some(5),
            ..fig3()
        };
        let err =
            build_comb(&p, &MaterialParams::default(), &FrequencyGrid::default()).unwrap_err();
        assert!(err.to_string().contains("excited_splitting_limit"), "{err}");
    }

    #[test]
    fn pit_fit_constraint_rejected() {
        let m = MaterialParams {
            pit_width: 3.0,
            excited_splitting_limit: 50.0,
            probe_window: false,
            ..Default::default()
        };
        let p = CombParams {
            n_peaks: Some(3),
            ..fig3()
        };
        let err = build_comb(&p, &m, &FrequencyGrid::default()).unwrap_err();
        assert!(err.to_string().contains("pit_width"), "{err}");
    }

    #[test]
    fn blocked_probe_window_rejected() {
        // Five peaks put one at 2.4 MHz.
        let p = CombParams {
            n_peaks: Some(5),
            ..fig3()
        };
        let m = MaterialParams {
            excited_splitting_limit: 16.0,
            ..MaterialParams::default()
        };
        let err = build_comb(&p, &m, &FrequencyGrid::default()).unwrap_err();
        assert!(err.to_string().contains("probe window"), "{err}");
    }

    #[test]
    fn single_peak_comb() {
        let p = CombParams {
            n_peaks: Some(1),
            ..fig3()
        };
        let profile =
            build_comb(&p, &MaterialParams::default(), &FrequencyGrid::default()).unwrap();
        assert_eq!(profile.comb.unwrap().peak_positions(), vec![0.0]);
    }

    #[test]
    fn comb_rejects_coarse_grid() {
        let grid = FrequencyGrid::new(0.0, 40.0, 1024).unwrap();
        let err = build_comb(&fig3(), &MaterialParams::default(), &grid).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn square_shape_half_max_and_area() {
        let g = 0.4;
        assert!((PeakShape::Square.value(0.5 * g, g) - 0.5).abs() < 1e-12);
        assert!((PeakShape::Square.value(0.0, g) - 1.0).abs() < 1e-4);
        let n = 20_000;
        let h = 10.0 * g / n as f64;
        let area: f64 = (0..n)
            .map(|i| PeakShape::Square.value(-5.0 * g + (i as f64 + 0.5) * h, g) * h)
            .sum();
        assert!((area - g).abs() < 1e-9);
    }

    #[test]
    fn effective_depth_of_gaussian_comb() {
        let p = CombParams {
            delta: 1.0,
            gamma_fwhm: 0.1,
            ..fig3()
        };
        let m = MaterialParams {
            excited_splitting_limit: 10.0,
            probe_window: false,
            ..Default::default()
        };
        let profile = build_comb(&p, &m, &FrequencyGrid::default()).unwrap();
        let expected = 6.0 * 0.1 * PeakShape::Gaussian.area_factor();
        assert!((profile.effective_depth().unwrap() - expected).abs() < 1e-3);
    }
}
