//! Photon-counting model of the detection chain and the analyses applied to
//! count histograms: Gaussian fits, area ratios and fringe visibility.

mod counts;
mod efficiency;
mod fit;
mod visibility;

pub use counts::{
    expected_counts, simulate_counts, CountHistogram, DetectorParams, IntensityTrace, MIN_GATE_NS,
};
pub use efficiency::{
    efficiency_from_histograms, two_sigma_level, AreaFit, AreaRatioOptions, EfficiencyEstimate,
    ShapeTemplate,
};
pub use fit::{fit_gaussian, FitResult, MAX_ITERATIONS, MIN_FIT_BINS};
pub use visibility::{
    fit_beat, fit_beats, two_wave_visibility, visibility, visibility_joint, BeatFit, Profiles,
    Series,
};
