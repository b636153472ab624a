//! Round trip through the histogram file format: simulate a bright pulse,
//! write `bin_start_ns,count`, read it back and fit a Gaussian.

use afc_memory::detection::{
    fit_gaussian, simulate_counts, CountHistogram, DetectorParams, IntensityTrace,
};
use afc_memory::pulses::{gaussian_pulse, TimeGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = TimeGrid::new(-4000.0, 4000.0, 1 << 14)?;
    let pulse = gaussian_pulse(&grid, 200.0, 1.0, 0.0, 0.0)?;
    let trace = IntensityTrace::from_pulse(&pulse, 1.0)?;
    let det = DetectorParams {
        shots: 200_000,
        seed: 5,
        ..Default::default()
    };
    let hist = simulate_counts(&trace, 1.0, &det)?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("counts.csv");
    hist.write_csv(&path)?;
    let back = CountHistogram::read_csv(&path, det)?;
    assert_eq!(back.counts, hist.counts);

    let fit = fit_gaussian(&back, None)?;
    let w = back.bin_width(0);
    println!("counts   {}", back.total());
    println!("center   {:.2} ns", fit.center_ns);
    println!("fwhm     {:.2} ns", fit.fwhm_ns);
    println!("area     {:.1} ± {:.1}", fit.area(w), fit.area_stderr(w));
    println!(
        "expected {:.1}",
        det.shots as f64 * det.detection_efficiency()
    );
    Ok(())
}
