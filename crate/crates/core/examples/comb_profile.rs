//! Paint the 1.2 MHz comb into the pit and print where its peaks landed.
//!
//! cargo run --example comb_profile [profile.csv]

use afc_memory::spectral::{build_comb, CombParams, FrequencyGrid, MaterialParams};

fn main() -> afc_memory::Result<()> {
    let comb = CombParams {
        delta: 1.2,
        gamma_fwhm: 0.3,
        alpha_l: 6.0,
        ..Default::default()
    };
    let material = MaterialParams::default();
    let grid = FrequencyGrid::new(0.0, 40.0, 16384)?;
    let profile = build_comb(&comb, &material, &grid)?;
    let layout = profile.comb.expect("a comb was painted");

    println!("finesse          {:.3}", comb.finesse()?);
    println!("peaks            {}", layout.n_peaks);
    for p in layout.peak_positions() {
        println!("  {p:+7.3} MHz  depth {:.3}", profile.depth_at(p));
    }
    println!(
        "effective depth  {:.4}",
        profile.effective_depth().unwrap_or(0.0)
    );
    println!(
        "probe window     depth {:.2e} at {} MHz",
        profile.depth_at(material.probe_window_offset),
        material.probe_window_offset
    );
    println!("outside the pit  depth {:.3}", profile.depth_at(15.0));

    if let Some(path) = std::env::args().nth(1) {
        profile.write_csv(path.as_ref())?;
        println!("wrote {path}");
    }
    Ok(())
}
