//! Scenarios are TOML files; anything left out takes its default. This one
//! changes the comb depth of the built-in fig3 setup and runs it into a
//! scratch directory.

use afc_memory::scenario::{run_efficiency, RunDir, Scenario};

const TEXT: &str = r#"
name = "deeper-comb"
seed = 3

[comb]
delta = 1.2
gamma_fwhm = 0.3
alphaL = 10.0

[storage_pulse]
fwhm_ns = 200.0
mean_photons = 0.1

[grids]
time_points = 131072

[grids.frequency]
span = 40.0
n_points = 16384
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = Scenario::from_toml(TEXT, "inline.toml".as_ref())?;
    s.validate()?;
    let report = run_efficiency(&s)?;
    let dir = tempfile::tempdir()?;
    let mut run = RunDir::create(dir.path(), &s.name, "efficiency")?;
    report.write(&mut run)?;
    let out = run.finish()?;
    println!("eta_numeric {:.4}", report.results.eta_numeric);
    if let Some(a) = report.results.eta_analytic {
        println!("eta_analytic {a:.4}");
    }
    for entry in std::fs::read_dir(&out)? {
        let entry = entry?;
        println!("  {}", entry.file_name().to_string_lossy());
    }
    Ok(())
}
