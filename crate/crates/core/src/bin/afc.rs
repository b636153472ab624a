//! `afc`: run scenario experiments and analyze count histograms.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use afc_memory::detection::{
    efficiency_from_histograms, fit_gaussian, visibility, AreaRatioOptions, CountHistogram,
};
use afc_memory::scenario::{
    run_counts, run_efficiency, run_interference, run_sweep, Axis, RunDir, Scenario,
};
use afc_memory::Error;

#[derive(Parser)]
#[command(
    name = "afc",
    version,
    about = "Atomic frequency comb memory simulator"
)]
struct Cli {
    /// Worker threads for sweeps and ensemble sums (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Scenario file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in scenario: fig3, fig3-gamma200, fig4, empty-pit, forward-cap,
    /// wide-comb, interference-ideal, interference-mismatched.
    #[arg(long)]
    preset: Option<String>,

    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Base directory for run outputs (default: the scenario's `outputs`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Echo efficiency: numeric propagation against the closed form.
    Efficiency(Source),
    /// Efficiency over one or two parameter axes.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// `name=start:stop:count` or `name=v1,v2,...` with name one of
        /// alphaL, F, delta, gamma. Give once or twice.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
    },
    /// Echo beating against the frequency-offset probe.
    Interference(Source),
    /// Simulated photon counting and area-ratio efficiency.
    Counts {
        #[command(flatten)]
        source: Source,
        /// Force the echo efficiency before counting.
        #[arg(long)]
        inject_efficiency: Option<f64>,
    },
    /// Gaussian fit, area ratio or beat visibility of histogram CSV files
    /// (`bin_start_ns,count`).
    Fit {
        #[command(flatten)]
        source: Source,
        /// Histogram to fit: the echo when `--reference` is given.
        #[arg(long)]
        input: PathBuf,
        /// Fit window `start:stop` in ns.
        #[arg(long)]
        window: Option<String>,
        /// Reference histogram for an efficiency estimate.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, requires = "reference")]
        reference_window: Option<String>,
        /// Fit a beat over `start:stop` ns instead of a Gaussian.
        #[arg(long, conflicts_with = "reference")]
        beat_window: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(src: &Source) -> Result<Scenario, Error> {
    let mut s = match (&src.config, &src.preset) {
        (Some(path), _) => Scenario::load(path)?,
        (None, Some(name)) => Scenario::preset(name)?,
        (None, None) => Scenario::preset("fig3")?,
    };
    if let Some(seed) = src.seed {
        s.seed = seed;
    }
    if let Some(out) = &src.out {
        s.outputs = out.clone();
    }
    Ok(s)
}

fn window(spec: &str, flag: &str) -> Result<(f64, f64), Error> {
    let parse = |t: &str| t.trim().parse::<f64>().ok();
    match spec.split_once(':').map(|(a, b)| (parse(a), parse(b))) {
        Some((Some(a), Some(b))) if b > a => Ok((a, b)),
        _ => Err(Error::Config(format!(
            "--{flag} {spec:?} is not start:stop in ns"
        ))),
    }
}

fn emit(key: &str, value: impl std::fmt::Display) {
    println!("{key} = {value}");
}

fn finish(dir: RunDir) -> Result<(), Error> {
    let path = dir.finish()?;
    emit("output", path.display());
    Ok(())
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Efficiency(src) => {
            let s = load(&src)?;
            let r = run_efficiency(&s)?;
            let mut dir = RunDir::create(&s.outputs, &s.name, "efficiency")?;
            r.write(&mut dir)?;
            let x = &r.results;
            emit("eta_numeric", x.eta_numeric);
            if let Some(a) = x.eta_analytic {
                emit("eta_analytic", a);
            }
            emit("finesse", x.finesse);
            emit("n_peaks", x.n_peaks);
            if let Some(t) = x.echo_time_ns {
                emit("echo_time_ns", t);
            }
            emit("transmitted_fraction", x.transmitted_fraction);
            finish(dir)
        }
        Command::Sweep { source, axes } => {
            let s = load(&source)?;
            let axes = axes
                .iter()
                .map(|a| a.parse::<Axis>())
                .collect::<Result<Vec<_>, _>>()?;
            let r = run_sweep(&s, &axes)?;
            let mut dir = RunDir::create(&s.outputs, &s.name, "sweep")?;
            r.write(&mut dir)?;
            emit("points", r.rows.len());
            emit("flagged", r.rows.iter().filter(|r| r.flagged).count());
            if let Some(b) = &r.best {
                emit("best_eta_numeric", b.eta_numeric);
                emit("best_alphaL", b.alpha_l);
                emit("best_F", b.finesse);
            }
            if let Some(m) = &r.forward_maximum {
                emit("eta_max", m.eta_max);
                emit("alphaL_at_max", m.alpha_l_at_max);
            }
            if let Some(msg) = &r.forward_message {
                emit("forward_maximum", format!("{msg:?}"));
            }
            finish(dir)
        }
        Command::Interference(src) => {
            let s = load(&src)?;
            let r = run_interference(&s)?;
            let mut dir = RunDir::create(&s.outputs, &s.name, "interference")?;
            r.write(&mut dir)?;
            let x = &r.results;
            emit("period_ns", x.phase_0.period_ns);
            emit("visibility_phase0", x.phase_0.visibility);
            emit("visibility_phase_pi", x.phase_pi.visibility);
            emit("visibility_two_wave", x.visibility_two_wave);
            emit("phase_difference", x.phase_difference);
            finish(dir)
        }
        Command::Counts {
            source,
            inject_efficiency,
        } => {
            let mut s = load(&source)?;
            if inject_efficiency.is_some() {
                s.counts.injected_efficiency = inject_efficiency;
            }
            let r = run_counts(&s)?;
            let mut dir = RunDir::create(&s.outputs, &s.name, "counts")?;
            r.write(&mut dir)?;
            let x = &r.results;
            emit("eta", x.estimate.eta);
            emit("stderr", x.estimate.stderr);
            emit("ci_low", x.estimate.ci_low);
            emit("ci_high", x.estimate.ci_high);
            emit("reference_counts", x.reference_total);
            emit("echo_counts", x.echo_total);
            if let Some(v) = &x.visibility {
                emit("visibility_phase0", v.phase_0.visibility);
                emit("visibility_phase_pi", v.phase_pi.visibility);
            }
            finish(dir)
        }
        Command::Fit {
            source,
            input,
            window: w,
            reference,
            reference_window,
            beat_window,
        } => {
            let has_scenario = source.config.is_some() || source.preset.is_some();
            let s = if has_scenario {
                load(&source)?
            } else {
                Scenario {
                    name: "external".into(),
                    outputs: source.out.clone().unwrap_or_else(|| PathBuf::from("runs")),
                    ..Scenario::default()
                }
            };
            let read = |p: &Path| CountHistogram::read_csv(p, s.detector);
            let hist = read(&input)?;
            let w = w.as_deref().map(|w| window(w, "window")).transpose()?;
            let mut dir = RunDir::create(&s.outputs, &s.name, "fit")?;
            if let Some(bw) = beat_window {
                let b = visibility(&hist, window(&bw, "beat-window")?, None)?;
                dir.write_toml("fit.toml", &b)?;
                emit("visibility", b.visibility);
                emit("visibility_stderr", b.stderr);
                emit("period_ns", b.period_ns);
                emit("phase", b.phase);
            } else if let Some(rp) = reference {
                let rw = reference_window
                    .as_deref()
                    .map(|w| window(w, "reference-window"))
                    .transpose()?;
                let opts = AreaRatioOptions {
                    reference_window: rw,
                    echo_window: w,
                    ..Default::default()
                };
                let e = efficiency_from_histograms(&read(&rp)?, &hist, &opts)?;
                dir.write_toml("fit.toml", &e)?;
                emit("eta", e.eta);
                emit("stderr", e.stderr);
                emit("ci_low", e.ci_low);
                emit("ci_high", e.ci_high);
            } else {
                let f = fit_gaussian(&hist, w)?;
                dir.write_toml("fit.toml", &f)?;
                emit("amplitude", f.amplitude);
                emit("center_ns", f.center_ns);
                emit("fwhm_ns", f.fwhm_ns);
                emit("offset", f.offset);
                emit("area", f.area(hist.bin_width(0)));
                emit("area_stderr", f.area_stderr(hist.bin_width(0)));
            }
            finish(dir)
        }
    }
}
