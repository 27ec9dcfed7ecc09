//! Batch front end for the fluxonium toolkit. [`run`] takes the argument
//! vector and returns the process exit status:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success                                   |
//! | 2    | usage error or invalid parameter          |
//! | 3    | missing, malformed or inconsistent data   |
//! | 4    | numerical failure                         |

mod angle;
mod report;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use toml::Value;

use fluxonium_core::coherence::{coherence_budget, BudgetPoint, NoiseModel};
use fluxonium_core::constants::{khz_over_two_pi_to_per_us, TWO_PI};
use fluxonium_core::fit::{
    fit_exp_decay, fit_exp_gauss_decay, fit_fluxonium_spectroscopy, fit_noise_parameters,
    fit_ramsey_decay, fit_transmon_period, exp_decay_model, exp_gauss_model, ramsey_model,
    ControlKind, NoiseFitConfig, RamseyOptions, SpectroscopyFitOptions, SpectroscopyGuess,
    TransmonGuess,
};
use fluxonium_core::fluxtrap::{
    current_to_prebias, last_downward_crossing, nearest_fluxoid, ring_state, trap_phase,
    CoilCalibration, RingParams,
};
use fluxonium_core::io::{
    builtin_device, fit_result_table, load_coherence, load_decay, load_device, load_spectroscopy,
    load_timeline, write_plot_table, DeviceRecord, PlotSeries,
};
use fluxonium_core::qubit::{transmon_freq_approx, FluxoniumSolver, SolverConfig, TransmonParams};
use fluxonium_core::{Error, ErrorKind, FitResult};

pub use angle::parse_angle;
use report::Report;

#[derive(Debug, Parser)]
#[command(name = "fluxonium", version, about = "Flux-trapping fluxonium toolkit")]
struct Cli {
    /// Write the result document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write plot data (comma-separated, name_unit header) here.
    #[arg(long, global = true)]
    plot: Option<PathBuf>,
    /// Seed for stochastic steps such as multi-start jitter.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep f01 and f02 versus external phase.
    Spectrum(SpectrumArgs),
    /// Locate the f01 minimum for a trap phase.
    SweetSpot(SweetSpotArgs),
    /// Predict the trapped fluxoid number and trap phase.
    Trap(TrapArgs),
    /// Fit the coil modulation period from transmon spectroscopy.
    Calibrate(CalibrateArgs),
    /// Fit fluxonium energies and the current-to-phase map.
    FitSpectro(FitSpectroArgs),
    /// Fit an excited-state population decay.
    FitDecay(FitDecayArgs),
    /// Fit loss tangent and flux-noise amplitudes to coherence times.
    FitNoise(FitNoiseArgs),
    /// Relaxation and dephasing rates versus offset from the sweet spot.
    CoherenceBudget(BudgetArgs),
}

fn angle(s: &str) -> Result<f64, String> {
    parse_angle(s)
}

#[derive(Debug, Args)]
struct DeviceArg {
    /// Device file, or the built-in `device1` / `device2`.
    #[arg(long, default_value = "device1")]
    device: PathBuf,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    device: DeviceArg,
    #[arg(long, value_parser = angle, default_value = "pi", allow_hyphen_values = true)]
    phi_trap: f64,
    /// First external phase, rad (`pi` literal accepted).
    #[arg(long, value_parser = angle, default_value = "-pi", allow_hyphen_values = true)]
    from: f64,
    #[arg(long, value_parser = angle, default_value = "pi", allow_hyphen_values = true)]
    to: f64,
    #[arg(long, default_value_t = 101)]
    steps: usize,
}

#[derive(Debug, Args)]
struct SweetSpotArgs {
    #[command(flatten)]
    device: DeviceArg,
    #[arg(long, value_parser = angle, default_value = "pi", allow_hyphen_values = true)]
    phi_trap: f64,
    /// Search window for the external phase, rad.
    #[arg(long, value_parser = angle, default_value = "-1", allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, value_parser = angle, default_value = "1", allow_hyphen_values = true)]
    hi: f64,
}

#[derive(Debug, Args)]
struct TrapArgs {
    /// Coil current while the ring turns superconducting, A.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "timeline")]
    prebias_current: Option<f64>,
    /// Timeline table (t_s, temp_K, coil_A); the current at the last
    /// downward T_c crossing is used.
    #[arg(long, requires = "t_c")]
    timeline: Option<PathBuf>,
    /// Ring transition temperature, K.
    #[arg(long)]
    t_c: Option<f64>,
    /// Coil current per flux quantum, A. Defaults to the device calibration.
    #[arg(long, allow_hyphen_values = true)]
    calib: Option<f64>,
    /// Stray flux at zero coil current, flux quanta.
    #[arg(long, allow_hyphen_values = true)]
    flux_offset: Option<f64>,
    /// Device providing calibration and ring inductances.
    #[arg(long)]
    device: Option<PathBuf>,
    /// Ring kinetic inductance, H.
    #[arg(long, requires = "l_geometric")]
    l_kinetic: Option<f64>,
    /// Ring geometric inductance, H.
    #[arg(long, requires = "l_kinetic")]
    l_geometric: Option<f64>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Spectroscopy table of transmon f01 versus coil current.
    #[arg(long)]
    data: PathBuf,
    /// Starting E_C, GHz.
    #[arg(long, default_value_t = 0.3)]
    ec_guess: f64,
}

#[derive(Debug, Args)]
struct FitSpectroArgs {
    #[arg(long)]
    data: PathBuf,
    /// Device whose energies start the fit.
    #[arg(long, default_value = "device1")]
    device: PathBuf,
    #[arg(long)]
    ej: Option<f64>,
    #[arg(long)]
    ec: Option<f64>,
    #[arg(long)]
    el: Option<f64>,
    /// Starting current period, A (current-controlled data).
    #[arg(long)]
    period_guess: Option<f64>,
    /// Starting current offset, A.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    offset_guess: f64,
    #[arg(long, value_parser = angle, default_value = "pi", allow_hyphen_values = true)]
    phi_trap: f64,
    #[arg(long, default_value_t = 5)]
    starts: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DecayModel {
    Exp,
    Gauss,
    Ramsey,
}

#[derive(Debug, Args)]
struct FitDecayArgs {
    #[arg(value_enum)]
    model: DecayModel,
    /// Decay table (t_us, p_e).
    #[arg(long)]
    data: PathBuf,
    /// Fix the Ramsey detuning, rad/us.
    #[arg(long, allow_hyphen_values = true)]
    delta_omega: Option<f64>,
}

#[derive(Debug, Args)]
struct FitNoiseArgs {
    /// Coherence table (delta_phi_rad, t1_us, t2e_us, t2r_us).
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    device: DeviceArg,
    /// Kelvin.
    #[arg(long, default_value_t = 0.050)]
    temperature: f64,
    /// Infrared cutoff, rad/s.
    #[arg(long, value_parser = angle, default_value = "2pi")]
    omega_l: f64,
}

#[derive(Debug, Args)]
struct BudgetArgs {
    #[command(flatten)]
    device: DeviceArg,
    /// Noise parameter set: `device1` or `device2`.
    #[arg(long, default_value = "device1")]
    noise: String,
    #[arg(long)]
    tan_delta: Option<f64>,
    /// Echo flux-noise amplitude, Phi0.
    #[arg(long)]
    a_echo: Option<f64>,
    /// Ramsey flux-noise amplitude, Phi0.
    #[arg(long)]
    a_ramsey: Option<f64>,
    /// Gamma_misc,echo / 2pi, kHz.
    #[arg(long)]
    misc_echo_khz: Option<f64>,
    /// Gamma_misc,Ramsey / 2pi, kHz.
    #[arg(long)]
    misc_ramsey_khz: Option<f64>,
    /// Kelvin.
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long, value_parser = angle, default_value = "-0.3", allow_hyphen_values = true)]
    from: f64,
    #[arg(long, value_parser = angle, default_value = "0.3", allow_hyphen_values = true)]
    to: f64,
    #[arg(long, default_value_t = 61)]
    steps: usize,
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let arguments: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let name = command_name(&cli.command);
    let mut report = Report::new(name, cli.seed, arguments);
    let outcome = dispatch(&cli, &mut report).and_then(|plot| {
        if let (Some(path), Some(series)) = (&cli.plot, plot) {
            write_plot_table(path, &series)?;
        }
        let text = report.render();
        match &cli.out {
            Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            }),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {name}: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Input => 2,
        ErrorKind::Data => 3,
        ErrorKind::Numerical => 4,
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Spectrum(_) => "spectrum",
        Command::SweetSpot(_) => "sweet-spot",
        Command::Trap(_) => "trap",
        Command::Calibrate(_) => "calibrate",
        Command::FitSpectro(_) => "fit-spectro",
        Command::FitDecay(_) => "fit-decay",
        Command::FitNoise(_) => "fit-noise",
        Command::CoherenceBudget(_) => "coherence-budget",
    }
}

fn dispatch(cli: &Cli, report: &mut Report) -> fluxonium_core::Result<Option<PlotSeries>> {
    match &cli.command {
        Command::Spectrum(a) => spectrum(a, report),
        Command::SweetSpot(a) => sweet_spot(a, report).map(|_| None),
        Command::Trap(a) => trap(a, report).map(|_| None),
        Command::Calibrate(a) => calibrate(a, report),
        Command::FitSpectro(a) => fit_spectro(a, cli.seed, report).map(|_| None),
        Command::FitDecay(a) => fit_decay(a, report),
        Command::FitNoise(a) => fit_noise(a, report),
        Command::CoherenceBudget(a) => budget(a, report),
    }
}

fn device(path: &Path, report: &mut Report) -> fluxonium_core::Result<DeviceRecord> {
    let rec = load_device(path)?;
    if path.exists() {
        report.input(path)?;
    } else {
        report.builtin(&rec.name);
    }
    Ok(rec)
}

fn linspace(from: f64, to: f64, steps: usize) -> fluxonium_core::Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::InvalidParameter("steps must be >= 2".into()));
    }
    Ok((0..steps)
        .map(|k| from + (to - from) * k as f64 / (steps - 1) as f64)
        .collect())
}

fn spectrum(a: &SpectrumArgs, report: &mut Report) -> fluxonium_core::Result<Option<PlotSeries>> {
    let dev = device(&a.device.device, report)?;
    let phases = linspace(a.from, a.to, a.steps)?;
    let solver = FluxoniumSolver::with_probes(
        &dev.fluxonium,
        &SolverConfig::default().with_levels(3),
        &[0.0, 0.5 * PI, PI],
    )?;
    let spectra: Vec<_> = phases.iter().map(|p| solver.spectrum(a.phi_trap + p)).collect();
    let f01: Vec<f64> = spectra.iter().map(|s| s.frequencies[1] - s.frequencies[0]).collect();
    let f02: Vec<f64> = spectra.iter().map(|s| s.frequencies[2] - s.frequencies[0]).collect();
    let k_min = (0..f01.len())
        .min_by(|&i, &j| f01[i].total_cmp(&f01[j]))
        .expect("steps >= 2");
    report.set("device", dev.name.as_str());
    report.set("phi_trap", a.phi_trap);
    report.set("rows", phases.len() as i64);
    report.set("basis_dim", solver.basis_dim() as i64);
    report.set("min_phi_ext", phases[k_min]);
    report.set("min_f01", f01[k_min]);
    Ok(Some(
        PlotSeries::new(format!("{} transitions versus external phase", dev.name))
            .column("phi_ext", "rad", phases)
            .column("f01", "GHz", f01)
            .column("f02", "GHz", f02),
    ))
}

fn sweet_spot(a: &SweetSpotArgs, report: &mut Report) -> fluxonium_core::Result<()> {
    let dev = device(&a.device.device, report)?;
    let s = FluxoniumSolver::with_probes(
        &dev.fluxonium,
        &SolverConfig::default(),
        &[a.phi_trap + 0.5 * (a.lo + a.hi)],
    )?;
    let phi_ext = s.sweet_spot(a.phi_trap, (a.lo, a.hi))?;
    let total = a.phi_trap + phi_ext;
    report.set("device", dev.name.as_str());
    report.set("phi_trap", a.phi_trap);
    report.set("phi_ext", phi_ext);
    report.set("total_offset", total);
    report.set("f01", s.f01(total));
    report.set("dispersion", s.dispersion(total)?);
    Ok(())
}

fn trap(a: &TrapArgs, report: &mut Report) -> fluxonium_core::Result<()> {
    let dev = match &a.device {
        Some(p) => Some(device(p, report)?),
        None => None,
    };
    let per_phi0 = a
        .calib
        .or_else(|| dev.as_ref()?.calibration.map(|c| c.current_per_flux_quantum))
        .ok_or_else(|| Error::InvalidParameter("need --calib or a device with a calibration".into()))?;
    let offset = a
        .flux_offset
        .or_else(|| dev.as_ref()?.calibration.map(|c| c.flux_offset))
        .unwrap_or(0.0);
    let calib = CoilCalibration::new(per_phi0)?.with_offset(offset);
    calib.validate()?;
    let ring = match (a.l_kinetic, a.l_geometric) {
        (Some(k), Some(g)) => Some(RingParams::new(k, g)?),
        _ => dev.as_ref().and_then(|d| d.ring),
    };
    let current = match (&a.timeline, a.prebias_current) {
        (Some(path), _) => {
            report.input(path)?;
            let t_c = a.t_c.expect("clap enforces --t-c with --timeline");
            let tl = load_timeline(path, t_c)?;
            let (i, t) = last_downward_crossing(&tl)?;
            report.set("crossing_time", t);
            i
        }
        (None, Some(i)) => i,
        (None, None) => {
            return Err(Error::InvalidParameter(
                "need --prebias-current or --timeline".into(),
            ))
        }
    };
    let phi_prebias = current_to_prebias(current, &calib);
    let sel = nearest_fluxoid(phi_prebias);
    report.set("prebias_current", current);
    report.set("phi_prebias", phi_prebias);
    report.set("n", sel.n);
    report.set("phi_trap", trap_phase(sel.n));
    report.set("tie", sel.tie);
    if let Some(ring) = ring {
        let (i_s, e) = ring_state(sel.n, phi_prebias, &ring)?;
        report.set("i_s", i_s);
        report.set("e_ring", e);
    }
    Ok(())
}

fn set_fit(report: &mut Report, fit: &FitResult) {
    for (k, v) in fit_result_table(fit) {
        report.result.insert(k, v);
    }
}

fn calibrate(a: &CalibrateArgs, report: &mut Report) -> fluxonium_core::Result<Option<PlotSeries>> {
    report.input(&a.data)?;
    let data = load_spectroscopy(&a.data)?;
    let fit = fit_transmon_period(&data, &TransmonGuess { e_c: a.ec_guess })?;
    set_fit(report, &fit);
    let get = |n: &str| fit.value(n);
    let tp = TransmonParams {
        e_j1: get("e_j1")?,
        e_j2: get("e_j2")?,
        e_c: get("e_c")?,
        n_g: 0.0,
    };
    let (period, offset) = (get("current_period")?, get("current_offset")?);
    let controls: Vec<f64> = data.points.iter().map(|p| p.control).collect();
    let model = controls
        .iter()
        .map(|i| transmon_freq_approx(&tp, TWO_PI * (i - offset) / period))
        .collect();
    Ok(Some(
        PlotSeries::new("transmon f01 versus coil current")
            .column("control", "A", controls)
            .column("freq", "GHz", data.points.iter().map(|p| p.frequency).collect())
            .column("model", "GHz", model),
    ))
}

fn fit_spectro(a: &FitSpectroArgs, seed: u64, report: &mut Report) -> fluxonium_core::Result<()> {
    let dev = device(&a.device, report)?;
    report.input(&a.data)?;
    let data = load_spectroscopy(&a.data)?;
    let period = match (data.control_kind, a.period_guess) {
        (ControlKind::Current, Some(p)) => p,
        (ControlKind::Current, None) => {
            return Err(Error::InvalidParameter(
                "current-controlled data needs --period-guess".into(),
            ))
        }
        (ControlKind::Phase, _) => 1.0,
    };
    let guess = SpectroscopyGuess {
        e_j: a.ej.unwrap_or(dev.fluxonium.e_j),
        e_c: a.ec.unwrap_or(dev.fluxonium.e_c),
        e_l: a.el.unwrap_or(dev.fluxonium.e_l),
        current_period: period,
        current_offset: a.offset_guess,
    };
    let opts = SpectroscopyFitOptions {
        phi_trap: a.phi_trap,
        n_starts: a.starts,
        seed,
        ..Default::default()
    };
    let fit = fit_fluxonium_spectroscopy(&data, &guess, &SolverConfig::default(), &opts)?;
    set_fit(report, &fit);
    Ok(())
}

fn fit_decay(a: &FitDecayArgs, report: &mut Report) -> fluxonium_core::Result<Option<PlotSeries>> {
    report.input(&a.data)?;
    let trace = load_decay(&a.data)?;
    let fit = match a.model {
        DecayModel::Exp => fit_exp_decay(&trace)?,
        DecayModel::Gauss => fit_exp_gauss_decay(&trace)?,
        DecayModel::Ramsey => fit_ramsey_decay(
            &trace,
            &RamseyOptions {
                delta_omega: a.delta_omega,
            },
        )?,
    };
    set_fit(report, &fit);
    let p: Vec<f64> = fit.parameters.iter().map(|(_, v)| *v).collect();
    let t = trace.times();
    let model = t
        .iter()
        .map(|&t| match a.model {
            DecayModel::Exp => exp_decay_model(t, p[0], p[1], p[2]),
            DecayModel::Gauss => exp_gauss_model(t, p[0], p[1], p[2], p[3]),
            DecayModel::Ramsey => ramsey_model(t, p[0], p[1], p[2], p[3], p[4], p[5]),
        })
        .collect();
    Ok(Some(
        PlotSeries::new("excited-state population")
            .column("t", "us", t)
            .column("p_e", "1", trace.values())
            .column("model", "1", model),
    ))
}

fn budget_series(label: String, points: &[BudgetPoint]) -> PlotSeries {
    let col = |f: fn(&BudgetPoint) -> f64| points.iter().map(f).collect::<Vec<f64>>();
    PlotSeries::new(label)
        .column("delta_phi_ext", "rad", col(|b| b.delta_phi_ext))
        .column("f01", "GHz", col(|b| b.f01))
        .column("gamma1", "1/us", col(|b| b.gamma1))
        .column("gamma2e", "1/us", col(|b| b.gamma2_echo))
        .column("gamma2r", "1/us", col(|b| b.gamma2_ramsey))
        .column("t1", "us", col(|b| 1.0 / b.gamma1))
        .column("t2e", "us", col(|b| 1.0 / b.gamma2_echo))
        .column("t2r", "us", col(|b| 1.0 / b.gamma2_ramsey))
}

fn fit_noise(a: &FitNoiseArgs, report: &mut Report) -> fluxonium_core::Result<Option<PlotSeries>> {
    let dev = device(&a.device.device, report)?;
    report.input(&a.data)?;
    let points = load_coherence(&a.data)?;
    let config = NoiseFitConfig {
        temperature: a.temperature,
        omega_l: a.omega_l,
    };
    let fit = fit_noise_parameters(&points, &dev.fluxonium, &config, &SolverConfig::default())?;
    set_fit(report, &fit);
    let noise = NoiseModel {
        tan_delta_c: fit.value("tan_delta_c")?,
        a_phi_echo: fit.value("a_phi_e")?,
        a_phi_ramsey: fit.value("a_phi_r")?,
        gamma_misc_echo: fit.value("gamma_misc_e")?,
        gamma_misc_ramsey: fit.value("gamma_misc_r")?,
        temperature: a.temperature,
        omega_l: a.omega_l,
    };
    let deltas: Vec<f64> = points.iter().map(|p| p.delta_phi_ext).collect();
    let model = coherence_budget(&dev.fluxonium, &noise, &deltas, &SolverConfig::default())?;
    let series = budget_series(format!("{} fitted coherence model", dev.name), &model)
        .column("t1_measured", "us", points.iter().map(|p| p.t1).collect())
        .column("t2e_measured", "us", points.iter().map(|p| p.t2e).collect())
        .column("t2r_measured", "us", points.iter().map(|p| p.t2r).collect());
    Ok(Some(series))
}

fn budget(a: &BudgetArgs, report: &mut Report) -> fluxonium_core::Result<Option<PlotSeries>> {
    let dev = device(&a.device.device, report)?;
    let mut noise = match a.noise.as_str() {
        "device1" => NoiseModel::device_1(),
        "device2" => NoiseModel::device_2(),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown noise set '{other}'; use device1 or device2"
            )))
        }
    };
    if let Some(v) = a.tan_delta {
        noise.tan_delta_c = v;
    }
    if let Some(v) = a.a_echo {
        noise.a_phi_echo = v;
    }
    if let Some(v) = a.a_ramsey {
        noise.a_phi_ramsey = v;
    }
    if let Some(v) = a.misc_echo_khz {
        noise.gamma_misc_echo = khz_over_two_pi_to_per_us(v);
    }
    if let Some(v) = a.misc_ramsey_khz {
        noise.gamma_misc_ramsey = khz_over_two_pi_to_per_us(v);
    }
    if let Some(v) = a.temperature {
        noise.temperature = v;
    }
    let deltas = linspace(a.from, a.to, a.steps)?;
    let points = coherence_budget(&dev.fluxonium, &noise, &deltas, &SolverConfig::default())?;
    let mut model = toml::Table::new();
    model.insert("tan_delta_c".into(), Value::Float(noise.tan_delta_c));
    model.insert("a_phi_echo".into(), Value::Float(noise.a_phi_echo));
    model.insert("a_phi_ramsey".into(), Value::Float(noise.a_phi_ramsey));
    model.insert("gamma_misc_echo".into(), Value::Float(noise.gamma_misc_echo));
    model.insert("gamma_misc_ramsey".into(), Value::Float(noise.gamma_misc_ramsey));
    model.insert("temperature".into(), Value::Float(noise.temperature));
    model.insert("omega_l".into(), Value::Float(noise.omega_l));
    report.set("device", dev.name.as_str());
    report.set("noise_model", model);
    report.set("rows", points.len() as i64);
    if let Some(best) = points
        .iter()
        .min_by(|x, y| x.delta_phi_ext.abs().total_cmp(&y.delta_phi_ext.abs()))
    {
        let mut t = toml::Table::new();
        t.insert("delta_phi_ext".into(), Value::Float(best.delta_phi_ext));
        t.insert("t1".into(), Value::Float(1.0 / best.gamma1));
        t.insert("t2e".into(), Value::Float(1.0 / best.gamma2_echo));
        t.insert("t2r".into(), Value::Float(1.0 / best.gamma2_ramsey));
        report.set("nearest_sweet_spot", t);
    }
    Ok(Some(budget_series(format!("{} coherence budget", dev.name), &points)))
}

/// Built-in device names accepted by `--device`.
pub fn builtin_devices() -> Vec<&'static str> {
    ["device1", "device2"]
        .into_iter()
        .filter(|n| builtin_device(n).is_some())
        .collect()
}
