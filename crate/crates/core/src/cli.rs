//! Command-line front end: one subcommand per pipeline.
//!
//! A JSON config (`--config file.json`) supplies flag values by name; keys
//! are expanded into flags placed right after the subcommand, so anything
//! given on the command line overrides them.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::culling::{fidelity_map, hold_and_restore_report, point_from_spectrum, scan_window, DEFAULT_RESIDUAL};
use crate::dfg::{estimates, recorded_notes, DfgParams};
use crate::error::Error;
use crate::numeric::fmt_num;
use crate::potential::TrapSpec;
use crate::resonance::{resonance_for_peak, survival_exponential, survival_from_spectrum, Resonance};
use crate::scattering::scan_spectrum;
use crate::splitting::{gap_map, plan_split_path, solve_on_grid, Grid, GridSpec, WALL_MARGIN};
use crate::tdse::{adiabatic_ramp, decay_grid, decay_run, split_fidelity, Ramp};
use crate::units::{force_from_gradient, UnitSystem, BOHR_MAGNETON, GAUSS_PER_CM, LI6_MASS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

const SUBCOMMANDS: [&str; 8] = [
    "spectrum",
    "resonances",
    "survival",
    "fidelity-map",
    "dfg-estimates",
    "split-gap",
    "split-fidelity",
    "units-convert",
];

#[derive(Parser, Debug)]
#[command(name = "fermicull", version, about, args_override_self = true)]
struct Cli {
    /// JSON file whose keys are flag names (without dashes); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for sweeps (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// P(E), phase and peak flags of the open trap.
    Spectrum(SpectrumArgs),
    /// Lorentzian fits of every detected peak.
    Resonances(SpectrumArgs),
    /// Survival of one quasi-bound level: exponential law, spectral integral, optional TDSE.
    Survival(SurvivalArgs),
    /// Culling fidelity over a (z, f) grid.
    FidelityMap(MapArgs),
    /// Pairing-gap and ground-occupation estimates for the Fermi gas.
    DfgEstimates(DfgArgs),
    /// Double-well gap map, optionally with a widest-gap splitting path.
    SplitGap(GapArgs),
    /// Splitting fidelity of a gap-adaptive ramp (or a sudden quench).
    SplitFidelity(SplitArgs),
    /// Conversions between SI and oscillator units.
    UnitsConvert(UnitsArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Serialize)]
struct OutputArgs {
    /// Output file; stdout when absent (no manifest or plot script then).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Also write a gnuplot script next to the output.
    #[arg(long)]
    plot: bool,
}

#[derive(Args, Debug, Serialize)]
struct SpectrumArgs {
    #[arg(long)]
    z: f64,
    #[arg(long)]
    f: f64,
    /// Lower scan energy; defaults to the culling scan window.
    #[arg(long)]
    emin: Option<f64>,
    #[arg(long)]
    emax: Option<f64>,
    #[arg(long, default_value_t = 300)]
    points: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct SurvivalArgs {
    #[arg(long)]
    z: f64,
    #[arg(long)]
    f: f64,
    /// Index of the resonance, counted from the lowest detected peak.
    #[arg(long, default_value_t = 0)]
    peak: usize,
    #[arg(long)]
    emin: Option<f64>,
    #[arg(long)]
    emax: Option<f64>,
    #[arg(long, default_value_t = 300)]
    points: usize,
    /// Last time, in units of the level lifetime.
    #[arg(long, default_value_t = 3.0)]
    tmax_tau: f64,
    #[arg(long, default_value_t = 31)]
    samples: usize,
    /// Half-width of the spectral window in units of the level width.
    #[arg(long, default_value_t = 50.0)]
    window_gammas: f64,
    /// Also propagate the truncated state in time.
    #[arg(long)]
    tdse: bool,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 0.02)]
    spacing: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct MapArgs {
    #[arg(long, default_value_t = 4.0)]
    zmin: f64,
    #[arg(long, default_value_t = 5.2)]
    zmax: f64,
    #[arg(long, default_value_t = 0.2)]
    fmin: f64,
    #[arg(long, default_value_t = 0.7)]
    fmax: f64,
    #[arg(long, default_value_t = 7)]
    nz: usize,
    #[arg(long, default_value_t = 11)]
    nf: usize,
    #[arg(long, default_value_t = DEFAULT_RESIDUAL)]
    residual: f64,
    /// Trap frequency for the SI holding-time column of the JSON report.
    #[arg(long, default_value_t = 1000.0)]
    omega_hz: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct DfgArgs {
    #[arg(long, default_value_t = -0.3, allow_hyphen_values = true)]
    kf_a: f64,
    #[arg(long, default_value_t = 0.1)]
    t_over_tf: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct GapArgs {
    #[arg(long, default_value_t = 0.0)]
    dmin: f64,
    #[arg(long, default_value_t = 8.0)]
    dmax: f64,
    #[arg(long, default_value_t = 0.0)]
    fmin: f64,
    #[arg(long, default_value_t = 0.3)]
    fmax: f64,
    #[arg(long, default_value_t = 17)]
    nd: usize,
    /// The default f grid (step 0.03) contains f = 0.12.
    #[arg(long, default_value_t = 11)]
    nf: usize,
    #[arg(long, default_value_t = 0.01)]
    spacing: f64,
    /// Plan a splitting path to this separation and write it to `--path-out`.
    #[arg(long)]
    d_target: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    min_gap: f64,
    #[arg(long, default_value_t = 0.12)]
    f_bias: f64,
    #[arg(long)]
    path_out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct SplitArgs {
    #[arg(long, default_value_t = 4.82)]
    d: f64,
    #[arg(long, default_value_t = 0.12)]
    f: f64,
    #[arg(long, default_value_t = 80.0)]
    duration: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 0.01)]
    spacing: f64,
    /// Points along the straight path at which the gap is solved.
    #[arg(long, default_value_t = 48)]
    path_points: usize,
    #[arg(long, default_value_t = 2001)]
    knots: usize,
    /// Jump to the final potential instead of ramping.
    #[arg(long)]
    sudden: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct UnitsArgs {
    #[arg(long, default_value_t = 1000.0)]
    omega_hz: f64,
    /// "li6" or a mass in atomic mass units.
    #[arg(long, default_value = "li6")]
    mass: String,
    /// Magnetic moment in Bohr magnetons.
    #[arg(long, default_value_t = 1.0)]
    moment_mub: f64,
    #[arg(long)]
    length_um: Option<f64>,
    #[arg(long)]
    time_ms: Option<f64>,
    #[arg(long)]
    gradient_g_cm: Option<f64>,
    /// Dimensionless length to convert to micrometres.
    #[arg(long)]
    length: Option<f64>,
    /// Dimensionless time to convert to milliseconds.
    #[arg(long)]
    time: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn config_args(path: &Path) -> Result<Vec<OsString>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Run(Error::Config(format!("config {} is not valid JSON: {e}", path.display()))))?;
    let Value::Object(map) = value else {
        return Err(Failure::Run(Error::Config("config must be a JSON object".into())));
    };
    let mut out = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Bool(true) => out.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Number(n) => out.push(format!("{flag}={n}").into()),
            Value::String(s) => out.push(format!("{flag}={s}").into()),
            other => {
                return Err(Failure::Run(Error::Config(format!("config key {key} has unsupported value {other}"))))
            }
        }
    }
    Ok(out)
}

// Expand --config into flags placed right after the subcommand name.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut config = None;
    for (i, a) in strs.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        } else if a == "--config" {
            config = strs.get(i + 1).map(PathBuf::from);
        }
    }
    let Some(path) = config else {
        return Ok(argv);
    };
    let Some(pos) = strs.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(argv);
    };
    let extra = config_args(&path)?;
    let mut out = argv[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}

/// Run the CLI on `argv` (program name first) and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let result = expand_config(argv).and_then(|argv| {
        let cli = Cli::try_parse_from(argv).map_err(|e| {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                Failure::Usage(String::new())
            } else {
                Failure::Usage(e.render().to_string())
            }
        })?;
        execute(cli)
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            f.report();
            f.exit_code()
        }
    }
}

impl Failure {
    fn report(&self) {
        match self {
            Failure::Usage(msg) => eprint!("{msg}"),
            Failure::Run(e) => eprintln!("error: {e}"),
            Failure::Io(msg) => eprintln!("error: {msg}"),
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            // clap already printed help or version text
            Failure::Usage(msg) if msg.is_empty() => EXIT_OK,
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Run(e) if e.is_validation() => EXIT_VALIDATION,
            Failure::Run(_) => EXIT_NUMERICAL,
            Failure::Io(_) => EXIT_VALIDATION,
        }
    }
}

struct Product {
    data: String,
    plot: Option<String>,
    extra: Value,
}

fn execute(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Io(format!("cannot start thread pool: {e}")))?;
    }
    let started = Instant::now();
    let (output, product) = match &cli.command {
        Command::Spectrum(a) => (&a.output, cmd_spectrum(a)?),
        Command::Resonances(a) => (&a.output, cmd_resonances(a)?),
        Command::Survival(a) => (&a.output, cmd_survival(a)?),
        Command::FidelityMap(a) => (&a.output, cmd_map(a)?),
        Command::DfgEstimates(a) => (&a.output, cmd_dfg(a)?),
        Command::SplitGap(a) => (&a.output, cmd_gap(a)?),
        Command::SplitFidelity(a) => (&a.output, cmd_split(a)?),
        Command::UnitsConvert(a) => (&a.output, cmd_units(a)?),
    };
    let elapsed = started.elapsed().as_secs_f64();
    let Some(out) = &output.out else {
        print!("{}", product.data);
        return Ok(());
    };
    write(out, &product.data)?;
    let mut outputs = vec![out.display().to_string()];
    if output.plot {
        if let Some(script) = &product.plot {
            let p = sibling(out, "gp");
            let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            write(&p, &script.replace("{data}", &name))?;
            outputs.push(p.display().to_string());
        }
    }
    let manifest = json!({
        "program": "fermicull",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command,
        "config": cli.config,
        "threads": rayon::current_num_threads(),
        "outputs": outputs,
        "results": product.extra,
        "timings": { "wall_seconds": elapsed },
        "started_unix": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64() - elapsed).unwrap_or(0.0),
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Io(e.to_string()))?;
    write(&sibling(out, "manifest.json"), &(text + "\n"))
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Failure::Io(e.to_string()))
}

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {v}")).into())
    }
}

fn scan(z: f64, f: f64, emin: Option<f64>, emax: Option<f64>, points: usize) -> Result<crate::scattering::Spectrum, Failure> {
    if points < 10 {
        return Err(Error::domain(format!("--points must be at least 10, got {points}")).into());
    }
    let spec = TrapSpec::new(z, f)?;
    let (lo, hi) = match (emin, emax) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            let (a, b) = scan_window(&spec)?;
            (emin.unwrap_or(a), emax.unwrap_or(b))
        }
    };
    Ok(scan_spectrum(&spec, lo, hi, points)?)
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<Product, Failure> {
    let s = scan(a.z, a.f, a.emin, a.emax, a.points)?;
    let data = match a.output.format {
        Format::Csv => s.to_csv(),
        Format::Json => to_json(&s)?,
    };
    let plot = "set xlabel 'E [hbar omega]'\nset ylabel 'log10 P'\nset datafile separator ','\n\
                plot '{data}' using 1:4 with lines title 'P(E)', \
                '' using 1:(strlen(strcol(5)) > 0 ? $4 : 1/0) with points pt 7 title 'peaks'\npause -1\n";
    Ok(Product {
        data,
        plot: Some(plot.into()),
        extra: json!({ "peaks": s.peaks.len(), "samples": s.samples.len() }),
    })
}

fn resonances(s: &crate::scattering::Spectrum) -> Result<Vec<Resonance>, Failure> {
    (0..s.peaks.len()).map(|k| resonance_for_peak(s, k).map_err(Failure::from)).collect()
}

fn cmd_resonances(a: &SpectrumArgs) -> Result<Product, Failure> {
    let s = scan(a.z, a.f, a.emin, a.emax, a.points)?;
    let res = resonances(&s)?;
    let data = match a.output.format {
        Format::Csv => {
            let mut t = format!("{}\n", Resonance::csv_header());
            for r in &res {
                t.push_str(&r.csv_row());
                t.push('\n');
            }
            t
        }
        Format::Json => to_json(&res)?,
    };
    let mut extra = json!({ "count": res.len() });
    if res.len() >= 2 {
        if let Ok(p) = point_from_spectrum(&s, DEFAULT_RESIDUAL) {
            extra["lifetime_ratio"] = json!(p.tau0_over_tau1);
        }
    }
    Ok(Product { data, plot: None, extra })
}

fn cmd_survival(a: &SurvivalArgs) -> Result<Product, Failure> {
    positive("--tmax-tau", a.tmax_tau)?;
    positive("--window-gammas", a.window_gammas)?;
    if a.samples < 2 {
        return Err(Error::domain("--samples must be at least 2").into());
    }
    let s = scan(a.z, a.f, a.emin, a.emax, a.points)?;
    if a.peak >= s.peaks.len() {
        return Err(Error::Shape(format!("peak {} requested but {} found", a.peak, s.peaks.len())).into());
    }
    let res = resonance_for_peak(&s, a.peak)?;
    let times: Vec<f64> = (0..a.samples).map(|i| a.tmax_tau * res.tau * i as f64 / (a.samples - 1) as f64).collect();
    let tdse = if a.tdse {
        let spec = TrapSpec::new(a.z, a.f)?;
        let grid = decay_grid(&spec, a.spacing)?;
        Some(decay_run(&spec, &res, &grid, a.dt, a.tmax_tau * res.tau)?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(times.len());
    let mut spectral_ok = true;
    for &t in &times {
        let exp = survival_exponential(&res, t)?;
        // a broad level may not fit the requested window above E = 0
        let spec_s = match survival_from_spectrum(&s, &res, a.window_gammas * res.gamma, t) {
            Ok(v) => v,
            Err(e) if e.is_validation() => {
                if spectral_ok {
                    eprintln!("warning: spectral survival skipped: {e}");
                }
                spectral_ok = false;
                f64::NAN
            }
            Err(e) => return Err(e.into()),
        };
        let td = tdse
            .as_ref()
            .map(|r| {
                let i = r.times.partition_point(|&x| x < t - 1e-9).min(r.times.len() - 1);
                r.survival[i]
            })
            .unwrap_or(f64::NAN);
        rows.push((t, exp, spec_s, td));
    }
    let data = match a.output.format {
        Format::Csv => {
            let mut t = String::from("# time [1/omega], exponential [prob], spectral [prob], tdse [prob]\n");
            for (a0, b, c, d) in &rows {
                let _ = writeln!(t, "{},{},{},{}", fmt_num(*a0), fmt_num(*b), fmt_num(*c), fmt_num(*d));
            }
            t
        }
        Format::Json => to_json(&json!({ "resonance": res, "rows": rows }))?,
    };
    let mut extra = json!({ "e0": res.e0, "gamma": res.gamma });
    if let Some(r) = &tdse {
        if let Ok(fit) = r.fit_decay(0.1 * res.tau, 2.0 * res.tau) {
            extra["tdse_rate"] = json!(-fit.slope);
            extra["tdse_r_squared"] = json!(fit.r_squared);
        }
    }
    let plot = "set xlabel 't [1/omega]'\nset ylabel 'survival'\nset logscale y\nset datafile separator ','\n\
                plot '{data}' using 1:2 with lines title 'exp', '' using 1:3 with points title 'spectral', \
                '' using 1:4 with lines title 'tdse'\npause -1\n";
    Ok(Product { data, plot: Some(plot.into()), extra })
}

fn cmd_map(a: &MapArgs) -> Result<Product, Failure> {
    let units = UnitSystem::lithium6(a.omega_hz)?;
    let m = fidelity_map((a.zmin, a.zmax), (a.fmin, a.fmax), a.nz, a.nf, a.residual)?;
    let data = match a.output.format {
        Format::Csv => m.to_csv(),
        Format::Json => m.to_json()? + "\n",
    };
    let best = m
        .cells()
        .filter_map(|c| c.point.map(|p| (c, p)))
        .max_by(|x, y| x.1.log10_loss.total_cmp(&y.1.log10_loss).reverse());
    let extra = match best {
        Some((c, p)) => {
            let report = hold_and_restore_report(&p, &units)?;
            json!({ "best": { "z": c.z, "f": c.f, "ratio": p.tau0_over_tau1, "report": report } })
        }
        None => json!({}),
    };
    let plot = "set xlabel 'z'\nset ylabel 'f'\nset cblabel 'log10 loss'\nset datafile separator ','\n\
                set view map\nsplot '{data}' using 1:2:7 with points pt 5 ps 2 palette notitle\npause -1\n";
    Ok(Product { data, plot: Some(plot.into()), extra })
}

fn cmd_dfg(a: &DfgArgs) -> Result<Product, Failure> {
    let rows = estimates(&DfgParams { kf_a: a.kf_a, t_over_tf: a.t_over_tf })?;
    let notes = recorded_notes();
    let data = match a.output.format {
        Format::Csv => {
            let mut t = String::from("# quantity [label], value [1]\n");
            for (k, v) in &rows {
                let _ = writeln!(t, "{k},{}", fmt_num(*v));
            }
            t
        }
        Format::Json => to_json(&json!({ "estimates": rows, "notes": notes }))?,
    };
    Ok(Product { data, plot: None, extra: json!({ "notes": notes }) })
}

fn cmd_gap(a: &GapArgs) -> Result<Product, Failure> {
    let spec = GridSpec { half_width: None, spacing: a.spacing };
    let m = gap_map((a.dmin, a.dmax), (a.fmin, a.fmax), a.nd, a.nf, &spec)?;
    let data = match a.output.format {
        Format::Csv => m.to_csv(),
        Format::Json => to_json(&m)?,
    };
    let mut extra = json!({});
    if let Some(dt) = a.d_target {
        let path = plan_split_path(&m, dt, a.min_gap, a.f_bias)?;
        let bottleneck = path.iter().map(|&(d, f)| m.interpolate_gap(d, f)).fold(f64::INFINITY, f64::min);
        extra = json!({ "path_points": path.len(), "bottleneck_gap": bottleneck });
        let mut t = String::from("# d [x0], f [hbar*omega/x0], gap [hbar*omega]\n");
        for &(d, f) in &path {
            let _ = writeln!(t, "{},{},{}", fmt_num(d), fmt_num(f), fmt_num(m.interpolate_gap(d, f)));
        }
        match &a.path_out {
            Some(p) => write(p, &t)?,
            None if a.output.out.is_none() => eprint!("{t}"),
            None => write(&sibling(a.output.out.as_ref().unwrap(), "path.csv"), &t)?,
        }
    }
    let plot = "set xlabel 'd'\nset ylabel 'f'\nset cblabel 'gap'\nset datafile separator ','\n\
                set view map\nsplot '{data}' using 1:2:5 with points pt 5 ps 2 palette notitle\npause -1\n";
    Ok(Product { data, plot: Some(plot.into()), extra })
}

fn cmd_split(a: &SplitArgs) -> Result<Product, Failure> {
    if a.path_points < 1 || a.knots < 2 {
        return Err(Error::domain("--path-points must be >= 1 and --knots >= 2").into());
    }
    if !(a.d >= 0.0) {
        return Err(Error::domain("--d must be non-negative").into());
    }
    if !(a.duration >= 0.0) {
        return Err(Error::domain("--duration must be non-negative").into());
    }
    if a.spacing > crate::splitting::MAX_SPACING {
        return Err(Error::Config(format!("--spacing {} above {}", a.spacing, crate::splitting::MAX_SPACING)).into());
    }
    let grid = Grid::symmetric(0.5 * a.d + WALL_MARGIN, a.spacing)?;
    let path: Vec<(f64, f64)> =
        (0..=a.path_points).map(|i| (a.d * i as f64 / a.path_points as f64, a.f)).collect();
    let gaps = path
        .iter()
        .map(|&(d, f)| solve_on_grid(d, f, 2, &grid).map(|w| w.gap))
        .collect::<crate::Result<Vec<f64>>>()?;
    let min_gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let ramp = if a.sudden {
        Ramp::new(vec![(0.0, 0.0, a.f), (0.0, a.d, a.f)])?
    } else {
        adiabatic_ramp(&path, &gaps, a.duration, a.knots)?
    };
    let fid = split_fidelity(&ramp, &grid, a.dt)?;
    let data = match a.output.format {
        Format::Csv => format!(
            "# d [x0], f [hbar*omega/x0], duration [1/omega], min_gap [hbar*omega], fidelity [prob], infidelity [prob]\n\
             {},{},{},{},{},{}\n",
            fmt_num(a.d),
            fmt_num(a.f),
            fmt_num(ramp.duration()),
            fmt_num(min_gap),
            fmt_num(fid),
            fmt_num(1.0 - fid)
        ),
        Format::Json => to_json(&json!({
            "d": a.d, "f": a.f, "duration": ramp.duration(), "min_gap": min_gap,
            "fidelity": fid, "ramp": ramp.knots,
        }))?,
    };
    Ok(Product { data, plot: None, extra: json!({ "fidelity": fid }) })
}

fn cmd_units(a: &UnitsArgs) -> Result<Product, Failure> {
    let mass = if a.mass.eq_ignore_ascii_case("li6") {
        LI6_MASS
    } else {
        let u: f64 = a
            .mass
            .parse()
            .map_err(|_| Failure::Run(Error::domain(format!("--mass must be li6 or a number in u, got {}", a.mass))))?;
        u * crate::units::ATOMIC_MASS_UNIT
    };
    positive("--omega-hz", a.omega_hz)?;
    let units = UnitSystem::new(mass, 2.0 * std::f64::consts::PI * a.omega_hz)?;
    let mut rows: Vec<(String, f64, &str, f64)> = Vec::new();
    if let Some(l) = a.length_um {
        rows.push(("length".into(), l, "um", units.length_to_dimensionless(l * 1e-6)?));
    }
    if let Some(t) = a.time_ms {
        rows.push(("time".into(), t, "ms", units.time_to_dimensionless(t * 1e-3)?));
    }
    if let Some(g) = a.gradient_g_cm {
        let f = force_from_gradient(g * GAUSS_PER_CM, a.moment_mub * BOHR_MAGNETON, &units)?;
        rows.push(("force".into(), g, "G/cm", f));
    }
    if let Some(l) = a.length {
        rows.push(("length".into(), units.length_to_si(l)? * 1e6, "um", l));
    }
    if let Some(t) = a.time {
        rows.push(("time".into(), units.time_to_si(t)? * 1e3, "ms", t));
    }
    if rows.is_empty() {
        rows.push(("length unit".into(), units.x0 * 1e6, "um", 1.0));
        rows.push(("time unit".into(), units.t0 * 1e3, "ms", 1.0));
    }
    let data = match a.output.format {
        Format::Csv => {
            let mut t = String::from("# quantity [label], si_value [si_unit], si_unit [label], dimensionless [osc]\n");
            for (q, si, unit, dimless) in &rows {
                let _ = writeln!(t, "{q},{},{unit},{}", fmt_num(*si), fmt_num(*dimless));
            }
            t
        }
        Format::Json => to_json(&json!({ "units": units, "rows": rows }))?,
    };
    Ok(Product { data, plot: None, extra: json!({ "x0_m": units.x0 }) })
}
