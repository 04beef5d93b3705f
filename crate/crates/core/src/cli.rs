//! The `lsat` command line: ingestion, segmentation, chords, spectrograms,
//! signatures, aggregation, phase budgets, curvature checks and inference.
//!
//! Every file output is written to a temporary sibling and renamed into
//! place, so a failed command never leaves a partial file behind.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use chrono::Timelike;
use clap::{Args, Parser, Subcommand};

use crate::fixtures;
use crate::inference::{self, ObservationBatch, PosteriorGrid};
use crate::propagation::{self, AtmosphericProfile, PhasePath};
use crate::segments::{self, GraphChord, IsochronousSegment, TimeSeries};
use crate::signature::{self, AdjustmentWeights, Dims, GammaSample};
use crate::spectral::{self, WindowKind};
use crate::store::{self, SegmentStore, SignatureRecord, SignatureStore, WeatherSample};
use crate::tensors::{self, MetricField, SpacetimePoint};

/// File written by `ingest` and read by the commands that work on raw series.
pub const OBSERVATIONS_FILE: &str = "observations.csv";

#[derive(Debug, Parser)]
#[command(name = "lsat", version, about = "Lightmorphic signature analysis toolkit")]
pub struct CliConfig {
    /// Working directory for stores and observations.
    #[arg(long, global = true, env = store::DATA_DIR_ENV)]
    pub data_dir: Option<PathBuf>,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

impl CliConfig {
    pub fn data_dir(&self) -> PathBuf {
        self.data_dir.clone().unwrap_or_else(store::data_dir)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate weather CSVs and consolidate them into the data directory.
    Ingest(IngestArgs),
    /// Cut every series into fixed-length isochronous segments.
    Segment(SegmentArgs),
    /// Link similar segments within each series and measure chord amplitudes.
    Chords(ChordArgs),
    /// Write the short-time power spectrogram of one series as CSV.
    Spectrogram(SpectrogramArgs),
    /// Build one signature tensor per series.
    Signature(SignatureArgs),
    /// Sum signature tensors into the aggregate store.
    Aggregate(AggregateArgs),
    /// Evaluate the light phase budget of a propagation path.
    Phase(PhaseArgs),
    /// Run the curvature and wave-equation residual suite.
    CurvatureCheck(CurvatureArgs),
    /// Grid posterior for the mean per-cell signature intensity.
    Posterior(PosteriorArgs),
    /// Fit the ridge baseline on lagged irradiance and forecast a series.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, args = ["input", "synthetic"])]
pub struct IngestArgs {
    /// CSV file or directory of CSV files.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Generate this many synthetic cities instead of reading files.
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Days per synthetic city.
    #[arg(long, default_value_t = fixtures::DEFAULT_DAYS)]
    pub days: usize,
    /// Output directory (defaults to the data directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Segment length in seconds.
    #[arg(long, default_value_t = 86_400.0)]
    pub window: f64,
    #[arg(long, default_value_t = 24)]
    pub profile_len: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChordArgs {
    /// Segment store (defaults to segments.store in the data directory).
    #[arg(long)]
    pub segments: Option<PathBuf>,
    /// Minimum profile correlation for a chord.
    #[arg(long, default_value_t = 0.95)]
    pub threshold: f64,
    /// Profile samples per amplitude sub-window.
    #[arg(long, default_value_t = 6)]
    pub sub_window: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the chord-weighted alternative profile of this segment.
    #[arg(long)]
    pub predict: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
pub struct SpectrogramArgs {
    /// City id of the series.
    #[arg(long)]
    pub series: String,
    #[arg(long, default_value_t = 128)]
    pub window: usize,
    #[arg(long, default_value_t = 64)]
    pub hop: usize,
    /// `hann` or `rectangular`.
    #[arg(long, default_value_t = WindowKind::Hann)]
    pub kind: WindowKind,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SignatureArgs {
    #[arg(long, default_value_t = 8)]
    pub intensity_bins: usize,
    #[arg(long, default_value_t = 24)]
    pub trajectory_bins: usize,
    #[arg(long, default_value_t = 4)]
    pub channels: usize,
    /// Comma-separated channel weights; prints each signature's value.
    #[arg(long, value_delimiter = ',')]
    pub zeta: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long)]
    pub signatures: Option<PathBuf>,
    /// Segment store whose segments and chords are carried over.
    #[arg(long)]
    pub segments: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    /// Path length in metres.
    #[arg(long, default_value_t = 1000.0)]
    pub length: f64,
    /// Angular frequency in rad/s.
    #[arg(long, default_value_t = 3.0e15)]
    pub omega: f64,
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    /// Amplitude of a sinusoidal strain along the path.
    #[arg(long, default_value_t = 0.0)]
    pub strain: f64,
    /// Wavenumber of the strain in rad/m.
    #[arg(long, default_value_t = 0.0)]
    pub strain_wavenumber: f64,
    /// Air temperature in kelvin.
    #[arg(long, default_value_t = 288.15)]
    pub temperature: f64,
    /// Total pressure in hPa.
    #[arg(long, default_value_t = 1013.25)]
    pub pressure: f64,
    /// Water vapour pressure in hPa.
    #[arg(long, default_value_t = 0.0)]
    pub vapor_pressure: f64,
    /// Length of the path that runs through air (defaults to the full path).
    #[arg(long)]
    pub air_length: Option<f64>,
    /// Standard deviation of the Earth noise term in rad.
    #[arg(long, default_value_t = 0.0)]
    pub earth_sigma: f64,
    /// Number of noise realisations.
    #[arg(long, default_value_t = 1)]
    pub shots: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct PosteriorArgs {
    /// Aggregate store (defaults to phi.store in the data directory).
    #[arg(long)]
    pub phi: Option<PathBuf>,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    /// Observation noise; defaults to the sample standard deviation.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, requires = "prior_sd")]
    pub prior_mean: Option<f64>,
    #[arg(long, requires = "prior_mean")]
    pub prior_sd: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub series: String,
    #[arg(long, default_value_t = 24)]
    pub lags: usize,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Leading share of the series used for training.
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code: 0 on success, 1 on a runtime error, 2 on a usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut io::stdout().lock(), &mut io::stderr().lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(argv) {
        Ok(config) => config,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(&config, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

pub fn execute(config: &CliConfig, out: &mut dyn Write) -> anyhow::Result<()> {
    let db = config.data_dir();
    match &config.command {
        Command::Ingest(args) => ingest(args, &db, config.seed, out),
        Command::Segment(args) => segment(args, &db, out),
        Command::Chords(args) => chords(args, &db, out),
        Command::Spectrogram(args) => spectrogram(args, &db, out),
        Command::Signature(args) => signature(args, &db, out),
        Command::Aggregate(args) => aggregate(args, &db, out),
        Command::Phase(args) => phase(args, config.seed, out),
        Command::CurvatureCheck(args) => curvature_check(args, out),
        Command::Posterior(args) => posterior(args, &db, out),
        Command::Predict(args) => predict(args, &db, out),
    }
}

fn or_default(path: &Option<PathBuf>, db: &Path, name: &str) -> PathBuf {
    path.clone().unwrap_or_else(|| db.join(name))
}

fn ensure_parent(path: &Path) -> anyhow::Result<()> {
    match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))
        }
        _ => Ok(()),
    }
}

fn write_output(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    ensure_parent(path)?;
    store::write_atomic(path, bytes)?;
    Ok(())
}

fn save<S: store::Persist>(value: &S, path: &Path) -> anyhow::Result<()> {
    ensure_parent(path)?;
    store::save_store(value, path)?;
    Ok(())
}

fn load<S: store::Persist>(path: &Path) -> anyhow::Result<S> {
    store::load_store(path).with_context(|| format!("loading {}", path.display()))
}

fn load_observations(db: &Path) -> anyhow::Result<BTreeMap<String, Vec<WeatherSample>>> {
    let path = db.join(OBSERVATIONS_FILE);
    let samples = store::read_samples(&path).with_context(|| format!("reading {}; run `lsat ingest` first", path.display()))?;
    Ok(store::group_by_city(samples)?)
}

fn load_series(db: &Path) -> anyhow::Result<Vec<TimeSeries>> {
    Ok(store::to_series(&load_observations(db)?)?)
}

fn find_series(db: &Path, city: &str) -> anyhow::Result<TimeSeries> {
    load_series(db)?
        .into_iter()
        .find(|s| s.id() == city)
        .ok_or_else(|| anyhow!("no series for city {city:?}"))
}

fn ingest(args: &IngestArgs, db: &Path, seed: u64, out: &mut dyn Write) -> anyhow::Result<()> {
    let cities = match (&args.input, args.synthetic) {
        (Some(input), _) if input.is_dir() => store::ingest_dir_samples(input)?,
        (Some(input), _) => store::group_by_city(store::read_samples(input)?)?,
        (None, Some(n)) => store::group_by_city(fixtures::synthesize(n, args.days, seed))?,
        (None, None) => bail!("nothing to ingest"),
    };
    let target = or_default(&args.out, db, "").join(OBSERVATIONS_FILE);
    let rows: Vec<WeatherSample> = cities.values().flatten().cloned().collect();
    let mut body = Vec::new();
    store::write_samples(&rows, &mut body)?;
    write_output(&target, &body)?;
    writeln!(out, "ingested {} series, {} samples -> {}", cities.len(), rows.len(), target.display())?;
    Ok(())
}

fn segment(args: &SegmentArgs, db: &Path, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut all = Vec::new();
    for series in load_series(db)? {
        let segs = segments::segment_series(&series, args.window, args.profile_len)
            .with_context(|| format!("segmenting {}", series.id()))?;
        all.extend(segs);
    }
    let target = or_default(&args.out, db, "segments.store");
    let count = all.len();
    save(&SegmentStore::new(all, Vec::new(), None)?, &target)?;
    writeln!(out, "{count} segments -> {}", target.display())?;
    Ok(())
}

/// Links chords within each series. Segments with a constant profile have no
/// defined correlation and take part in no chord.
pub fn link_within_series(
    segs: &[IsochronousSegment],
    threshold: f64,
    sub_window: usize,
) -> anyhow::Result<Vec<GraphChord>> {
    let mut chords = Vec::new();
    let mut start = 0;
    while start < segs.len() {
        let id = &segs[start].series_id;
        let end = start + segs[start..].iter().take_while(|s| &s.series_id == id).count();
        let usable: Vec<usize> = (start..end)
            .filter(|&i| segments::pearson(&segs[i].profile, &segs[i].profile).is_some())
            .collect();
        let subset: Vec<IsochronousSegment> = usable.iter().map(|&i| segs[i].clone()).collect();
        for mut chord in segments::link_chords(&subset, threshold)? {
            chord.a = usable[chord.a];
            chord.b = usable[chord.b];
            chord.amplitude = segments::chord_amplitude(&chord, segs, sub_window)?;
            chords.push(chord);
        }
        start = end;
    }
    Ok(chords)
}

fn chords(args: &ChordArgs, db: &Path, out: &mut dyn Write) -> anyhow::Result<()> {
    let source = or_default(&args.segments, db, "segments.store");
    let input: SegmentStore = load(&source)?;
    let segs = input.segments().to_vec();
    let chords = link_within_series(&segs, args.threshold, args.sub_window)?;

    if let Some(target) = args.predict {
        let prediction = segments::predict_alternative(target, &chords, &segs, args.epsilon)?;
        let weights: Vec<String> = prediction.weights.iter().map(|(i, w)| format!("{i}:{w}")).collect();
        writeln!(out, "weights {}", weights.join(" "))?;
        let profile: Vec<String> = prediction.profile.iter().map(f64::to_string).collect();
        writeln!(out, "profile {}", profile.join(" "))?;
    }

    let target = or_default(&args.out, db, "chords.store");
    let count = chords.len();
    save(&SegmentStore::new(segs, chords, input.aggregate().cloned())?, &target)?;
    writeln!(out, "{count} chords -> {}", target.display())?;
    Ok(())
}

fn spectrogram(args: &SpectrogramArgs, db: &Path, out: &mut dyn Write) -> anyhow::Result<()> {
    let series = find_series(db, &args.series)?;
    let spec = spectral::spectrogram(&series, args.window, args.hop, args.kind)?;
    let mut body = Vec::new();
    spec.write_csv(&mut body)?;
    write_output(&args.out, &body)?;
    writeln!(
        out,
        "{} frames x {} bins -> {}",
        spec.frame_count(),
        spec.bin_count(),
        args.out.display()
    )?;
    Ok(())
}

/// Signature samples of one city: intensity is irradiance, the trajectory
/// coordinate is the UTC hour of day and the channel is the index of the
/// equal-count sub-period of the record the sample falls in.
pub fn gamma_samples(rows: &[WeatherSample], channels: usize) -> Vec<GammaSample> {
    let n = rows.len();
    rows.iter()
        .enumerate()
        .map(|(k, s)| GammaSample {
            intensity: s.irradiance,
            trajectory: f64::from(s.timestamp.num_seconds_from_midnight()) / 3600.0,
            channel: k * channels / n,
        })
        .collect()
}

fn signature(args: &SignatureArgs, db: &Path, out: &mut dyn Write) -> anyhow::Result<()> {
    let dims = Dims::new(args.intensity_bins, args.trajectory_bins, args.channels)?;
    let zeta = args.zeta.clone().map(AdjustmentWeights::new).transpose()?;
    let mut theta = SignatureStore::new();
    for (city, rows) in load_observations(db)? {
        let tensor = signature::assemble_gamma(&gamma_samples(&rows, args.channels), dims)
            .with_context(|| format!("signature of {city}"))?;
        if let Some(zeta) = &zeta {
            writeln!(out, "{city} {}", signature::signature_value(&tensor, zeta, 1.0)?)?;
        }
        let record = SignatureRecord {
            city: city.clone(),
            start: rows[0].time(),
            end: rows[rows.len() - 1].time(),
            tensor,
        };
        theta.insert(city, record)?;
    }
    let target = or_default(&args.out, db, "signatures.store");
    save(&theta, &target)?;
    writeln!(out, "{} signatures -> {}", theta.len(), target.display())?;
    Ok(())
}

fn aggregate(args: &AggregateArgs, db: &Path, out: &mut dyn Write) -> anyhow::Result<()> {
    let theta: SignatureStore = load(&or_default(&args.signatures, db, "signatures.store"))?;
    let phi = signature::aggregate_phi(&theta.tensors())?;
    let (segs, chords) = match &args.segments {
        Some(path) => {
            let source: SegmentStore = load(path)?;
            (source.segments().to_vec(), source.chords().to_vec())
        }
        None => (Vec::new(), Vec::new()),
    };
    let target = or_default(&args.out, db, "phi.store");
    save(&SegmentStore::new(segs, chords, Some(phi.clone()))?, &target)?;
    writeln!(out, "aggregate of {} signatures -> {}", phi.count(), target.display())?;
    Ok(())
}

fn phase(args: &PhaseArgs, seed: u64, out: &mut dyn Write) -> anyhow::Result<()> {
    let c = tensors::PhysicalConstants::SPEED_OF_LIGHT;
    let (amplitude, k) = (args.strain, args.strain_wavenumber);
    let path = PhasePath::uniform(args.length, args.omega, args.samples, |s| amplitude * (k * s).sin())?;
    let space = propagation::phase_space(&path, c)?;
    let n = propagation::refractivity(args.temperature, args.pressure, args.vapor_pressure)?;
    let profile = AtmosphericProfile::constant(n, args.air_length.unwrap_or(args.length))?;
    let atmospheric = propagation::phase_atmospheric(args.omega, &profile, c)?;
    let earth = propagation::phase_earth_noise(seed, args.earth_sigma, args.shots)?;

    let mut body = String::from("shot,space,atmospheric,earth,total\n");
    for (shot, e) in earth.iter().enumerate() {
        let p = propagation::total_phase(space, atmospheric, *e)?;
        writeln!(body, "{shot},{},{},{},{}", p.space, p.atmospheric, p.earth, p.total)?;
    }
    match &args.out {
        Some(path) => {
            write_output(path, body.as_bytes())?;
            writeln!(out, "{} phase budgets -> {}", earth.len(), path.display())?;
        }
        None => out.write_all(body.as_bytes())?,
    }
    Ok(())
}

/// One row of the curvature suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

fn at_most(name: &'static str, value: f64, bound: f64) -> CheckRow {
    CheckRow { name, value, bound, pass: value <= bound }
}

/// Flat, FLRW (`a(t) = t` at `t = 2`) and plane-wave curvature residuals
/// plus the convergence of the discrete wave operator.
pub fn curvature_suite(step: f64) -> anyhow::Result<Vec<CheckRow>> {
    let origin = SpacetimePoint::origin();
    let flat = MetricField::flat();
    let flat_gamma = tensors::christoffel(&flat, &origin, step)?;
    let flat_gamma_max = flat_gamma.iter().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let flat_curv = tensors::curvature(&flat, &origin, step)?;

    let t = 2.0;
    let flrw = MetricField::flrw(|t| t);
    let p = SpacetimePoint::new(t, 0.3, -0.2, 0.1)?;
    let curv = tensors::curvature(&flrw, &p, step)?;
    let r_exact = 6.0 / (t * t);
    let g_exact = 3.0 / (t * t);
    let r_err = |h: f64| -> anyhow::Result<f64> { Ok((tensors::curvature(&flrw, &p, h)?.scalar - r_exact).abs()) };
    let order = (r_err(4.0 * step)? / r_err(2.0 * step)?).log2();

    let wave = MetricField::plane_wave(1e-5, 0.0, 1.0, 1.0)?;
    let wave_curv = tensors::curvature(&wave, &SpacetimePoint::new(0.4, 0.0, 0.0, 0.7)?, step)?;

    let (c, omega) = (2.0, 3.0);
    let strain = move |t: f64, z: f64| (omega * (t - z / c)).sin();
    let mut residuals = Vec::new();
    for k in 0..4 {
        residuals.push(tensors::wave_residual(strain, 0.3, 0.2, 1e-2 / f64::powi(2.0, k), c)?.abs());
    }
    let worst_ratio = residuals.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min);

    Ok(vec![
        at_most("flat christoffel max", flat_gamma_max, 1e-8),
        at_most("flat ricci max", flat_curv.ricci.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())), 1e-8),
        at_most("flat einstein max", flat_curv.max_abs(), 1e-8),
        at_most("flrw ricci scalar rel err", (curv.scalar - r_exact).abs() / r_exact, 1e-4),
        at_most("flrw einstein tt rel err", (curv.einstein[0][0] - g_exact).abs() / g_exact, 1e-4),
        CheckRow { name: "flrw convergence order", value: order, bound: 0.3, pass: (order - 2.0).abs() <= 0.3 },
        at_most("plane wave einstein max", wave_curv.einstein.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())), 1e-8),
        CheckRow { name: "wave residual min ratio", value: worst_ratio, bound: 3.4, pass: worst_ratio >= 3.4 },
    ])
}

fn curvature_check(args: &CurvatureArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let rows = curvature_suite(args.step)?;
    writeln!(out, "{:<28} {:>14} {:>10}  result", "check", "value", "bound")?;
    for row in &rows {
        let verdict = if row.pass { "PASS" } else { "FAIL" };
        writeln!(out, "{:<28} {:>14.6e} {:>10.1e}  {verdict}", row.name, row.value, row.bound)?;
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        bail!("{failed} curvature check(s) failed");
    }
    Ok(())
}

fn posterior(args: &PosteriorArgs, db: &Path, out: &mut dyn Write) -> anyhow::Result<()> {
    let phi: SegmentStore = load(&or_default(&args.phi, db, "phi.store"))?;
    let aggregate = phi.aggregate().filter(|a| a.count() > 0).ok_or_else(|| anyhow!("store has no aggregate signature"))?;
    let scale = aggregate.count() as f64;
    let data: Vec<f64> = aggregate.values().iter().map(|v| v / scale).collect();

    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let sd = (data.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
    let sigma = args.sigma.unwrap_or(if sd > 0.0 { sd } else { 1.0 });
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
    let grid = inference::linspace(lo, hi, args.points);

    let prior = match (args.prior_mean, args.prior_sd) {
        (Some(m), Some(s)) => PosteriorGrid::gaussian(grid.clone(), m, s)?,
        _ => PosteriorGrid::uniform(grid.clone())?,
    };
    let likelihood = inference::gaussian_likelihood(&grid, &ObservationBatch::new(data)?, sigma)?;
    let post = inference::grid_posterior(&prior, &likelihood)?;

    let mut body = String::from("parameter,prior,likelihood,posterior\n");
    for i in 0..post.len() {
        writeln!(
            body,
            "{},{},{},{}",
            post.parameters()[i],
            post.prior()[i],
            post.likelihood()[i],
            post.posterior()[i]
        )?;
    }
    let target = or_default(&args.out, db, "posterior.csv");
    write_output(&target, body.as_bytes())?;
    writeln!(
        out,
        "posterior mean {} variance {} map {} -> {}",
        post.mean(),
        post.variance(),
        post.parameters()[post.argmax()],
        target.display()
    )?;
    Ok(())
}

/// Rows of `lags` consecutive values and the value that follows each row.
pub fn lagged(values: &[f64], lags: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    (lags..values.len())
        .map(|i| (values[i - lags..i].to_vec(), values[i]))
        .unzip()
}

fn predict(args: &PredictArgs, db: &Path, out: &mut dyn Write) -> anyhow::Result<()> {
    if !(args.train_fraction > 0.0 && args.train_fraction < 1.0) {
        bail!("--train-fraction must lie strictly between 0 and 1");
    }
    if args.lags == 0 {
        bail!("--lags must be positive");
    }
    let observations = load_observations(db)?;
    let rows = observations
        .get(&args.series)
        .ok_or_else(|| anyhow!("no series for city {:?}", args.series))?;
    let values: Vec<f64> = rows.iter().map(|s| s.irradiance).collect();
    let (features, targets) = lagged(&values, args.lags);
    let split = (features.len() as f64 * args.train_fraction).round() as usize;
    if split == 0 || split >= features.len() {
        bail!("series of {} samples is too short for {} lags", values.len(), args.lags);
    }
    let model = inference::fit_baseline(&features[..split], &targets[..split], args.lambda)?;

    let mut body = String::from("timestamp,observed,predicted\n");
    let mut squared = 0.0;
    for (k, (x, y)) in features.iter().zip(&targets).enumerate().skip(split) {
        let fit = inference::predict_baseline(&model, x)?;
        squared += (fit - y).powi(2);
        writeln!(body, "{},{y},{fit}", store::format_timestamp(&rows[k + args.lags].timestamp))?;
    }
    let tested = features.len() - split;
    let target = or_default(&args.out, db, &format!("predictions-{}.csv", args.series));
    write_output(&target, body.as_bytes())?;
    writeln!(
        out,
        "trained on {split} rows, rmse {} over {tested} held-out rows -> {}",
        (squared / tested as f64).sqrt(),
        target.display()
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(std::iter::once("lsat").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn help_and_usage_errors() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("curvature-check"));
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["ingest"]).0, 2);
        assert_eq!(call(&["spectrogram", "--series", "x"]).0, 2);
    }

    #[test]
    fn curvature_suite_passes() {
        let (code, out, _) = call(&["curvature-check"]);
        assert_eq!(code, 0, "{out}");
        assert_eq!(out.matches("PASS").count(), 8);
    }

    #[test]
    fn phase_table_on_stdout() {
        let (code, out, _) = call(&["phase", "--earth-sigma", "0.1", "--shots", "3", "--seed", "9"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "shot,space,atmospheric,earth,total");
        assert_eq!(out, call(&["phase", "--earth-sigma", "0.1", "--shots", "3", "--seed", "9"]).1);
    }

    #[test]
    fn runtime_errors_exit_one() {
        let dir = tempfile::tempdir().unwrap();
        let db = dir.path().to_str().unwrap();
        let (code, _, err) = call(&["--data-dir", db, "segment"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error:"));
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn lagged_rows() {
        let (x, y) = lagged(&[1.0, 2.0, 3.0, 4.0], 2);
        assert_eq!(x, vec![vec![1.0, 2.0], vec![2.0, 3.0]]);
        assert_eq!(y, vec![3.0, 4.0]);
    }

    #[test]
    fn gamma_channels_cover_record() {
        let rows = fixtures::synthesize_city(0, 2, 1);
        let samples = gamma_samples(&rows, 4);
        assert_eq!(samples[0].channel, 0);
        assert_eq!(samples[47].channel, 3);
        assert_eq!(samples[13].trajectory, 13.0);
    }
}
