//! Versioned line-delimited stores for signatures and segments, CSV ingestion
//! of weather observations, and the weather provider interface.
//!
//! A store file starts with `lsat-store v1 <kind>`; every following line is
//! one JSON record. Floats are written in shortest round-trip form, so a load
//! reproduces every value bit-for-bit.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segments::{GraphChord, IsochronousSegment, TimeSeries};
use crate::signature::{AggregateSignature, Dims, SignatureTensor};

pub const FORMAT_NAME: &str = "lsat-store";
pub const FORMAT_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 6] = [
    "city_id",
    "timestamp",
    "temperature_c",
    "pressure_hpa",
    "humidity_pct",
    "irradiance_wm2",
];
pub const DATA_DIR_ENV: &str = "LSAT_DATA_DIR";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("not a store file: {0:?}")]
    UnknownFormat(String),
    #[error("unsupported store version {found} (expected {FORMAT_VERSION})")]
    VersionMismatch { found: String },
    #[error("store holds {found}, expected {expected}")]
    KindMismatch { expected: &'static str, found: String },
    #[error("corrupt record {index}: {reason}")]
    CorruptRecord { index: usize, reason: String },
    #[error("duplicate signature id {0:?}")]
    DuplicateId(String),
    #[error("chord {index} references segment outside 0..{segments}")]
    DanglingChord { index: usize, segments: usize },
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("CSV header mismatch: expected column {column:?}")]
    SchemaError { column: &'static str },
    #[error("line {line}: {message}")]
    ParseError { line: u64, message: String },
    #[error("duplicate timestamp {timestamp} for city {city:?}")]
    DuplicateTimestamp { city: String, timestamp: String },
    #[error("unknown city {0:?}")]
    CityNotFound(String),
    #[error("no samples in the requested range")]
    RangeEmpty,
    #[error("provider request budget is zero")]
    NoRequestBudget,
}

pub type Result<T> = std::result::Result<T, StoreError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// `$LSAT_DATA_DIR`, or `./data` when unset.
pub fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"))
}

/// A signature tensor with the city and time range it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureRecord {
    pub city: String,
    pub start: f64,
    pub end: f64,
    pub tensor: SignatureTensor,
}

/// Trajectory signatures keyed by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SignatureStore {
    records: BTreeMap<String, SignatureRecord>,
}

impl SignatureStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, record: SignatureRecord) -> Result<()> {
        let id = id.into();
        if !(record.start.is_finite() && record.end.is_finite()) {
            return Err(StoreError::InvalidRecord(format!("{id}: non-finite time range")));
        }
        if self.records.contains_key(&id) {
            return Err(StoreError::DuplicateId(id));
        }
        self.records.insert(id, record);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&SignatureRecord> {
        self.records.get(id)
    }

    pub fn records(&self) -> &BTreeMap<String, SignatureRecord> {
        &self.records
    }

    pub fn tensors(&self) -> Vec<SignatureTensor> {
        self.records.values().map(|r| r.tensor.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn format_version(&self) -> u32 {
        FORMAT_VERSION
    }
}

/// Segments, the chords between them, and an optional aggregate signature.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SegmentStore {
    segments: Vec<IsochronousSegment>,
    chords: Vec<GraphChord>,
    aggregate: Option<AggregateSignature>,
}

impl SegmentStore {
    pub fn new(
        segments: Vec<IsochronousSegment>,
        chords: Vec<GraphChord>,
        aggregate: Option<AggregateSignature>,
    ) -> Result<Self> {
        let n = segments.len();
        if let Some(index) = chords.iter().position(|c| c.a >= c.b || c.b >= n) {
            return Err(StoreError::DanglingChord { index, segments: n });
        }
        Ok(Self {
            segments,
            chords,
            aggregate,
        })
    }

    pub fn segments(&self) -> &[IsochronousSegment] {
        &self.segments
    }

    pub fn chords(&self) -> &[GraphChord] {
        &self.chords
    }

    pub fn aggregate(&self) -> Option<&AggregateSignature> {
        self.aggregate.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty() && self.chords.is_empty() && self.aggregate.is_none()
    }

    pub fn format_version(&self) -> u32 {
        FORMAT_VERSION
    }
}

/// A store kind that can be written to and read from a store file.
pub trait Persist: Sized {
    const KIND: &'static str;

    fn write_records<W: Write>(&self, out: &mut W) -> io::Result<()>;

    fn from_records<I: Iterator<Item = (usize, String)>>(lines: I) -> Result<Self>;
}

#[derive(Serialize, Deserialize)]
struct SignatureLine {
    id: String,
    city: String,
    start: f64,
    end: f64,
    dims: [usize; 3],
    values: Vec<f64>,
    mask: String,
}

impl Persist for SignatureStore {
    const KIND: &'static str = "signatures";

    fn write_records<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for (id, record) in &self.records {
            let dims = record.tensor.dims();
            let line = SignatureLine {
                id: id.clone(),
                city: record.city.clone(),
                start: record.start,
                end: record.end,
                dims: [dims.intensity, dims.trajectory, dims.channels],
                values: record.tensor.values().to_vec(),
                mask: record.tensor.mask().iter().map(|&m| if m { '1' } else { '0' }).collect(),
            };
            serde_json::to_writer(&mut *out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    fn from_records<I: Iterator<Item = (usize, String)>>(lines: I) -> Result<Self> {
        let mut store = Self::new();
        for (index, text) in lines {
            let corrupt = |reason: String| StoreError::CorruptRecord { index, reason };
            let line: SignatureLine = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
            let dims = Dims::new(line.dims[0], line.dims[1], line.dims[2]).map_err(|e| corrupt(e.to_string()))?;
            let mask = line
                .mask
                .chars()
                .map(|c| match c {
                    '1' => Ok(true),
                    '0' => Ok(false),
                    other => Err(corrupt(format!("bad mask character {other:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            let tensor = SignatureTensor::from_parts(dims, line.values, mask).map_err(|e| corrupt(e.to_string()))?;
            let record = SignatureRecord {
                city: line.city,
                start: line.start,
                end: line.end,
                tensor,
            };
            store.insert(line.id, record).map_err(|e| corrupt(e.to_string()))?;
        }
        Ok(store)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum SegmentLine {
    Segment {
        series: String,
        index: usize,
        start: f64,
        duration: f64,
        profile: Vec<f64>,
    },
    Chord {
        a: usize,
        b: usize,
        similarity: f64,
        amplitude: Vec<f64>,
    },
    Aggregate {
        dims: Option<[usize; 3]>,
        count: usize,
        values: Vec<f64>,
    },
}

impl Persist for SegmentStore {
    const KIND: &'static str = "segments";

    fn write_records<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let segments = self.segments.iter().map(|s| SegmentLine::Segment {
            series: s.series_id.clone(),
            index: s.index,
            start: s.start,
            duration: s.duration,
            profile: s.profile.clone(),
        });
        let chords = self.chords.iter().map(|c| SegmentLine::Chord {
            a: c.a,
            b: c.b,
            similarity: c.similarity,
            amplitude: c.amplitude.clone(),
        });
        let aggregate = self.aggregate.iter().map(|g| SegmentLine::Aggregate {
            dims: g.dims().map(|d| [d.intensity, d.trajectory, d.channels]),
            count: g.count(),
            values: g.values().to_vec(),
        });
        for line in segments.chain(chords).chain(aggregate) {
            serde_json::to_writer(&mut *out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    fn from_records<I: Iterator<Item = (usize, String)>>(lines: I) -> Result<Self> {
        let mut segments = Vec::new();
        let mut chords = Vec::new();
        let mut aggregate = None;
        let mut chord_records = Vec::new();
        for (index, text) in lines {
            let corrupt = |reason: String| StoreError::CorruptRecord { index, reason };
            match serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))? {
                SegmentLine::Segment {
                    series,
                    index: position,
                    start,
                    duration,
                    profile,
                } => segments.push(IsochronousSegment {
                    series_id: series,
                    index: position,
                    start,
                    duration,
                    profile,
                }),
                SegmentLine::Chord {
                    a,
                    b,
                    similarity,
                    amplitude,
                } => {
                    chord_records.push(index);
                    chords.push(GraphChord {
                        a,
                        b,
                        similarity,
                        amplitude,
                    });
                }
                SegmentLine::Aggregate { dims, count, values } => {
                    if aggregate.is_some() {
                        return Err(corrupt("second aggregate record".into()));
                    }
                    let parsed = match dims {
                        None if count == 0 && values.is_empty() => AggregateSignature::empty(),
                        None => return Err(corrupt("aggregate without dims".into())),
                        Some([i, d, t]) => {
                            let dims = Dims::new(i, d, t).map_err(|e| corrupt(e.to_string()))?;
                            AggregateSignature::from_parts(dims, values, count).map_err(|e| corrupt(e.to_string()))?
                        }
                    };
                    aggregate = Some(parsed);
                }
            }
        }
        Self::new(segments, chords, aggregate).map_err(|e| match e {
            StoreError::DanglingChord { index, segments } => StoreError::CorruptRecord {
                index: chord_records[index],
                reason: format!("chord endpoint outside 0..{segments}"),
            },
            other => other,
        })
    }
}

/// Writes `store` to `path` under an exclusive advisory lock on
/// `<path>.lock`. The data goes to a sibling temporary file first and is
/// renamed into place, so readers never observe a partial store.
pub fn save_store<S: Persist>(store: &S, path: &Path) -> Result<()> {
    let lock_path = sidecar(path, "lock");
    let lock = OpenOptions::new()
        .create(true)
        .truncate(false)
        .write(true)
        .open(&lock_path)
        .map_err(io_err(&lock_path))?;
    lock.lock().map_err(io_err(&lock_path))?;

    let mut body = Vec::new();
    writeln!(body, "{FORMAT_NAME} v{FORMAT_VERSION} {}", S::KIND).map_err(io_err(path))?;
    store.write_records(&mut body).map_err(io_err(path))?;
    write_atomic(path, &body)
}

/// Reads a store written by [`save_store`].
pub fn load_store<S: Persist>(path: &Path) -> Result<S> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(line) => line.map_err(io_err(path))?,
        None => return Err(StoreError::UnknownFormat(String::new())),
    };
    check_header(&header, S::KIND)?;

    let mut records = Vec::new();
    for (index, line) in lines.enumerate() {
        let line = line.map_err(|e| StoreError::CorruptRecord {
            index,
            reason: e.to_string(),
        })?;
        if !line.is_empty() {
            records.push((index, line));
        }
    }
    S::from_records(records.into_iter())
}

fn check_header(header: &str, kind: &'static str) -> Result<()> {
    let fields: Vec<&str> = header.split(' ').collect();
    let [name, version, found] = fields[..] else {
        return Err(StoreError::UnknownFormat(header.to_string()));
    };
    if name != FORMAT_NAME || !version.starts_with('v') {
        return Err(StoreError::UnknownFormat(header.to_string()));
    }
    if version[1..].parse::<u32>() != Ok(FORMAT_VERSION) {
        return Err(StoreError::VersionMismatch {
            found: version[1..].to_string(),
        });
    }
    if found != kind {
        return Err(StoreError::KindMismatch {
            expected: kind,
            found: found.to_string(),
        });
    }
    Ok(())
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}

/// Replaces `path` with `bytes` via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = sidecar(path, &format!("tmp-{}", std::process::id()));
    let result = (|| {
        let mut out = BufWriter::new(File::create(&tmp)?);
        out.write_all(bytes)?;
        out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err(path))
}

/// One row of the weather CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSample {
    pub city_id: String,
    pub timestamp: DateTime<Utc>,
    pub temperature: f64,
    pub pressure: f64,
    pub humidity: f64,
    pub irradiance: f64,
}

impl WeatherSample {
    /// Seconds since the Unix epoch.
    pub fn time(&self) -> f64 {
        self.timestamp.timestamp() as f64 + f64::from(self.timestamp.timestamp_subsec_nanos()) * 1e-9
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(self.pressure > 0.0 && self.pressure.is_finite()) {
            return Err(format!("pressure must be positive, got {}", self.pressure));
        }
        if !(0.0..=100.0).contains(&self.humidity) {
            return Err(format!("humidity must lie in [0, 100], got {}", self.humidity));
        }
        if !(self.irradiance >= 0.0 && self.irradiance.is_finite()) {
            return Err(format!("irradiance must be non-negative, got {}", self.irradiance));
        }
        if !self.temperature.is_finite() {
            return Err("temperature is not finite".into());
        }
        Ok(())
    }
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Parses every row of a weather CSV, validating the header and each sample.
pub fn read_samples(path: &Path) -> Result<Vec<WeatherSample>> {
    let file = File::open(path).map_err(io_err(path))?;
    read_samples_from(file)
}

pub fn read_samples_from<R: io::Read>(input: R) -> Result<Vec<WeatherSample>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers().map_err(|e| StoreError::ParseError {
        line: 1,
        message: e.to_string(),
    })?;
    for (i, column) in CSV_HEADER.iter().enumerate() {
        if header.get(i) != Some(column) {
            return Err(StoreError::SchemaError { column });
        }
    }
    if header.len() != CSV_HEADER.len() {
        return Err(StoreError::ParseError {
            line: 1,
            message: format!("expected {} columns, found {}", CSV_HEADER.len(), header.len()),
        });
    }

    let mut samples = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| StoreError::ParseError {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let fail = |message: String| StoreError::ParseError { line, message };
        let number = |i: usize| -> Result<f64> {
            row[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| fail(format!("{}: {e}", CSV_HEADER[i])))
        };
        let timestamp = DateTime::parse_from_rfc3339(row[1].trim())
            .map_err(|e| fail(format!("timestamp: {e}")))?
            .with_timezone(&Utc);
        let sample = WeatherSample {
            city_id: row[0].trim().to_string(),
            timestamp,
            temperature: number(2)?,
            pressure: number(3)?,
            humidity: number(4)?,
            irradiance: number(5)?,
        };
        if sample.city_id.is_empty() {
            return Err(fail("empty city_id".into()));
        }
        sample.check().map_err(fail)?;
        samples.push(sample);
    }
    Ok(samples)
}

/// Groups samples by city (sorted by id), orders each city by timestamp and
/// rejects repeated timestamps.
pub fn group_by_city(samples: Vec<WeatherSample>) -> Result<BTreeMap<String, Vec<WeatherSample>>> {
    let mut cities: BTreeMap<String, Vec<WeatherSample>> = BTreeMap::new();
    for s in samples {
        cities.entry(s.city_id.clone()).or_default().push(s);
    }
    for (city, rows) in &mut cities {
        rows.sort_by_key(|s| s.timestamp);
        if let Some(w) = rows.windows(2).find(|w| w[0].timestamp == w[1].timestamp) {
            return Err(StoreError::DuplicateTimestamp {
                city: city.clone(),
                timestamp: format_timestamp(&w[0].timestamp),
            });
        }
    }
    Ok(cities)
}

/// Irradiance series per city, ordered by city id.
pub fn to_series(cities: &BTreeMap<String, Vec<WeatherSample>>) -> Result<Vec<TimeSeries>> {
    cities
        .iter()
        .map(|(city, rows)| {
            TimeSeries::new(city.clone(), rows.iter().map(|s| (s.time(), s.irradiance)).collect())
                .map_err(|e| StoreError::InvalidRecord(format!("{city}: {e}")))
        })
        .collect()
}

/// One irradiance series per city in the file.
pub fn ingest_csv(path: &Path) -> Result<Vec<TimeSeries>> {
    to_series(&group_by_city(read_samples(path)?)?)
}

/// Every `*.csv` file in `dir`, read in file-name order.
pub fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "csv") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Samples from every CSV in `dir`, grouped by city.
pub fn ingest_dir_samples(dir: &Path) -> Result<BTreeMap<String, Vec<WeatherSample>>> {
    let mut samples = Vec::new();
    for file in csv_files(dir)? {
        samples.extend(read_samples(&file)?);
    }
    group_by_city(samples)
}

pub fn ingest_dir(dir: &Path) -> Result<Vec<TimeSeries>> {
    to_series(&ingest_dir_samples(dir)?)
}

/// Writes samples in the ingestion CSV schema.
pub fn write_samples<W: Write>(samples: &[WeatherSample], out: W) -> io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for s in samples {
        writer.write_record([
            s.city_id.clone(),
            format_timestamp(&s.timestamp),
            s.temperature.to_string(),
            s.pressure.to_string(),
            s.humidity.to_string(),
            s.irradiance.to_string(),
        ])?;
    }
    writer.flush()
}

/// Inclusive time interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeRange {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl TimeRange {
    pub fn contains(&self, t: &DateTime<Utc>) -> bool {
        *t >= self.start && *t <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderConfig {
    pub root: PathBuf,
    pub max_requests: usize,
}

impl ProviderConfig {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            max_requests: 1,
        }
    }
}

/// A source of weather samples for a city and time range.
pub trait WeatherProvider {
    fn fetch(&self, city: &str, range: TimeRange) -> Result<Vec<WeatherSample>>;
}

/// Serves `<root>/<city>.csv` files; one file read per request.
#[derive(Debug, Clone)]
pub struct FileProvider {
    config: ProviderConfig,
}

impl FileProvider {
    pub fn new(config: ProviderConfig) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }
}

impl WeatherProvider for FileProvider {
    fn fetch(&self, city: &str, range: TimeRange) -> Result<Vec<WeatherSample>> {
        if self.config.max_requests == 0 {
            return Err(StoreError::NoRequestBudget);
        }
        let valid_name = !city.is_empty() && !city.contains(['/', '\\']) && city != "." && city != "..";
        let path = self.config.root.join(format!("{city}.csv"));
        if !valid_name || !path.is_file() {
            return Err(StoreError::CityNotFound(city.to_string()));
        }
        let mut rows = read_samples(&path)?;
        rows.retain(|s| s.city_id == city && range.contains(&s.timestamp));
        if rows.is_empty() {
            return Err(StoreError::RangeEmpty);
        }
        let mut cities = group_by_city(rows)?;
        Ok(cities.remove(city).unwrap_or_default())
    }
}
