//! Discrete Fourier transforms and short-time power spectrograms.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::segments::TimeSeries;

/// Lower clamp for spectrogram entries, in dB relative to the global maximum.
pub const DB_FLOOR: f64 = -300.0;

const SPACING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("series is not uniformly sampled (interval {index} deviates from {expected} s)")]
    NonUniformSampling { index: usize, expected: f64 },
    #[error("series of {len} samples is too short for a {window_length}-sample window")]
    TooShort { len: usize, window_length: usize },
    #[error("{0}")]
    BadParameter(String),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    Rectangular,
    #[default]
    Hann,
}

impl WindowKind {
    /// Window coefficients of length `n`. Hann is the symmetric form
    /// `0.5·(1 − cos(2πk/(n − 1)))`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            WindowKind::Rectangular => vec![1.0; n],
            WindowKind::Hann if n <= 1 => vec![1.0; n],
            WindowKind::Hann => {
                let denom = (n - 1) as f64;
                (0..n)
                    .map(|k| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / denom).cos()))
                    .collect()
            }
        }
    }
}

impl FromStr for WindowKind {
    type Err = SpectralError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rectangular" | "rect" => Ok(WindowKind::Rectangular),
            "hann" => Ok(WindowKind::Hann),
            other => Err(SpectralError::BadParameter(format!("unknown window `{other}`"))),
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowKind::Rectangular => "rectangular",
            WindowKind::Hann => "hann",
        })
    }
}

/// Frame-by-bin power in dB relative to the global maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    frames: Vec<Vec<f64>>,
    start_time: f64,
    frame_hop: f64,
    bin_width: f64,
    window_length: usize,
}

impl Spectrogram {
    /// Rows are frames, columns are one-sided frequency bins.
    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn bin_count(&self) -> usize {
        self.window_length / 2 + 1
    }

    /// Seconds between consecutive frame starts.
    pub fn frame_hop(&self) -> f64 {
        self.frame_hop
    }

    /// Hz per frequency bin.
    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn frame_times(&self) -> Vec<f64> {
        (0..self.frames.len())
            .map(|f| self.start_time + f as f64 * self.frame_hop)
            .collect()
    }

    pub fn bin_frequencies(&self) -> Vec<f64> {
        (0..self.bin_count()).map(|k| k as f64 * self.bin_width).collect()
    }

    /// CSV matrix dump: the first row holds bin frequencies (Hz) after an
    /// empty corner cell, each following row a frame start time (s) and its
    /// dB values. Axis values are written exactly; dB values carry 6
    /// significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut header = String::new();
        for f in self.bin_frequencies() {
            header.push(',');
            header.push_str(&f.to_string());
        }
        writeln!(out, "{header}")?;
        for (time, row) in self.frame_times().into_iter().zip(&self.frames) {
            let mut line = time.to_string();
            for v in row {
                line.push(',');
                line.push_str(&format_significant(*v, 6));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// `X[k] = Σ_n x[n]·exp(−2πi·kn/N)`, computed with an FFT.
pub fn dft(series: &[Complex64]) -> Vec<Complex64> {
    let mut buffer = series.to_vec();
    if !buffer.is_empty() {
        FftPlanner::new()
            .plan_fft_forward(buffer.len())
            .process(&mut buffer);
    }
    buffer
}

/// `floor((n − window_length)/hop) + 1`, or 0 when the window does not fit.
pub fn frame_count(n: usize, window_length: usize, hop: usize) -> usize {
    if window_length == 0 || hop == 0 || window_length > n {
        0
    } else {
        (n - window_length) / hop + 1
    }
}

/// Two-sided power `|X[k]|²` of each windowed frame.
pub fn power_frames(
    values: &[f64],
    window_length: usize,
    hop: usize,
    window: WindowKind,
) -> Result<Vec<Vec<f64>>> {
    check_parameters(values.len(), window_length, hop)?;
    let taper = window.coefficients(window_length);
    let fft = FftPlanner::new().plan_fft_forward(window_length);
    let mut buffer = vec![Complex64::new(0.0, 0.0); window_length];
    Ok((0..frame_count(values.len(), window_length, hop))
        .map(|f| {
            let frame = &values[f * hop..f * hop + window_length];
            for ((slot, x), w) in buffer.iter_mut().zip(frame).zip(&taper) {
                *slot = Complex64::new(x * w, 0.0);
            }
            fft.process(&mut buffer);
            buffer.iter().map(|c| c.norm_sqr()).collect()
        })
        .collect())
}

/// Short-time power spectrogram of a uniformly sampled series.
pub fn spectrogram(
    series: &TimeSeries,
    window_length: usize,
    hop: usize,
    window: WindowKind,
) -> Result<Spectrogram> {
    let points = series.points();
    if points.len() < 2 {
        return Err(SpectralError::TooShort {
            len: points.len(),
            window_length,
        });
    }
    check_parameters(points.len(), window_length, hop)?;
    let dt = points[1].0 - points[0].0;
    if let Some(index) = points
        .windows(2)
        .position(|w| ((w[1].0 - w[0].0) - dt).abs() > SPACING_TOLERANCE * dt)
    {
        return Err(SpectralError::NonUniformSampling { index, expected: dt });
    }

    let values: Vec<f64> = series.values().collect();
    let bins = window_length / 2 + 1;
    let power: Vec<Vec<f64>> = power_frames(&values, window_length, hop, window)?
        .into_iter()
        .map(|mut frame| {
            frame.truncate(bins);
            frame
        })
        .collect();

    let peak = power.iter().flatten().fold(0.0_f64, |m, p| m.max(*p));
    let frames = power
        .into_iter()
        .map(|frame| frame.into_iter().map(|p| to_db(p, peak)).collect())
        .collect();

    Ok(Spectrogram {
        frames,
        start_time: points[0].0,
        frame_hop: hop as f64 * dt,
        bin_width: 1.0 / (window_length as f64 * dt),
        window_length,
    })
}

fn to_db(power: f64, peak: f64) -> f64 {
    if peak <= 0.0 || power <= 0.0 {
        return DB_FLOOR;
    }
    (10.0 * (power / peak).log10()).clamp(DB_FLOOR, 0.0)
}

fn check_parameters(n: usize, window_length: usize, hop: usize) -> Result<()> {
    if window_length == 0 {
        return Err(SpectralError::BadParameter("window length must be at least 1".into()));
    }
    if hop == 0 {
        return Err(SpectralError::BadParameter("hop must be at least 1".into()));
    }
    if window_length > n {
        return Err(SpectralError::TooShort {
            len: n,
            window_length,
        });
    }
    Ok(())
}

/// Formats like C's `%.{digits}g`.
pub fn format_significant(value: f64, digits: usize) -> String {
    if value == 0.0 {
        return "0".into();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let precision = digits.max(1) - 1;
    let scientific = format!("{value:.precision$e}");
    let (mantissa, exponent) = scientific.split_once('e').expect("exponent marker");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if exponent < -4 || exponent >= digits as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exponent.abs())
    } else {
        let decimals = (precision as i32 - exponent).max(0) as usize;
        trim_fraction(&format!("{value:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
