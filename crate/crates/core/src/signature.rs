//! The discretised signature tensor Γ over intensity × trajectory × channel
//! cells, its weighted signature value, and dataset aggregation.
//!
//! All sums run in row-major order (intensity, then trajectory, then
//! channel), so results are bit-reproducible for a given input.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignatureError {
    #[error("no samples to assemble")]
    EmptyInput,
    #[error("channel {channel} out of range for {channels} channels")]
    BadChannel { channel: usize, channels: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("all tensor dimensions must be at least 1, got {0:?}")]
    ZeroDimension((usize, usize, usize)),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("unpopulated cell {0} holds a non-zero value")]
    GhostValue(usize),
}

pub type Result<T> = std::result::Result<T, SignatureError>;

/// Tensor shape: intensity bins × trajectory bins × adjustment channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dims {
    pub intensity: usize,
    pub trajectory: usize,
    pub channels: usize,
}

impl Dims {
    pub fn new(intensity: usize, trajectory: usize, channels: usize) -> Result<Self> {
        if intensity == 0 || trajectory == 0 || channels == 0 {
            return Err(SignatureError::ZeroDimension((intensity, trajectory, channels)));
        }
        Ok(Self {
            intensity,
            trajectory,
            channels,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.intensity * self.trajectory * self.channels
    }

    /// Row-major flat index of cell `(i, d, t)`.
    pub fn index(&self, i: usize, d: usize, t: usize) -> usize {
        (i * self.trajectory + d) * self.channels + t
    }

    fn describe(&self) -> String {
        format!("{}x{}x{}", self.intensity, self.trajectory, self.channels)
    }
}

/// The binned signature tensor Γ with a population mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureTensor {
    dims: Dims,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl SignatureTensor {
    /// Builds a tensor from flat row-major parts.
    pub fn from_parts(dims: Dims, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        let n = dims.cell_count();
        if values.len() != n || mask.len() != n {
            return Err(SignatureError::DimensionMismatch {
                expected: format!("{n} cells"),
                found: format!("{} values, {} mask entries", values.len(), mask.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SignatureError::NonFinite("tensor values"));
        }
        if let Some(cell) = (0..n).find(|&c| !mask[c] && values[c] != 0.0) {
            return Err(SignatureError::GhostValue(cell));
        }
        Ok(Self { dims, values, mask })
    }

    /// A fully populated tensor from flat row-major values.
    pub fn dense(dims: Dims, values: Vec<f64>) -> Result<Self> {
        let mask = vec![true; values.len()];
        Self::from_parts(dims, values, mask)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn get(&self, i: usize, d: usize, t: usize) -> f64 {
        self.values[self.dims.index(i, d, t)]
    }

    pub fn is_populated(&self, i: usize, d: usize, t: usize) -> bool {
        self.mask[self.dims.index(i, d, t)]
    }

    pub fn populated_cells(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }
}

/// One observation: an intensity at a trajectory coordinate, tagged with an
/// adjustment channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSample {
    pub intensity: f64,
    pub trajectory: f64,
    pub channel: usize,
}

/// Per-channel adjustment weights ζ.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjustmentWeights(Vec<f64>);

impl AdjustmentWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(SignatureError::NonFinite("adjustment weights"));
        }
        Ok(Self(weights))
    }

    pub fn uniform(channels: usize) -> Self {
        Self(vec![1.0; channels])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Elementwise sum of a collection of signature tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSignature {
    dims: Option<Dims>,
    values: Vec<f64>,
    count: usize,
}

impl AggregateSignature {
    /// The additive identity: no contributing tensors.
    pub fn empty() -> Self {
        Self {
            dims: None,
            values: Vec::new(),
            count: 0,
        }
    }

    pub fn from_parts(dims: Dims, values: Vec<f64>, count: usize) -> Result<Self> {
        if values.len() != dims.cell_count() {
            return Err(SignatureError::DimensionMismatch {
                expected: format!("{} cells", dims.cell_count()),
                found: format!("{} values", values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SignatureError::NonFinite("aggregate values"));
        }
        Ok(Self {
            dims: Some(dims),
            values,
            count,
        })
    }

    /// `None` for the empty aggregate.
    pub fn dims(&self) -> Option<Dims> {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Combines two aggregates over disjoint tensor sets.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        match (self.dims, other.dims) {
            (None, _) => Ok(other.clone()),
            (_, None) => Ok(self.clone()),
            (Some(a), Some(b)) if a != b => Err(SignatureError::DimensionMismatch {
                expected: a.describe(),
                found: b.describe(),
            }),
            (Some(dims), Some(_)) => Ok(Self {
                dims: Some(dims),
                values: self
                    .values
                    .iter()
                    .zip(&other.values)
                    .map(|(a, b)| a + b)
                    .collect(),
                count: self.count + other.count,
            }),
        }
    }
}

/// Bins samples into an `I × D × T` tensor.
///
/// Intensity and trajectory axes use equal-width bins over the observed
/// `[min, max]` of each axis (the maximum falls in the last bin). A cell holds
/// the mean intensity of its samples; empty cells hold 0 and are unmasked.
pub fn assemble_gamma(samples: &[GammaSample], dims: Dims) -> Result<SignatureTensor> {
    if samples.is_empty() {
        return Err(SignatureError::EmptyInput);
    }
    for s in samples {
        if !s.intensity.is_finite() || !s.trajectory.is_finite() {
            return Err(SignatureError::NonFinite("samples"));
        }
        if s.channel >= dims.channels {
            return Err(SignatureError::BadChannel {
                channel: s.channel,
                channels: dims.channels,
            });
        }
    }

    let (i_lo, i_hi) = extent(samples.iter().map(|s| s.intensity));
    let (d_lo, d_hi) = extent(samples.iter().map(|s| s.trajectory));

    let n = dims.cell_count();
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    let mut lows = vec![f64::INFINITY; n];
    let mut highs = vec![f64::NEG_INFINITY; n];
    for s in samples {
        let i = bin(s.intensity, i_lo, i_hi, dims.intensity);
        let d = bin(s.trajectory, d_lo, d_hi, dims.trajectory);
        let cell = dims.index(i, d, s.channel);
        sums[cell] += s.intensity;
        counts[cell] += 1;
        lows[cell] = lows[cell].min(s.intensity);
        highs[cell] = highs[cell].max(s.intensity);
    }

    let mut values = vec![0.0; n];
    let mut mask = vec![false; n];
    for cell in 0..n {
        if counts[cell] > 0 {
            // rounding in the mean must not leave the cell's own range
            values[cell] = (sums[cell] / counts[cell] as f64).clamp(lows[cell], highs[cell]);
            mask[cell] = true;
        }
    }
    SignatureTensor::from_parts(dims, values, mask)
}

/// `cell_measure · Σ_i Σ_d Σ_t Γ[i][d][t] · ζ[t]`.
pub fn signature_value(
    gamma: &SignatureTensor,
    zeta: &AdjustmentWeights,
    cell_measure: f64,
) -> Result<f64> {
    let channels = gamma.dims.channels;
    if zeta.len() != channels {
        return Err(SignatureError::DimensionMismatch {
            expected: format!("{channels} weights"),
            found: format!("{} weights", zeta.len()),
        });
    }
    let weights = zeta.as_slice();
    let total: f64 = gamma
        .values
        .chunks_exact(channels)
        .flat_map(|row| row.iter().zip(weights).map(|(v, w)| v * w))
        .sum();
    Ok(cell_measure * total)
}

/// Elementwise sum `Σ_j Γʲ`.
///
/// Each cell's contributions are summed in ascending value order, which makes
/// the result independent of the order of `tensors`.
pub fn aggregate_phi(tensors: &[SignatureTensor]) -> Result<AggregateSignature> {
    let Some(first) = tensors.first() else {
        return Ok(AggregateSignature::empty());
    };
    let dims = first.dims;
    if let Some(bad) = tensors.iter().find(|t| t.dims != dims) {
        return Err(SignatureError::DimensionMismatch {
            expected: dims.describe(),
            found: bad.dims.describe(),
        });
    }
    let mut column = Vec::with_capacity(tensors.len());
    let values = (0..dims.cell_count())
        .map(|cell| {
            column.clear();
            column.extend(tensors.iter().map(|t| t.values[cell]));
            column.sort_by(f64::total_cmp);
            column.iter().sum()
        })
        .collect();
    AggregateSignature::from_parts(dims, values, tensors.len())
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn bin(value: f64, lo: f64, hi: f64, bins: usize) -> usize {
    if hi <= lo {
        return 0;
    }
    let position = (value - lo) / (hi - lo) * bins as f64;
    (position.floor() as usize).min(bins - 1)
}
