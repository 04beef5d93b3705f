//! Isochronous segmentation, graph chords and alternative-profile prediction.
//!
//! A series is cut into equal-duration windows, each resampled to a fixed
//! profile length. Two segments are joined by a chord when the Pearson
//! correlation of their profiles reaches a threshold. A chord's vibrational
//! amplitude is the windowed RMS of the difference of the two z-normalised
//! profiles.

use thiserror::Error;

/// Default number of resampled points per segment profile.
pub const DEFAULT_PROFILE_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SegmentError {
    #[error("series is empty")]
    EmptySeries,
    #[error("series `{id}`: timestamps not strictly increasing at point {index}")]
    NonMonotonic { id: String, index: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("window {window} s must be positive and finite")]
    BadWindow { window: f64 },
    #[error("window {window} s does not fit in the {span} s covered by the series")]
    WindowTooLarge { window: f64, span: f64 },
    #[error("profile length must be at least 2, got {0}")]
    BadProfileLen(usize),
    #[error("segment {0} has a zero-variance profile")]
    DegenerateProfile(usize),
    #[error("threshold {0} outside [-1, 1]")]
    InvalidThreshold(f64),
    #[error("profile lengths differ: segment {index} has {found}, expected {expected}")]
    ProfileLengthMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("sub-window {sub_window} does not divide the profile length {profile_len}")]
    BadSubWindow { sub_window: usize, profile_len: usize },
    #[error("segment reference {index} out of range ({len} segments)")]
    BadReference { index: usize, len: usize },
    #[error("segment {0} participates in no chord")]
    NoChords(usize),
    #[error("chord ({a}, {b}) has no measured amplitude")]
    UnmeasuredChord { a: usize, b: usize },
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
}

pub type Result<T> = std::result::Result<T, SegmentError>;

/// A named intensity series with strictly increasing timestamps (seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    id: String,
    points: Vec<(f64, f64)>,
}

impl TimeSeries {
    pub fn new(id: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        let id = id.into();
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(SegmentError::NonFinite("series points"));
        }
        if let Some(i) = points.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(SegmentError::NonMonotonic { id, index: i + 1 });
        }
        Ok(Self { id, points })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// Time covered from the first to the last sample.
    pub fn span(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => b.0 - a.0,
            _ => 0.0,
        }
    }

    /// Piecewise-linear value at `t`, held constant outside the sampled range.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        let (first, last) = (self.points.first()?, self.points.last()?);
        if t <= first.0 {
            return Some(first.1);
        }
        if t >= last.0 {
            return Some(last.1);
        }
        let right = self.points.partition_point(|p| p.0 <= t);
        let (t0, v0) = self.points[right - 1];
        let (t1, v1) = self.points[right];
        Some(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsochronousSegment {
    pub series_id: String,
    pub index: usize,
    pub start: f64,
    pub duration: f64,
    pub profile: Vec<f64>,
}

/// A similarity link between segments `a < b`, referenced by their position
/// in the segment list the chord was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphChord {
    pub a: usize,
    pub b: usize,
    pub similarity: f64,
    pub amplitude: Vec<f64>,
}

impl GraphChord {
    pub fn mean_amplitude(&self) -> Option<f64> {
        if self.amplitude.is_empty() {
            None
        } else {
            Some(self.amplitude.iter().sum::<f64>() / self.amplitude.len() as f64)
        }
    }

    /// The other endpoint, if `segment` is one of the two.
    pub fn partner_of(&self, segment: usize) -> Option<usize> {
        if self.a == segment {
            Some(self.b)
        } else if self.b == segment {
            Some(self.a)
        } else {
            None
        }
    }
}

/// Result of [`predict_alternative`]: the predicted profile and the
/// normalised weight given to each chord partner.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub profile: Vec<f64>,
    pub weights: Vec<(usize, f64)>,
}

/// Cuts `series` into consecutive `window`-second segments starting at the
/// first timestamp. A trailing partial window is dropped. Each profile holds
/// `profile_len` linearly interpolated values at `start + window·j/profile_len`.
pub fn segment_series(
    series: &TimeSeries,
    window: f64,
    profile_len: usize,
) -> Result<Vec<IsochronousSegment>> {
    if series.is_empty() {
        return Err(SegmentError::EmptySeries);
    }
    if !(window > 0.0 && window.is_finite()) {
        return Err(SegmentError::BadWindow { window });
    }
    if profile_len < 2 {
        return Err(SegmentError::BadProfileLen(profile_len));
    }
    let span = series.span();
    // tolerate the last ulp or so of span/window falling short of an integer
    let count = (span / window * (1.0 + 1e-12)).floor() as usize;
    if count == 0 {
        return Err(SegmentError::WindowTooLarge { window, span });
    }

    let origin = series.points[0].0;
    let step = window / profile_len as f64;
    Ok((0..count)
        .map(|index| {
            let start = origin + index as f64 * window;
            let profile = (0..profile_len)
                .map(|j| {
                    series
                        .interpolate(start + j as f64 * step)
                        .expect("series is nonempty")
                })
                .collect();
            IsochronousSegment {
                series_id: series.id.clone(),
                index,
                start,
                duration: window,
                profile,
            }
        })
        .collect())
}

/// Pearson correlation; `None` when either input has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let (ca, sa) = centred(a)?;
    let (cb, sb) = centred(b)?;
    Some(correlate(&ca, sa, &cb, sb))
}

/// One chord per unordered pair whose profile correlation is at least
/// `threshold`, ordered lexicographically by `(a, b)`.
pub fn link_chords(segments: &[IsochronousSegment], threshold: f64) -> Result<Vec<GraphChord>> {
    if !(-1.0..=1.0).contains(&threshold) {
        return Err(SegmentError::InvalidThreshold(threshold));
    }
    check_profile_lengths(segments)?;
    let centred: Vec<(Vec<f64>, f64)> = segments
        .iter()
        .enumerate()
        .map(|(i, s)| centred(&s.profile).ok_or(SegmentError::DegenerateProfile(i)))
        .collect::<Result<_>>()?;

    let mut chords = Vec::new();
    for (a, (ca, sa)) in centred.iter().enumerate() {
        for (b, (cb, sb)) in centred.iter().enumerate().skip(a + 1) {
            let similarity = correlate(ca, *sa, cb, *sb);
            if similarity >= threshold {
                chords.push(GraphChord {
                    a,
                    b,
                    similarity,
                    amplitude: Vec::new(),
                });
            }
        }
    }
    Ok(chords)
}

/// RMS of `z(a) − z(b)` over consecutive sub-windows of `sub_window` samples.
pub fn chord_amplitude(
    chord: &GraphChord,
    segments: &[IsochronousSegment],
    sub_window: usize,
) -> Result<Vec<f64>> {
    let a = &lookup(segments, chord.a)?.profile;
    let b = &lookup(segments, chord.b)?.profile;
    if a.len() != b.len() {
        return Err(SegmentError::ProfileLengthMismatch {
            index: chord.b,
            expected: a.len(),
            found: b.len(),
        });
    }
    profile_amplitude(a, b, sub_window).map_err(|e| match e {
        SegmentError::DegenerateProfile(0) => SegmentError::DegenerateProfile(chord.a),
        SegmentError::DegenerateProfile(_) => SegmentError::DegenerateProfile(chord.b),
        other => other,
    })
}

/// Vibrational amplitude of two raw profiles.
pub fn profile_amplitude(a: &[f64], b: &[f64], sub_window: usize) -> Result<Vec<f64>> {
    if sub_window == 0 || !a.len().is_multiple_of(sub_window) {
        return Err(SegmentError::BadSubWindow {
            sub_window,
            profile_len: a.len(),
        });
    }
    let za = z_normalise(a).ok_or(SegmentError::DegenerateProfile(0))?;
    let zb = z_normalise(b).ok_or(SegmentError::DegenerateProfile(1))?;
    let difference: Vec<f64> = za.iter().zip(&zb).map(|(x, y)| x - y).collect();
    Ok(difference
        .chunks_exact(sub_window)
        .map(|w| (w.iter().map(|d| d * d).sum::<f64>() / sub_window as f64).sqrt())
        .collect())
}

/// Fills in the amplitude of every chord.
pub fn measure_chords(
    chords: &mut [GraphChord],
    segments: &[IsochronousSegment],
    sub_window: usize,
) -> Result<()> {
    for chord in chords.iter_mut() {
        chord.amplitude = chord_amplitude(chord, segments, sub_window)?;
    }
    Ok(())
}

/// Weighted mean of the profiles of `target`'s chord partners, each weighted
/// by `1 / (epsilon + mean amplitude)` and normalised to sum to 1.
pub fn predict_alternative(
    target: usize,
    chords: &[GraphChord],
    segments: &[IsochronousSegment],
    epsilon: f64,
) -> Result<Prediction> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(SegmentError::BadEpsilon(epsilon));
    }
    let profile_len = lookup(segments, target)?.profile.len();

    let mut raw = Vec::new();
    for chord in chords {
        let Some(partner) = chord.partner_of(target) else {
            continue;
        };
        let amplitude = chord.mean_amplitude().ok_or(SegmentError::UnmeasuredChord {
            a: chord.a,
            b: chord.b,
        })?;
        let found = lookup(segments, partner)?.profile.len();
        if found != profile_len {
            return Err(SegmentError::ProfileLengthMismatch {
                index: partner,
                expected: profile_len,
                found,
            });
        }
        raw.push((partner, 1.0 / (epsilon + amplitude)));
    }
    if raw.is_empty() {
        return Err(SegmentError::NoChords(target));
    }

    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    let weights: Vec<(usize, f64)> = raw.into_iter().map(|(p, w)| (p, w / total)).collect();
    let profile = (0..profile_len)
        .map(|j| {
            let mut value = 0.0;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &(partner, w) in &weights {
                let v = segments[partner].profile[j];
                value += w * v;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            value.clamp(lo, hi)
        })
        .collect();
    Ok(Prediction { profile, weights })
}

fn lookup(segments: &[IsochronousSegment], index: usize) -> Result<&IsochronousSegment> {
    segments.get(index).ok_or(SegmentError::BadReference {
        index,
        len: segments.len(),
    })
}

fn check_profile_lengths(segments: &[IsochronousSegment]) -> Result<()> {
    let Some(first) = segments.first() else {
        return Ok(());
    };
    let expected = first.profile.len();
    match segments.iter().position(|s| s.profile.len() != expected) {
        Some(index) => Err(SegmentError::ProfileLengthMismatch {
            index,
            expected,
            found: segments[index].profile.len(),
        }),
        None => Ok(()),
    }
}

/// Mean-removed copy and its sum of squares; `None` for zero variance.
fn centred(x: &[f64]) -> Option<(Vec<f64>, f64)> {
    if x.is_empty() {
        return None;
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let ss: f64 = c.iter().map(|v| v * v).sum();
    (ss > 0.0 && ss.is_finite()).then_some((c, ss))
}

fn correlate(ca: &[f64], sa: f64, cb: &[f64], sb: f64) -> f64 {
    let cov: f64 = ca.iter().zip(cb).map(|(x, y)| x * y).sum();
    (cov / (sa * sb).sqrt()).clamp(-1.0, 1.0)
}

fn z_normalise(x: &[f64]) -> Option<Vec<f64>> {
    let (c, ss) = centred(x)?;
    let sd = (ss / x.len() as f64).sqrt();
    Some(c.into_iter().map(|v| v / sd).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform_series(seconds: usize) -> TimeSeries {
        let points = (0..=seconds).map(|t| (t as f64, (t as f64 * 0.1).sin())).collect();
        TimeSeries::new("city", points).unwrap()
    }

    fn segment(profile: Vec<f64>) -> IsochronousSegment {
        IsochronousSegment {
            series_id: "s".into(),
            index: 0,
            start: 0.0,
            duration: 1.0,
            profile,
        }
    }

    #[test]
    fn segment_counts() {
        assert_eq!(segment_series(&uniform_series(600), 60.0, 64).unwrap().len(), 10);
        assert_eq!(segment_series(&uniform_series(599), 60.0, 64).unwrap().len(), 9);
        let fractional = TimeSeries::new("f", (0..=3).map(|i| (i as f64 * 0.1, i as f64)).collect()).unwrap();
        assert_eq!(segment_series(&fractional, 0.1, 4).unwrap().len(), 3);
    }

    #[test]
    fn segments_tile_the_series() {
        let segs = segment_series(&uniform_series(600), 60.0, 16).unwrap();
        for (k, s) in segs.iter().enumerate() {
            assert_eq!(s.index, k);
            assert_eq!(s.start, 60.0 * k as f64);
            assert_eq!(s.duration, 60.0);
            assert_eq!(s.profile.len(), 16);
        }
        for w in segs.windows(2) {
            assert_eq!(w[0].start + w[0].duration, w[1].start);
        }
    }

    #[test]
    fn segment_profile_interpolates() {
        let series = TimeSeries::new("lin", vec![(10.0, 0.0), (20.0, 10.0)]).unwrap();
        let segs = segment_series(&series, 10.0, 4).unwrap();
        assert_eq!(segs[0].profile, vec![0.0, 2.5, 5.0, 7.5]);
    }

    #[test]
    fn segment_errors() {
        let empty = TimeSeries::new("e", vec![]).unwrap();
        assert_eq!(segment_series(&empty, 1.0, 8), Err(SegmentError::EmptySeries));
        assert!(matches!(
            segment_series(&uniform_series(59), 60.0, 8),
            Err(SegmentError::WindowTooLarge { .. })
        ));
        assert!(matches!(segment_series(&uniform_series(10), 0.0, 8), Err(SegmentError::BadWindow { .. })));
        assert!(matches!(
            TimeSeries::new("x", vec![(0.0, 1.0), (0.0, 2.0)]),
            Err(SegmentError::NonMonotonic { index: 1, .. })
        ));
    }

    #[test]
    fn identical_segments_chord_at_full_threshold() {
        let p: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin() * 3.0 + 0.1).collect();
        let chords = link_chords(&[segment(p.clone()), segment(p)], 1.0).unwrap();
        assert_eq!(chords.len(), 1);
        assert_eq!(chords[0].similarity, 1.0);
        assert_eq!((chords[0].a, chords[0].b), (0, 1));
    }

    #[test]
    fn anti_correlated_segments_do_not_chord() {
        let p: Vec<f64> = (0..64).map(|i| (i as f64).cos()).collect();
        let q: Vec<f64> = p.iter().map(|v| -v).collect();
        assert!(link_chords(&[segment(p), segment(q)], 0.5).unwrap().is_empty());
    }

    #[test]
    fn chord_errors() {
        let flat = segment(vec![2.0; 8]);
        let ok = segment((0..8).map(|i| i as f64).collect());
        assert_eq!(
            link_chords(&[ok.clone(), flat], 0.0),
            Err(SegmentError::DegenerateProfile(1))
        );
        assert_eq!(link_chords(std::slice::from_ref(&ok), 1.5), Err(SegmentError::InvalidThreshold(1.5)));
        assert!(matches!(
            link_chords(&[ok, segment(vec![1.0, 2.0])], 0.0),
            Err(SegmentError::ProfileLengthMismatch { index: 1, .. })
        ));
    }

    fn z_oracle(x: &[f64]) -> Vec<f64> {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        x.iter().map(|v| (v - mean) / sd).collect()
    }

    #[test]
    fn chords_match_all_pairs_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base: Vec<f64> = (0..64).map(|i| (i as f64 * 0.2).sin()).collect();
        let segs: Vec<_> = (0..12)
            .map(|_| {
                let noise = rng.random_range(0.05..1.5);
                segment(base.iter().map(|v| v + noise * rng.random_range(-1.0..1.0)).collect())
            })
            .collect();
        let chords = link_chords(&segs, 0.8).unwrap();

        let mut expected = Vec::new();
        for a in 0..12 {
            for b in 0..12 {
                if a < b {
                    let (za, zb) = (z_oracle(&segs[a].profile), z_oracle(&segs[b].profile));
                    let r = za.iter().zip(&zb).map(|(x, y)| x * y).sum::<f64>() / 64.0;
                    if r >= 0.8 {
                        expected.push((a, b, r));
                    }
                }
            }
        }
        assert!(!expected.is_empty() && expected.len() < 66);
        assert_eq!(chords.len(), expected.len());
        for (c, (a, b, r)) in chords.iter().zip(&expected) {
            assert_eq!((c.a, c.b), (*a, *b));
            assert!((c.similarity - r).abs() < 1e-12);
        }
    }

    #[test]
    fn amplitude_of_identical_profiles_is_zero() {
        let p: Vec<f64> = (0..16).map(|i| (i * i) as f64).collect();
        let amp = profile_amplitude(&p, &p, 4).unwrap();
        assert_eq!(amp, vec![0.0; 4]);
    }

    #[test]
    fn amplitude_of_opposite_profiles() {
        let p = vec![1.0, -1.0, 3.0, -3.0, 2.0, 0.0, -2.0, 0.0];
        let neg: Vec<f64> = p.iter().map(|v| -v).collect();
        let full = profile_amplitude(&p, &neg, 8).unwrap();
        assert_eq!(full.len(), 1);
        assert!((full[0] - 2.0).abs() < 1e-12);

        // per sub-window: 2·RMS of the z-normalised profile over that window
        let z = z_oracle(&p);
        let halves = profile_amplitude(&p, &neg, 4).unwrap();
        for (w, amp) in halves.iter().enumerate() {
            let rms = (z[4 * w..4 * w + 4].iter().map(|v| v * v).sum::<f64>() / 4.0).sqrt();
            assert!((amp - 2.0 * rms).abs() < 1e-12);
        }
    }

    #[test]
    fn amplitude_errors() {
        let p = vec![1.0, 2.0, 3.0, 4.0];
        assert!(matches!(profile_amplitude(&p, &p, 3), Err(SegmentError::BadSubWindow { .. })));
        assert!(matches!(profile_amplitude(&p, &p, 0), Err(SegmentError::BadSubWindow { .. })));
        let segs = vec![segment(p.clone()), segment(vec![1.0; 4])];
        let chord = GraphChord { a: 0, b: 1, similarity: 0.0, amplitude: vec![] };
        assert_eq!(chord_amplitude(&chord, &segs, 2), Err(SegmentError::DegenerateProfile(1)));
        let dangling = GraphChord { a: 0, b: 7, similarity: 0.0, amplitude: vec![] };
        assert!(matches!(chord_amplitude(&dangling, &segs, 2), Err(SegmentError::BadReference { index: 7, .. })));
    }

    fn chord(a: usize, b: usize, amplitude: Vec<f64>) -> GraphChord {
        GraphChord { a, b, similarity: 0.9, amplitude }
    }

    #[test]
    fn predict_single_partner_is_exact() {
        let segs = vec![segment(vec![1.0, 2.0, 3.0]), segment(vec![0.3, -0.7, 9.1])];
        let pred = predict_alternative(0, &[chord(0, 1, vec![0.4])], &segs, 1e-6).unwrap();
        assert_eq!(pred.profile, segs[1].profile);
        assert_eq!(pred.weights, vec![(1, 1.0)]);
    }

    #[test]
    fn predict_equal_amplitudes_is_mean() {
        let segs = vec![
            segment(vec![0.0, 0.0, 0.0]),
            segment(vec![1.0, 2.0, 3.0]),
            segment(vec![3.0, 0.0, -1.0]),
        ];
        let chords = [chord(0, 1, vec![0.5, 0.7]), chord(0, 2, vec![0.6, 0.6])];
        let pred = predict_alternative(0, &chords, &segs, 1e-3).unwrap();
        assert_eq!(pred.profile, vec![2.0, 1.0, 1.0]);
    }

    #[test]
    fn predict_errors() {
        let segs = vec![segment(vec![0.0, 1.0]), segment(vec![1.0, 0.0]), segment(vec![2.0, 3.0])];
        assert_eq!(
            predict_alternative(2, &[chord(0, 1, vec![1.0])], &segs, 1e-3),
            Err(SegmentError::NoChords(2))
        );
        assert_eq!(
            predict_alternative(0, &[chord(0, 1, vec![])], &segs, 1e-3),
            Err(SegmentError::UnmeasuredChord { a: 0, b: 1 })
        );
        assert_eq!(
            predict_alternative(0, &[chord(0, 1, vec![1.0])], &segs, 0.0),
            Err(SegmentError::BadEpsilon(0.0))
        );
    }

    proptest! {
        #[test]
        fn amplitude_is_affine_invariant(
            raw in proptest::collection::vec(-10.0f64..10.0, 16),
            other in proptest::collection::vec(-10.0f64..10.0, 16),
            alpha in 0.1f64..10.0,
            beta in -50.0f64..50.0,
        ) {
            prop_assume!(centred(&raw).is_some() && centred(&other).is_some());
            let scaled: Vec<f64> = raw.iter().map(|v| alpha * v + beta).collect();
            let a = profile_amplitude(&raw, &other, 4).unwrap();
            let b = profile_amplitude(&scaled, &other, 4).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn chord_relation_is_symmetric(
            profiles in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 8), 2..8),
            threshold in -1.0f64..1.0,
        ) {
            prop_assume!(profiles.iter().all(|p| centred(p).is_some()));
            let forward: Vec<_> = profiles.iter().cloned().map(segment).collect();
            let backward: Vec<_> = profiles.iter().rev().cloned().map(segment).collect();
            let n = profiles.len();
            let mut f: Vec<_> = link_chords(&forward, threshold).unwrap().into_iter().map(|c| (c.a, c.b)).collect();
            let mut r: Vec<_> = link_chords(&backward, threshold)
                .unwrap()
                .into_iter()
                .map(|c| { let (x, y) = (n - 1 - c.b, n - 1 - c.a); (x, y) })
                .collect();
            f.sort();
            r.sort();
            prop_assert!(f.iter().all(|(a, b)| a < b));
            prop_assert_eq!(f, r);
        }

        #[test]
        fn prediction_is_convex(
            profiles in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 6), 2..7),
            amps in proptest::collection::vec(0.0f64..3.0, 6),
        ) {
            let segs: Vec<_> = profiles.into_iter().map(segment).collect();
            let chords: Vec<_> = (1..segs.len()).map(|b| chord(0, b, vec![amps[b - 1]])).collect();
            let pred = predict_alternative(0, &chords, &segs, 1e-6).unwrap();
            let total: f64 = pred.weights.iter().map(|(_, w)| w).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(pred.weights.iter().all(|(_, w)| *w >= 0.0));
            for j in 0..6 {
                let lo = segs[1..].iter().map(|s| s.profile[j]).fold(f64::INFINITY, f64::min);
                let hi = segs[1..].iter().map(|s| s.profile[j]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(pred.profile[j] >= lo && pred.profile[j] <= hi);
            }
        }
    }
}
