//! Light phase accumulated along a path.
//!
//! The total phase shift is the sum of three domain terms: the spacetime
//! (strain) term integrated over the path, an atmospheric term from the
//! refractivity profile, and a zero-mean Earth-noise term.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagationError {
    #[error("invalid phase path: {0}")]
    BadPath(String),
    #[error("invalid atmospheric profile: {0}")]
    BadProfile(String),
    #[error("non-physical atmospheric state: {0}")]
    NonPhysical(String),
    #[error("non-finite phase term: {0}")]
    NonFinite(&'static str),
    #[error("noise standard deviation must be non-negative and finite, got {0}")]
    BadSigma(f64),
}

pub type Result<T> = std::result::Result<T, PropagationError>;

/// Samples of dimensionless strain along a path of length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePath {
    length: f64,
    omega0: f64,
    samples: Vec<(f64, f64)>,
}

impl PhasePath {
    /// `samples` are `(position, strain)` pairs; positions must run strictly
    /// increasing from exactly 0 to exactly `length`.
    pub fn new(length: f64, omega0: f64, samples: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |msg: String| Err(PropagationError::BadPath(msg));
        if !(length > 0.0 && length.is_finite()) {
            return bad(format!("length must be positive, got {length}"));
        }
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return bad(format!("omega0 must be positive, got {omega0}"));
        }
        if samples.len() < 2 {
            return bad(format!("need at least 2 samples, got {}", samples.len()));
        }
        if samples.iter().any(|(x, h)| !x.is_finite() || !h.is_finite()) {
            return bad("non-finite sample".into());
        }
        if samples[0].0 != 0.0 || samples[samples.len() - 1].0 != length {
            return bad("samples must start at 0 and end at the path length".into());
        }
        if let Some(i) = first_non_increasing(&samples) {
            return bad(format!("positions not strictly increasing at sample {i}"));
        }
        Ok(Self {
            length,
            omega0,
            samples,
        })
    }

    /// `n` uniformly spaced samples of `strain(x)` over `[0, length]`.
    pub fn uniform<F: Fn(f64) -> f64>(length: f64, omega0: f64, n: usize, strain: F) -> Result<Self> {
        if n < 2 {
            return Err(PropagationError::BadPath(format!(
                "need at least 2 samples, got {n}"
            )));
        }
        let last = (n - 1) as f64;
        let samples = (0..n)
            .map(|i| {
                // pin the endpoint exactly
                let x = if i == n - 1 { length } else { length * i as f64 / last };
                (x, strain(x))
            })
            .collect();
        Self::new(length, omega0, samples)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }
}

/// Refractivity samples `(position, N)` with `N = (n − 1)·10⁶`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtmosphericProfile {
    samples: Vec<(f64, f64)>,
}

impl AtmosphericProfile {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |msg: String| Err(PropagationError::BadProfile(msg));
        if samples.len() < 2 {
            return bad(format!("need at least 2 samples, got {}", samples.len()));
        }
        if samples.iter().any(|(x, n)| !x.is_finite() || !n.is_finite()) {
            return bad("non-finite sample".into());
        }
        if let Some((i, _)) = samples.iter().enumerate().find(|(_, (_, n))| *n < 0.0) {
            return bad(format!("negative refractivity at sample {i}"));
        }
        if let Some(i) = first_non_increasing(&samples) {
            return bad(format!("positions not strictly increasing at sample {i}"));
        }
        Ok(Self { samples })
    }

    /// Constant refractivity over `[0, length]`.
    pub fn constant(refractivity: f64, length: f64) -> Result<Self> {
        Self::new(vec![(0.0, refractivity), (length, refractivity)])
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShift {
    pub space: f64,
    pub atmospheric: f64,
    pub earth: f64,
    pub total: f64,
}

/// `(ω₀/c)·∫₀ᴸ (1 + h(x)) dx` by the composite trapezoid rule.
///
/// The unit part integrates to `L` exactly, so only the strain is passed
/// through the quadrature.
pub fn phase_space(path: &PhasePath, c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(PropagationError::BadPath(format!(
            "speed of light must be positive, got {c}"
        )));
    }
    let strain_integral = trapezoid(&path.samples);
    Ok(path.omega0 / c * (path.length + strain_integral))
}

/// Smith–Weintraub refractivity in N-units.
///
/// `temperature` in kelvin, `pressure` and `vapor_pressure` in hPa.
pub fn refractivity(temperature: f64, pressure: f64, vapor_pressure: f64) -> Result<f64> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(PropagationError::NonPhysical(format!(
            "temperature must be positive, got {temperature} K"
        )));
    }
    if !(pressure >= 0.0 && pressure.is_finite()) {
        return Err(PropagationError::NonPhysical(format!(
            "pressure must be non-negative, got {pressure} hPa"
        )));
    }
    if !(vapor_pressure >= 0.0 && vapor_pressure.is_finite()) {
        return Err(PropagationError::NonPhysical(format!(
            "vapor pressure must be non-negative, got {vapor_pressure} hPa"
        )));
    }
    Ok(77.6 * pressure / temperature - 5.6 * vapor_pressure / temperature
        + 3.75e5 * vapor_pressure / (temperature * temperature))
}

/// `(ω₀/c)·10⁻⁶·∫ N(x) dx`.
pub fn phase_atmospheric(omega0: f64, profile: &AtmosphericProfile, c: f64) -> Result<f64> {
    if !(omega0 > 0.0 && omega0.is_finite() && c > 0.0 && c.is_finite()) {
        return Err(PropagationError::BadProfile(format!(
            "omega0 and c must be positive, got {omega0} and {c}"
        )));
    }
    Ok(omega0 / c * 1e-6 * trapezoid(&profile.samples))
}

/// `n` zero-mean Gaussian draws with standard deviation `sigma`.
pub fn phase_earth_noise(seed: u64, sigma: f64, n: usize) -> Result<Vec<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(PropagationError::BadSigma(sigma));
    }
    if sigma == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let normal = Normal::new(0.0, sigma).map_err(|_| PropagationError::BadSigma(sigma))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| normal.sample(&mut rng)).collect())
}

/// Sums the domain terms as `space + atmospheric + earth`, in that order.
pub fn total_phase(space: f64, atmospheric: f64, earth: f64) -> Result<PhaseShift> {
    for (value, name) in [(space, "space"), (atmospheric, "atmospheric"), (earth, "earth")] {
        if !value.is_finite() {
            return Err(PropagationError::NonFinite(name));
        }
    }
    let total = space + atmospheric + earth;
    if !total.is_finite() {
        return Err(PropagationError::NonFinite("total"));
    }
    Ok(PhaseShift {
        space,
        atmospheric,
        earth,
        total,
    })
}

fn trapezoid(samples: &[(f64, f64)]) -> f64 {
    samples
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

fn first_non_increasing(samples: &[(f64, f64)]) -> Option<usize> {
    samples
        .windows(2)
        .position(|w| w[1].0 <= w[0].0)
        .map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const C: f64 = 2.997_924_58e8;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn space_phase_without_strain() {
        let path = PhasePath::uniform(1.0, C, 2, |_| 0.0).unwrap();
        assert_eq!(phase_space(&path, C).unwrap(), 1.0);
        let path = PhasePath::uniform(1.0, C, 1001, |_| 0.0).unwrap();
        assert_eq!(phase_space(&path, C).unwrap(), 1.0);
    }

    #[test]
    fn space_phase_constant_strain() {
        let path = PhasePath::uniform(1.0, C, 11, |_| 1e-6).unwrap();
        assert!(rel(phase_space(&path, C).unwrap(), 1.000001) < 1e-15);
    }

    #[test]
    fn space_phase_full_period_sine() {
        let path = PhasePath::uniform(1.0, C, 1001, |x| 1e-6 * (2.0 * PI * x).sin()).unwrap();
        assert!(rel(phase_space(&path, C).unwrap(), 1.0) < 1e-9);
    }

    #[test]
    fn trapezoid_is_second_order() {
        // ∫₀¹ 1e-3·x² dx = 1e-3/3
        let exact = 1.0 + 1e-3 / 3.0;
        let err = |n: usize| {
            let path = PhasePath::uniform(1.0, 1.0, n, |x| 1e-3 * x * x).unwrap();
            (phase_space(&path, 1.0).unwrap() - exact).abs()
        };
        let (e1, e2, e3) = (err(11), err(21), err(41));
        for ratio in [e1 / e2, e2 / e3] {
            assert!((ratio.log2() - 2.0).abs() < 0.05, "ratio {ratio}");
        }
    }

    #[test]
    fn bad_paths_rejected() {
        assert!(PhasePath::new(1.0, 1.0, vec![(0.0, 0.0)]).is_err());
        assert!(PhasePath::new(1.0, 1.0, vec![(0.1, 0.0), (1.0, 0.0)]).is_err());
        assert!(PhasePath::new(1.0, 1.0, vec![(0.0, 0.0), (0.5, 0.0), (0.5, 0.0), (1.0, 0.0)]).is_err());
        assert!(PhasePath::new(1.0, 0.0, vec![(0.0, 0.0), (1.0, 0.0)]).is_err());
        assert!(PhasePath::new(-1.0, 1.0, vec![(0.0, 0.0), (-1.0, 0.0)]).is_err());
        assert!(phase_space(&PhasePath::uniform(1.0, 1.0, 2, |_| 0.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn refractivity_examples() {
        // 77.6 · 1013.25 / 288.15 evaluated at 50 digits
        let n = refractivity(288.15, 1013.25, 0.0).unwrap();
        assert!((n - 272.872_462_259_24).abs() < 1e-9);
        assert_eq!(refractivity(250.0, 0.0, 0.0).unwrap(), 0.0);
        let base = refractivity(290.0, 500.0, 0.0).unwrap();
        assert_eq!(refractivity(290.0, 1000.0, 0.0).unwrap(), 2.0 * base);
        assert!(refractivity(0.0, 1000.0, 0.0).is_err());
        assert!(refractivity(280.0, -1.0, 0.0).is_err());
        assert!(refractivity(280.0, 1000.0, -1.0).is_err());
    }

    #[test]
    fn atmospheric_phase_examples() {
        let vacuum = AtmosphericProfile::constant(0.0, 1000.0).unwrap();
        assert_eq!(phase_atmospheric(1.2e15, &vacuum, C).unwrap(), 0.0);

        let air = AtmosphericProfile::constant(300.0, 1000.0).unwrap();
        let phase = phase_atmospheric(1.2e15, &air, C).unwrap();
        // (1.2e15 / c) · 3e-4 · 1000 at 50 digits
        assert!(rel(phase, 1_200_830.742_713_347_4) < 1e-14);
        let half = phase_atmospheric(0.6e15, &air, C).unwrap();
        assert_eq!(half, phase / 2.0);

        assert!(AtmosphericProfile::new(vec![(0.0, -1.0), (1.0, 0.0)]).is_err());
        assert!(AtmosphericProfile::new(vec![(1.0, 1.0), (0.0, 1.0)]).is_err());
    }

    #[test]
    fn earth_noise_properties() {
        assert_eq!(phase_earth_noise(7, 0.0, 5).unwrap(), vec![0.0; 5]);
        assert_eq!(phase_earth_noise(7, 0.3, 100).unwrap(), phase_earth_noise(7, 0.3, 100).unwrap());
        assert_ne!(phase_earth_noise(7, 0.3, 100).unwrap(), phase_earth_noise(8, 0.3, 100).unwrap());
        assert!(phase_earth_noise(1, 1.0, 0).unwrap().is_empty());
        assert!(phase_earth_noise(1, -1.0, 3).is_err());

        let n = 100_000;
        let draws = phase_earth_noise(42, 1.0, n).unwrap();
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 5.0 / (n as f64).sqrt());
    }

    #[test]
    fn total_phase_sums_in_order() {
        assert_eq!(total_phase(1.0, 2.0, 3.0).unwrap().total, 6.0);
        assert_eq!(total_phase(0.7, 0.0, 0.0).unwrap().total, 0.7);
        let (a, b, c) = (0.1, 0.2, 0.3);
        assert_eq!(total_phase(a, b, c).unwrap().total, (a + b) + c);
        assert_eq!(total_phase(f64::NAN, 0.0, 0.0), Err(PropagationError::NonFinite("space")));
        assert!(total_phase(f64::MAX, f64::MAX, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn split_path_is_additive(
            n in 3usize..200,
            split_frac in 0.05f64..0.95,
            amp in 1e-7f64..1e-2,
            freq in 0.1f64..5.0,
        ) {
            let strain = |x: f64| amp * (freq * x).sin();
            let whole = PhasePath::uniform(10.0, 3.0, n, strain).unwrap();
            let k = ((n - 1) as f64 * split_frac).round().clamp(1.0, (n - 2) as f64) as usize;
            let samples = whole.samples();
            let cut = samples[k].0;
            let left = PhasePath::new(cut, 3.0, samples[..=k].to_vec()).unwrap();
            let right_samples: Vec<_> = samples[k..]
                .iter()
                .enumerate()
                .map(|(i, &(x, h))| (if i == 0 { 0.0 } else { x - cut }, h))
                .collect();
            let right_len = right_samples.last().unwrap().0;
            let right = PhasePath::new(right_len, 3.0, right_samples).unwrap();
            let total = phase_space(&whole, 1.0).unwrap();
            let parts = phase_space(&left, 1.0).unwrap() + phase_space(&right, 1.0).unwrap();
            prop_assert!(rel(parts, total) <= 1e-12);
        }

        #[test]
        fn space_phase_linear_in_omega(omega in 1.0f64..1e6, scale in 0.5f64..4.0) {
            let a = PhasePath::uniform(2.0, omega, 17, |x| 1e-4 * x).unwrap();
            let b = PhasePath::uniform(2.0, omega * scale, 17, |x| 1e-4 * x).unwrap();
            let ratio = phase_space(&b, 1.0).unwrap() / phase_space(&a, 1.0).unwrap();
            prop_assert!((ratio - scale).abs() <= 1e-14 * scale);
        }

        #[test]
        fn refractivity_monotone_in_pressure(
            t in 200.0f64..330.0,
            p in 0.0f64..1100.0,
            dp in 1e-3f64..100.0,
            e in 0.0f64..50.0,
        ) {
            prop_assert!(refractivity(t, p + dp, e).unwrap() > refractivity(t, p, e).unwrap());
        }
    }
}
