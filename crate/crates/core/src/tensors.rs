//! Weak-field spacetime tensor algebra.
//!
//! Everything here uses the (−, +, +, +) signature with coordinates ordered
//! `(t, x, y, z)` and geometric units unless a [`PhysicalConstants`] value is
//! passed explicitly. Rank-2 tensors are plain `[[f64; 4]; 4]` arrays indexed
//! `[mu][nu]`; Christoffel symbols are indexed `[lambda][mu][nu]` for
//! Γ^λ_{μν}.
//!
//! Curvature is evaluated numerically at a single point with central
//! differences: metric derivatives feed the Christoffel symbols, and a second
//! round of central differences of the Christoffel symbols feeds the Riemann
//! tensor. The conventions are
//!
//! ```text
//! Γ^λ_{μν}  = ½ g^{λσ} (∂_μ g_{σν} + ∂_ν g_{σμ} − ∂_σ g_{μν})
//! R^ρ_{σμν} = ∂_μ Γ^ρ_{νσ} − ∂_ν Γ^ρ_{μσ} + Γ^ρ_{μλ} Γ^λ_{νσ} − Γ^ρ_{νλ} Γ^λ_{μσ}
//! R_{σν}    = R^ρ_{σρν}
//! G_{μν}    = R_{μν} − ½ g_{μν} R
//! ```

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix4;
use thiserror::Error;

/// A rank-2 spacetime tensor, indexed `[mu][nu]`.
pub type Mat4 = [[f64; 4]; 4];

/// Connection coefficients Γ^λ_{μν}, indexed `[lambda][mu][nu]`.
pub type Christoffel = [[[f64; 4]; 4]; 4];

/// Riemann tensor R^ρ_{σμν}, indexed `[rho][sigma][mu][nu]`.
pub type Riemann = [[[[f64; 4]; 4]; 4]; 4];

/// Default finite-difference step, applied to every coordinate.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Largest strain component magnitude accepted by default.
pub const WEAK_FIELD_BOUND: f64 = 1.0;

/// Metrics with `|det g|` below this are treated as singular.
pub const SINGULAR_DETERMINANT: f64 = 1e-12;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("strain amplitude {amplitude} violates the weak-field bound {bound}")]
    AmplitudeTooLarge { amplitude: f64, bound: f64 },
    #[error("metric is singular (|det g| = {0:e})")]
    SingularMetric(f64),
    #[error("tensor is not symmetric: [{row}][{col}] and its transpose differ by {difference:e}")]
    AsymmetricInput {
        row: usize,
        col: usize,
        difference: f64,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("finite-difference step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("physical constants must be strictly positive (G = {gravitational}, c = {speed_of_light})")]
    BadConstants {
        gravitational: f64,
        speed_of_light: f64,
    },
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// An event in spacetime: `t` in seconds, `x`, `y`, `z` in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimePoint {
    coords: [f64; 4],
}

impl SpacetimePoint {
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let coords = [t, x, y, z];
        if coords.iter().all(|c| c.is_finite()) {
            Ok(Self { coords })
        } else {
            Err(TensorError::NonFinite("spacetime point"))
        }
    }

    pub fn origin() -> Self {
        Self { coords: [0.0; 4] }
    }

    pub fn t(&self) -> f64 {
        self.coords[0]
    }

    pub fn x(&self) -> f64 {
        self.coords[1]
    }

    pub fn y(&self) -> f64 {
        self.coords[2]
    }

    pub fn z(&self) -> f64 {
        self.coords[3]
    }

    pub fn coords(&self) -> [f64; 4] {
        self.coords
    }

    /// The point displaced by `delta` along coordinate `axis` (0 = t).
    pub fn shifted(&self, axis: usize, delta: f64) -> Self {
        let mut coords = self.coords;
        coords[axis] += delta;
        Self { coords }
    }
}

/// A symmetric, non-degenerate metric g_{μν}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor {
    components: Mat4,
}

impl MetricTensor {
    pub fn new(components: Mat4) -> Result<Self> {
        check_finite(&components, "metric")?;
        check_symmetric(&components)?;
        let det = determinant(&components);
        if det == 0.0 {
            return Err(TensorError::SingularMetric(det));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &Mat4 {
        &self.components
    }

    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.components[mu][nu]
    }

    pub fn determinant(&self) -> f64 {
        determinant(&self.components)
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.components[i][i]).sum()
    }

    /// The contravariant metric g^{μν}.
    pub fn inverse(&self) -> Result<Mat4> {
        let det = self.determinant();
        if det.abs() < SINGULAR_DETERMINANT {
            return Err(TensorError::SingularMetric(det.abs()));
        }
        let inv = to_matrix(&self.components)
            .try_inverse()
            .ok_or(TensorError::SingularMetric(det.abs()))?;
        Ok(from_matrix(&inv))
    }
}

/// A transverse-traceless strain for a wave travelling along z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainTensor {
    components: Mat4,
    h_plus: f64,
    h_cross: f64,
}

impl StrainTensor {
    pub fn zero() -> Self {
        Self {
            components: [[0.0; 4]; 4],
            h_plus: 0.0,
            h_cross: 0.0,
        }
    }

    pub fn components(&self) -> &Mat4 {
        &self.components
    }

    pub fn h_plus(&self) -> f64 {
        self.h_plus
    }

    pub fn h_cross(&self) -> f64 {
        self.h_cross
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Newton's constant and the speed of light in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    gravitational: f64,
    speed_of_light: f64,
}

impl PhysicalConstants {
    pub const CODATA_G: f64 = 6.674_30e-11;
    pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

    pub fn new(gravitational: f64, speed_of_light: f64) -> Result<Self> {
        if gravitational > 0.0
            && speed_of_light > 0.0
            && gravitational.is_finite()
            && speed_of_light.is_finite()
        {
            Ok(Self {
                gravitational,
                speed_of_light,
            })
        } else {
            Err(TensorError::BadConstants {
                gravitational,
                speed_of_light,
            })
        }
    }

    pub fn gravitational(&self) -> f64 {
        self.gravitational
    }

    pub fn speed_of_light(&self) -> f64 {
        self.speed_of_light
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            gravitational: Self::CODATA_G,
            speed_of_light: Self::SPEED_OF_LIGHT,
        }
    }
}

type MetricFn = dyn Fn(&SpacetimePoint) -> Result<MetricTensor> + Send + Sync;

/// A metric as a function of position. The evaluation function must be pure.
#[derive(Clone)]
pub struct MetricField {
    label: String,
    eval: Arc<MetricFn>,
}

impl MetricField {
    pub fn new<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&SpacetimePoint) -> Result<MetricTensor> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, p: &SpacetimePoint) -> Result<MetricTensor> {
        (self.eval)(p)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Minkowski everywhere.
    pub fn flat() -> Self {
        Self::new("minkowski", |_| Ok(minkowski()))
    }

    /// Spatially flat FLRW: `g = diag(−1, a(t)², a(t)², a(t)²)`.
    pub fn flrw<A>(scale: A) -> Self
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new("flrw", move |p| {
            let a2 = scale(p.t()).powi(2);
            MetricTensor::new(diag([-1.0, a2, a2, a2]))
        })
    }

    /// Minkowski plus a TT plane wave `h(t − z/c)` with angular frequency
    /// `omega`.
    pub fn plane_wave(h_plus: f64, h_cross: f64, omega: f64, c: f64) -> Result<Self> {
        // validates the amplitudes once up front
        tt_strain(h_plus, h_cross, 0.0)?;
        let eta = minkowski();
        Ok(Self::new("tt-plane-wave", move |p| {
            let phase = omega * (p.t() - p.z() / c);
            perturb(&eta, &tt_strain(h_plus, h_cross, phase)?)
        }))
    }
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

/// Ricci tensor, Ricci scalar and Einstein tensor at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureResult {
    pub ricci: Mat4,
    pub scalar: f64,
    pub einstein: Mat4,
}

impl CurvatureResult {
    pub fn max_abs(&self) -> f64 {
        self.ricci
            .iter()
            .chain(self.einstein.iter())
            .flatten()
            .fold(self.scalar.abs(), |m, v| m.max(v.abs()))
    }
}

pub fn minkowski() -> MetricTensor {
    MetricTensor {
        components: diag([-1.0, 1.0, 1.0, 1.0]),
    }
}

/// TT-gauge strain with the default weak-field bound.
pub fn tt_strain(h_plus: f64, h_cross: f64, phase: f64) -> Result<StrainTensor> {
    tt_strain_bounded(h_plus, h_cross, phase, WEAK_FIELD_BOUND)
}

/// TT-gauge strain rejecting amplitudes with `|h| >= bound`.
pub fn tt_strain_bounded(
    h_plus: f64,
    h_cross: f64,
    phase: f64,
    bound: f64,
) -> Result<StrainTensor> {
    for amplitude in [h_plus, h_cross] {
        if !amplitude.is_finite() || amplitude.abs() >= bound {
            return Err(TensorError::AmplitudeTooLarge { amplitude, bound });
        }
    }
    if !phase.is_finite() {
        return Err(TensorError::NonFinite("strain phase"));
    }
    let oscillation = phase.cos();
    let plus = h_plus * oscillation;
    let cross = h_cross * oscillation;
    let mut components = [[0.0; 4]; 4];
    components[1][1] = plus;
    components[2][2] = -plus;
    components[1][2] = cross;
    components[2][1] = cross;
    Ok(StrainTensor {
        components,
        h_plus,
        h_cross,
    })
}

/// `g = η + h`.
pub fn perturb(eta: &MetricTensor, h: &StrainTensor) -> Result<MetricTensor> {
    let largest = h.max_abs();
    if largest >= WEAK_FIELD_BOUND {
        return Err(TensorError::AmplitudeTooLarge {
            amplitude: largest,
            bound: WEAK_FIELD_BOUND,
        });
    }
    let mut components = eta.components;
    for (row, h_row) in components.iter_mut().zip(h.components.iter()) {
        for (g, dh) in row.iter_mut().zip(h_row) {
            *g += dh;
        }
    }
    MetricTensor::new(components)
}

/// Γ^λ_{μν} at `p` from central differences of the metric.
pub fn christoffel(field: &MetricField, p: &SpacetimePoint, step: f64) -> Result<Christoffel> {
    check_step(step)?;
    let inverse = field.eval(p)?.inverse()?;
    let derivatives = metric_derivatives(field, p, step)?;
    Ok(connection(&inverse, &derivatives))
}

/// Full Riemann tensor R^ρ_{σμν} at `p`.
pub fn riemann(field: &MetricField, p: &SpacetimePoint, step: f64) -> Result<Riemann> {
    let gamma = christoffel(field, p, step)?;
    let mut d_gamma = [[[[0.0; 4]; 4]; 4]; 4];
    for (axis, slot) in d_gamma.iter_mut().enumerate() {
        let forward = christoffel(field, &p.shifted(axis, step), step)?;
        let backward = christoffel(field, &p.shifted(axis, -step), step)?;
        for l in 0..4 {
            for m in 0..4 {
                for n in 0..4 {
                    slot[l][m][n] = (forward[l][m][n] - backward[l][m][n]) / (2.0 * step);
                }
            }
        }
    }

    let mut out = [[[[0.0; 4]; 4]; 4]; 4];
    for rho in 0..4 {
        for sigma in 0..4 {
            for mu in 0..4 {
                for nu in 0..4 {
                    let mut value = d_gamma[mu][rho][nu][sigma] - d_gamma[nu][rho][mu][sigma];
                    for lambda in 0..4 {
                        value += gamma[rho][mu][lambda] * gamma[lambda][nu][sigma]
                            - gamma[rho][nu][lambda] * gamma[lambda][mu][sigma];
                    }
                    out[rho][sigma][mu][nu] = value;
                }
            }
        }
    }
    Ok(out)
}

/// Ricci tensor, scalar and Einstein tensor at `p`.
pub fn curvature(field: &MetricField, p: &SpacetimePoint, step: f64) -> Result<CurvatureResult> {
    check_step(step)?;
    let g = field.eval(p)?;
    let inverse = g.inverse()?;
    let riem = riemann(field, p, step)?;

    let mut ricci = [[0.0; 4]; 4];
    for (sigma, row) in ricci.iter_mut().enumerate() {
        for (nu, value) in row.iter_mut().enumerate() {
            *value = (0..4).map(|rho| riem[rho][sigma][rho][nu]).sum();
        }
    }

    let mut scalar = 0.0;
    for sigma in 0..4 {
        for nu in 0..4 {
            scalar += inverse[sigma][nu] * ricci[sigma][nu];
        }
    }

    let mut einstein = [[0.0; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            einstein[mu][nu] = ricci[mu][nu] - 0.5 * g.components[mu][nu] * scalar;
        }
    }

    Ok(CurvatureResult {
        ricci,
        scalar,
        einstein,
    })
}

/// k = 8πG/c⁴, in s²·m⁻¹·kg⁻¹.
pub fn einstein_constant(consts: &PhysicalConstants) -> f64 {
    8.0 * std::f64::consts::PI * consts.gravitational / consts.speed_of_light.powi(4)
}

/// G_{μν} = k T_{μν}.
pub fn curvature_from_stress(stress: &Mat4, k: f64) -> Result<Mat4> {
    check_symmetric(stress)?;
    let mut out = *stress;
    for v in out.iter_mut().flatten() {
        *v *= k;
    }
    Ok(out)
}

/// d'Alembertian `□h = −(1/c²) ∂²h/∂t² + ∂²h/∂z²` by central second
/// differences. The same numeric `step` is used along t (seconds) and z
/// (meters).
pub fn wave_residual<F>(strain: F, t: f64, z: f64, step: f64, c: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    check_step(step)?;
    let centre = strain(t, z);
    let d2t = (strain(t + step, z) - 2.0 * centre + strain(t - step, z)) / (step * step);
    let d2z = (strain(t, z + step) - 2.0 * centre + strain(t, z - step)) / (step * step);
    Ok(-d2t / (c * c) + d2z)
}

/// Line element `ds² = −c²dt² + (1 + h₊)dx² + (1 − h₊)dy² + dz²`.
pub fn interval(dt: f64, dx: f64, dy: f64, dz: f64, h_plus: f64, c: f64) -> Result<f64> {
    check_amplitude(h_plus)?;
    Ok(-(c * c) * dt * dt + (1.0 + h_plus) * dx * dx + (1.0 - h_plus) * dy * dy + dz * dz)
}

/// Proper-length stretch along x and y: `(√(1 + h₊), √(1 − h₊))`.
pub fn stretch_factor(h_plus: f64) -> Result<(f64, f64)> {
    check_amplitude(h_plus)?;
    Ok(((1.0 + h_plus).sqrt(), (1.0 - h_plus).sqrt()))
}

fn connection(inverse: &Mat4, derivatives: &[Mat4; 4]) -> Christoffel {
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for lambda in 0..4 {
        for mu in 0..4 {
            for nu in mu..4 {
                let mut value = 0.0;
                for sigma in 0..4 {
                    value += inverse[lambda][sigma]
                        * (derivatives[mu][sigma][nu] + derivatives[nu][sigma][mu]
                            - derivatives[sigma][mu][nu]);
                }
                value *= 0.5;
                gamma[lambda][mu][nu] = value;
                gamma[lambda][nu][mu] = value;
            }
        }
    }
    gamma
}

/// `out[a][m][n] = ∂_a g_{mn}`.
fn metric_derivatives(field: &MetricField, p: &SpacetimePoint, step: f64) -> Result<[Mat4; 4]> {
    let mut out = [[[0.0; 4]; 4]; 4];
    for (axis, slot) in out.iter_mut().enumerate() {
        let forward = field.eval(&p.shifted(axis, step))?;
        let backward = field.eval(&p.shifted(axis, -step))?;
        for m in 0..4 {
            for n in 0..4 {
                slot[m][n] = (forward.components[m][n] - backward.components[m][n]) / (2.0 * step);
            }
        }
    }
    Ok(out)
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(TensorError::BadStep(step))
    }
}

fn check_amplitude(h_plus: f64) -> Result<()> {
    if h_plus.is_finite() && h_plus.abs() < WEAK_FIELD_BOUND {
        Ok(())
    } else {
        Err(TensorError::AmplitudeTooLarge {
            amplitude: h_plus,
            bound: WEAK_FIELD_BOUND,
        })
    }
}

fn check_finite(m: &Mat4, what: &'static str) -> Result<()> {
    if m.iter().flatten().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(TensorError::NonFinite(what))
    }
}

fn check_symmetric(m: &Mat4) -> Result<()> {
    for row in 0..4 {
        for col in (row + 1)..4 {
            let difference = (m[row][col] - m[col][row]).abs();
            if difference.is_nan() || difference > SYMMETRY_TOLERANCE {
                return Err(TensorError::AsymmetricInput {
                    row,
                    col,
                    difference,
                });
            }
        }
    }
    Ok(())
}

fn diag(d: [f64; 4]) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for (i, v) in d.into_iter().enumerate() {
        m[i][i] = v;
    }
    m
}

fn determinant(m: &Mat4) -> f64 {
    to_matrix(m).determinant()
}

fn to_matrix(m: &Mat4) -> Matrix4<f64> {
    Matrix4::from_fn(|r, c| m[r][c])
}

fn from_matrix(m: &Matrix4<f64>) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = m[(r, c)];
        }
    }
    out
}
