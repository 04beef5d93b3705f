//! Grid Bayesian updates, segment-weighted prediction and a ridge-regression
//! baseline predictor.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Tolerance on the unit sum of a prior supplied to [`PosteriorGrid::new`].
pub const NORMALISATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("grid has no points")]
    EmptyGrid,
    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("grid parameters must be finite and strictly increasing (index {0})")]
    BadParameters(usize),
    #[error("invalid prior: {0}")]
    BadPrior(String),
    #[error("invalid likelihood: {0}")]
    BadLikelihood(String),
    #[error("evidence is zero: every prior·likelihood product vanishes")]
    EvidenceZero,
    #[error("observation batch is empty")]
    EmptyBatch,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("no segment weights given")]
    NoEntries,
    #[error("segment weight {index} is invalid (rho = {rho})")]
    BadWeight { index: usize, rho: f64 },
    #[error("all segment weights are zero")]
    AllZeroWeights,
    #[error("ridge penalty must be non-negative and finite, got {0}")]
    BadLambda(f64),
    #[error("normal equations are singular")]
    SingularSystem,
    #[error("feature count mismatch: model has {expected}, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, InferenceError>;

/// Prior, likelihood and posterior over an explicit parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorGrid {
    parameters: Vec<f64>,
    prior: Vec<f64>,
    likelihood: Vec<f64>,
    posterior: Vec<f64>,
}

impl PosteriorGrid {
    /// A grid with a normalised prior. Before any update the likelihood is
    /// flat and the posterior equals the prior.
    pub fn new(parameters: Vec<f64>, prior: Vec<f64>) -> Result<Self> {
        check_parameters(&parameters)?;
        if prior.len() != parameters.len() {
            return Err(InferenceError::LengthMismatch {
                expected: parameters.len(),
                found: prior.len(),
            });
        }
        if let Some(i) = prior.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(InferenceError::BadPrior(format!("entry {i} is {}", prior[i])));
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > NORMALISATION_TOLERANCE {
            return Err(InferenceError::BadPrior(format!("sums to {total}, not 1")));
        }
        let likelihood = vec![1.0; parameters.len()];
        let posterior = prior.clone();
        Ok(Self {
            parameters,
            prior,
            likelihood,
            posterior,
        })
    }

    /// Normalises non-negative prior weights.
    pub fn from_weights(parameters: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        check_parameters(&parameters)?;
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(InferenceError::BadPrior(format!("weight {i} is {}", weights[i])));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(InferenceError::BadPrior(format!("weights sum to {total}")));
        }
        Self::new(parameters, weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(parameters: Vec<f64>) -> Result<Self> {
        let n = parameters.len();
        Self::from_weights(parameters, vec![1.0; n])
    }

    /// Gaussian prior density evaluated on the grid and normalised.
    pub fn gaussian(parameters: Vec<f64>, mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(InferenceError::BadPrior(format!("mean {mean}, sd {sd}")));
        }
        let weights = parameters
            .iter()
            .map(|x| (-0.5 * ((x - mean) / sd).powi(2)).exp())
            .collect();
        Self::from_weights(parameters, weights)
    }

    pub fn parameters(&self) -> &[f64] {
        &self.parameters
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn likelihood(&self) -> &[f64] {
        &self.likelihood
    }

    pub fn posterior(&self) -> &[f64] {
        &self.posterior
    }

    pub fn len(&self) -> usize {
        self.parameters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parameters.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.parameters
            .iter()
            .zip(&self.posterior)
            .map(|(x, p)| x * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.parameters
            .iter()
            .zip(&self.posterior)
            .map(|(x, p)| (x - mean).powi(2) * p)
            .sum()
    }

    /// Index of the first posterior maximum.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.posterior.iter().enumerate() {
            if *p > self.posterior[best] {
                best = i;
            }
        }
        best
    }

    /// A fresh grid whose prior is this grid's posterior, for sequential
    /// updating.
    pub fn posterior_as_prior(&self) -> Self {
        Self {
            parameters: self.parameters.clone(),
            prior: self.posterior.clone(),
            likelihood: vec![1.0; self.parameters.len()],
            posterior: self.posterior.clone(),
        }
    }
}

/// Observations `d` for one update.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationBatch(Vec<f64>);

impl ObservationBatch {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(InferenceError::EmptyBatch);
        }
        if data.iter().any(|d| !d.is_finite()) {
            return Err(InferenceError::NonFinite("observations"));
        }
        Ok(Self(data))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Likelihood of i.i.d. Gaussian observations with known `sigma` and mean at
/// each grid parameter, scaled so its maximum is 1.
pub fn gaussian_likelihood(parameters: &[f64], batch: &ObservationBatch, sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(InferenceError::BadLikelihood(format!("sigma {sigma}")));
    }
    let log_like: Vec<f64> = parameters
        .iter()
        .map(|mu| {
            -0.5 * batch
                .0
                .iter()
                .map(|d| ((d - mu) / sigma).powi(2))
                .sum::<f64>()
        })
        .collect();
    let top = log_like.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(log_like.into_iter().map(|l| (l - top).exp()).collect())
}

/// `posterior_i = prior_i·likelihood_i / Σ_j prior_j·likelihood_j`.
pub fn grid_posterior(grid: &PosteriorGrid, likelihood: &[f64]) -> Result<PosteriorGrid> {
    if likelihood.len() != grid.len() {
        return Err(InferenceError::LengthMismatch {
            expected: grid.len(),
            found: likelihood.len(),
        });
    }
    if let Some(i) = likelihood.iter().position(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(InferenceError::BadLikelihood(format!("entry {i} is {}", likelihood[i])));
    }
    let products: Vec<f64> = grid.prior.iter().zip(likelihood).map(|(p, l)| p * l).collect();
    let evidence: f64 = products.iter().sum();
    if evidence <= 0.0 {
        return Err(InferenceError::EvidenceZero);
    }
    if !evidence.is_finite() {
        return Err(InferenceError::NonFinite("evidence"));
    }
    Ok(PosteriorGrid {
        parameters: grid.parameters.clone(),
        prior: grid.prior.clone(),
        likelihood: likelihood.to_vec(),
        posterior: products.into_iter().map(|v| v / evidence).collect(),
    })
}

/// Prediction weight `rho` attached to a segment probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentWeight {
    pub rho: f64,
    pub p: f64,
}

/// `Σ_k (ρ_k / Σρ)·p_k`, kept within `[min p_k, max p_k]`.
pub fn weighted_prediction(entries: &[SegmentWeight]) -> Result<f64> {
    if entries.is_empty() {
        return Err(InferenceError::NoEntries);
    }
    for (index, e) in entries.iter().enumerate() {
        if !(e.rho.is_finite() && e.rho >= 0.0) {
            return Err(InferenceError::BadWeight { index, rho: e.rho });
        }
        if !e.p.is_finite() {
            return Err(InferenceError::NonFinite("segment probability"));
        }
    }
    let total: f64 = entries.iter().map(|e| e.rho).sum();
    if total <= 0.0 {
        return Err(InferenceError::AllZeroWeights);
    }
    let value: f64 = entries.iter().map(|e| e.rho / total * e.p).sum();
    let lo = entries.iter().map(|e| e.p).fold(f64::INFINITY, f64::min);
    let hi = entries.iter().map(|e| e.p).fold(f64::NEG_INFINITY, f64::max);
    Ok(value.clamp(lo, hi))
}

/// Anything that maps a feature vector to a real prediction.
pub trait Predictor {
    fn predict(&self, features: &[f64]) -> Result<f64>;
}

/// Ridge regression coefficients; the last weight is the unpenalised
/// intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    weights: Vec<f64>,
    lambda: f64,
}

impl BaselineModel {
    pub fn from_weights(weights: Vec<f64>, lambda: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(InferenceError::DimensionMismatch { expected: 1, found: 0 });
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(InferenceError::BadLambda(lambda));
        }
        Ok(Self { weights, lambda })
    }

    /// Feature weights followed by the intercept.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.weights[..self.weights.len() - 1]
    }

    pub fn intercept(&self) -> f64 {
        self.weights[self.weights.len() - 1]
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn feature_count(&self) -> usize {
        self.weights.len() - 1
    }
}

impl Predictor for BaselineModel {
    fn predict(&self, features: &[f64]) -> Result<f64> {
        predict_baseline(self, features)
    }
}

/// Minimises `‖Xw − y‖² + λ‖w‖²` (intercept unpenalised) through the normal
/// equations and a Cholesky factorisation.
pub fn fit_baseline(features: &[Vec<f64>], targets: &[f64], lambda: f64) -> Result<BaselineModel> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(InferenceError::BadLambda(lambda));
    }
    let rows = features.len();
    if rows == 0 {
        return Err(InferenceError::EmptyGrid);
    }
    if targets.len() != rows {
        return Err(InferenceError::LengthMismatch {
            expected: rows,
            found: targets.len(),
        });
    }
    let width = features[0].len();
    if let Some(bad) = features.iter().find(|r| r.len() != width) {
        return Err(InferenceError::DimensionMismatch {
            expected: width,
            found: bad.len(),
        });
    }
    if features.iter().flatten().chain(targets).any(|v| !v.is_finite()) {
        return Err(InferenceError::NonFinite("training data"));
    }
    if lambda == 0.0 && (0..width).any(|j| features.iter().all(|r| r[j] == 0.0)) {
        return Err(InferenceError::SingularSystem);
    }

    let design = DMatrix::from_fn(rows, width + 1, |r, c| {
        if c < width {
            features[r][c]
        } else {
            1.0
        }
    });
    let y = DVector::from_column_slice(targets);
    let mut gram = design.transpose() * &design;
    for j in 0..width {
        gram[(j, j)] += lambda;
    }
    let rhs = design.transpose() * y;

    let scale = gram.diagonal().max();
    let cholesky = gram.cholesky().ok_or(InferenceError::SingularSystem)?;
    let smallest_pivot = cholesky.l_dirty().diagonal().min();
    if smallest_pivot * smallest_pivot <= 1e-13 * scale {
        return Err(InferenceError::SingularSystem);
    }
    let solution = cholesky.solve(&rhs);
    BaselineModel::from_weights(solution.iter().copied().collect(), lambda)
}

/// `intercept + Σ_j w_j·x_j`.
pub fn predict_baseline(model: &BaselineModel, features: &[f64]) -> Result<f64> {
    if features.len() != model.feature_count() {
        return Err(InferenceError::DimensionMismatch {
            expected: model.feature_count(),
            found: features.len(),
        });
    }
    Ok(model.intercept()
        + model
            .coefficients()
            .iter()
            .zip(features)
            .map(|(w, x)| w * x)
            .sum::<f64>())
}

/// `‖Xw − y‖² + λ‖w_features‖²` for arbitrary weights (intercept last).
pub fn ridge_objective(weights: &[f64], lambda: f64, features: &[Vec<f64>], targets: &[f64]) -> f64 {
    let (coefficients, intercept) = weights.split_at(weights.len() - 1);
    let residual: f64 = features
        .iter()
        .zip(targets)
        .map(|(row, y)| {
            let fit = intercept[0] + row.iter().zip(coefficients).map(|(x, w)| x * w).sum::<f64>();
            (fit - y).powi(2)
        })
        .sum();
    residual + lambda * coefficients.iter().map(|w| w * w).sum::<f64>()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

fn check_parameters(parameters: &[f64]) -> Result<()> {
    if parameters.is_empty() {
        return Err(InferenceError::EmptyGrid);
    }
    if let Some(i) = parameters.iter().position(|p| !p.is_finite()) {
        return Err(InferenceError::BadParameters(i));
    }
    if let Some(i) = parameters.windows(2).position(|w| w[1] <= w[0]) {
        return Err(InferenceError::BadParameters(i + 1));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> Vec<f64> {
        linspace(-5.0, 5.0, n)
    }

    #[test]
    fn uniform_stays_uniform() {
        let g = PosteriorGrid::uniform(grid(11)).unwrap();
        let post = grid_posterior(&g, &[0.3; 11]).unwrap();
        for p in post.posterior() {
            assert!((p - 1.0 / 11.0).abs() < 1e-15);
        }
    }

    #[test]
    fn likelihood_scale_cancels() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = PosteriorGrid::from_weights(grid(50), (0..50).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap();
        let like: Vec<f64> = (0..50).map(|_| rng.random_range(0.0..1.0)).collect();
        let scaled: Vec<f64> = like.iter().map(|l| l * 123.456).collect();
        let a = grid_posterior(&g, &like).unwrap();
        let b = grid_posterior(&g, &scaled).unwrap();
        for (x, y) in a.posterior().iter().zip(b.posterior()) {
            assert!((x - y).abs() <= 1e-15);
        }
        assert_eq!(a.argmax(), b.argmax());
    }

    // Conjugate normal: mean = (σ_l²μ_p + σ_p²μ_l)/(σ_p² + σ_l²) = 0.8,
    // var = σ_p²σ_l²/(σ_p² + σ_l²) = 0.2.
    #[test]
    fn conjugate_normal_posterior() {
        let params = grid(4001);
        let prior = PosteriorGrid::gaussian(params.clone(), 0.0, 1.0).unwrap();
        let like: Vec<f64> = params.iter().map(|x| (-0.5 * ((x - 1.0) / 0.5f64).powi(2)).exp()).collect();
        let post = grid_posterior(&prior, &like).unwrap();
        assert!((post.mean() - 0.8).abs() < 1e-3);
        assert!((post.variance() - 0.2).abs() < 1e-3);
    }

    #[test]
    fn gaussian_likelihood_of_one_observation() {
        let params = grid(4001);
        let batch = ObservationBatch::new(vec![1.0]).unwrap();
        let like = gaussian_likelihood(&params, &batch, 0.5).unwrap();
        let post = grid_posterior(&PosteriorGrid::gaussian(params, 0.0, 1.0).unwrap(), &like).unwrap();
        assert!((post.mean() - 0.8).abs() < 1e-3);
    }

    #[test]
    fn posterior_errors() {
        let g = PosteriorGrid::uniform(grid(3)).unwrap();
        assert_eq!(grid_posterior(&g, &[0.0; 3]), Err(InferenceError::EvidenceZero));
        assert!(matches!(grid_posterior(&g, &[1.0; 2]), Err(InferenceError::LengthMismatch { .. })));
        assert!(matches!(grid_posterior(&g, &[1.0, -1.0, 1.0]), Err(InferenceError::BadLikelihood(_))));
        assert!(matches!(PosteriorGrid::new(grid(2), vec![0.5, 0.6]), Err(InferenceError::BadPrior(_))));
        assert!(matches!(PosteriorGrid::uniform(vec![1.0, 1.0]), Err(InferenceError::BadParameters(1))));
        assert_eq!(PosteriorGrid::uniform(vec![]), Err(InferenceError::EmptyGrid));
        assert_eq!(ObservationBatch::new(vec![]), Err(InferenceError::EmptyBatch));
    }

    #[test]
    fn weighted_prediction_examples() {
        let w = |rho, p| SegmentWeight { rho, p };
        assert_eq!(weighted_prediction(&[w(1.0, 0.7)]).unwrap(), 0.7);
        let mean = weighted_prediction(&[w(2.0, 0.2), w(2.0, 0.4), w(2.0, 0.6)]).unwrap();
        assert!((mean - 0.4).abs() < 1e-15);
        assert_eq!(weighted_prediction(&[w(0.3, 0.55), w(7.0, 0.55), w(1e-3, 0.55)]).unwrap(), 0.55);
        assert_eq!(weighted_prediction(&[]), Err(InferenceError::NoEntries));
        assert_eq!(weighted_prediction(&[w(0.0, 0.1), w(0.0, 0.2)]), Err(InferenceError::AllZeroWeights));
        assert!(matches!(weighted_prediction(&[w(-1.0, 0.1)]), Err(InferenceError::BadWeight { index: 0, .. })));
    }

    fn line_data() -> (Vec<Vec<f64>>, Vec<f64>) {
        let xs = [0.0, 1.0, 2.0, 3.5, -1.0];
        (xs.iter().map(|x| vec![*x]).collect(), xs.iter().map(|x| 2.0 * x + 1.0).collect())
    }

    #[test]
    fn exact_line_is_recovered() {
        let (x, y) = line_data();
        let model = fit_baseline(&x, &y, 0.0).unwrap();
        assert!((model.weights()[0] - 2.0).abs() < 1e-9);
        assert!((model.weights()[1] - 1.0).abs() < 1e-9);
        assert!((predict_baseline(&model, &[3.0]).unwrap() - 7.0).abs() < 1e-9);
        assert!((model.predict(&[3.0]).unwrap() - 7.0).abs() < 1e-9);
    }

    #[test]
    fn heavy_penalty_shrinks_coefficients() {
        let (x, y) = line_data();
        let model = fit_baseline(&x, &y, 1e12).unwrap();
        assert!(model.coefficients()[0].abs() < 1e-6);
        let mean_y = y.iter().sum::<f64>() / y.len() as f64;
        assert!((model.intercept() - mean_y).abs() < 1e-6);
    }

    fn inverse3(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let cof = |r: usize, c: usize| {
            let rows: Vec<usize> = (0..3).filter(|&i| i != r).collect();
            let cols: Vec<usize> = (0..3).filter(|&j| j != c).collect();
            let minor = m[rows[0]][cols[0]] * m[rows[1]][cols[1]] - m[rows[0]][cols[1]] * m[rows[1]][cols[0]];
            if (r + c).is_multiple_of(2) { minor } else { -minor }
        };
        let det: f64 = (0..3).map(|c| m[0][c] * cof(0, c)).sum();
        let mut inv = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                inv[c][r] = cof(r, c) / det;
            }
        }
        inv
    }

    #[test]
    fn ridge_matches_explicit_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x: Vec<Vec<f64>> = (0..6).map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
        let y: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..5.0)).collect();
        let lambda = 0.1;
        let model = fit_baseline(&x, &y, lambda).unwrap();

        let rows: Vec<[f64; 3]> = x.iter().map(|r| [r[0], r[1], 1.0]).collect();
        let mut gram = [[0.0; 3]; 3];
        let mut rhs = [0.0; 3];
        for (row, target) in rows.iter().zip(&y) {
            for i in 0..3 {
                rhs[i] += row[i] * target;
                for j in 0..3 {
                    gram[i][j] += row[i] * row[j];
                }
            }
        }
        gram[0][0] += lambda;
        gram[1][1] += lambda;
        let inv = inverse3(gram);
        for i in 0..3 {
            let expected: f64 = (0..3).map(|j| inv[i][j] * rhs[j]).sum();
            assert!((model.weights()[i] - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn ridge_is_locally_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let x: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] - 2.0 * r[2] + rng.random_range(-0.1..0.1)).collect();
        let model = fit_baseline(&x, &y, 0.5).unwrap();
        let best = ridge_objective(model.weights(), 0.5, &x, &y);
        for _ in 0..100 {
            let probe: Vec<f64> = model.weights().iter().map(|w| w + rng.random_range(-1e-3..1e-3)).collect();
            assert!(best <= ridge_objective(&probe, 0.5, &x, &y));
        }
    }

    #[test]
    fn ridge_errors() {
        let x = vec![vec![0.0, 1.0], vec![0.0, 2.0]];
        assert_eq!(fit_baseline(&x, &[1.0, 2.0], 0.0), Err(InferenceError::SingularSystem));
        let dup = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        assert_eq!(fit_baseline(&dup, &[1.0, 2.0, 3.0], 0.0), Err(InferenceError::SingularSystem));
        assert!(fit_baseline(&dup, &[1.0, 2.0, 3.0], 0.1).is_ok());
        assert!(matches!(fit_baseline(&x, &[1.0], 0.0), Err(InferenceError::LengthMismatch { .. })));
        assert_eq!(fit_baseline(&x, &[1.0, 2.0], -1.0), Err(InferenceError::BadLambda(-1.0)));

        let model = BaselineModel::from_weights(vec![0.0, 0.0, 4.5], 0.0).unwrap();
        assert_eq!(predict_baseline(&model, &[9.0, -3.0]).unwrap(), 4.5);
        assert!(matches!(predict_baseline(&model, &[1.0]), Err(InferenceError::DimensionMismatch { .. })));
    }

    proptest! {
        #[test]
        fn posterior_is_a_distribution(
            weights in proptest::collection::vec(1e-6f64..1.0, 2..60),
            like in proptest::collection::vec(0.0f64..5.0, 60),
        ) {
            let n = weights.len();
            let g = PosteriorGrid::from_weights(linspace(0.0, 1.0, n), weights).unwrap();
            let mut l = like[..n].to_vec();
            l[0] += 0.1;
            let post = grid_posterior(&g, &l).unwrap();
            let total: f64 = post.posterior().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(post.posterior().iter().all(|p| (0.0..=1.0).contains(p)));
        }

        #[test]
        fn sequential_updates_compose(
            l1 in proptest::collection::vec(0.01f64..2.0, 40),
            l2 in proptest::collection::vec(0.01f64..2.0, 40),
        ) {
            let g = PosteriorGrid::gaussian(linspace(-2.0, 2.0, 40), 0.3, 0.8).unwrap();
            let twice = grid_posterior(&grid_posterior(&g, &l1).unwrap().posterior_as_prior(), &l2).unwrap();
            let product: Vec<f64> = l1.iter().zip(&l2).map(|(a, b)| a * b).collect();
            let once = grid_posterior(&g, &product).unwrap();
            for (a, b) in twice.posterior().iter().zip(once.posterior()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn weighted_prediction_is_bounded(
            entries in proptest::collection::vec((0.0f64..10.0, -1.0f64..1.0), 1..20),
        ) {
            prop_assume!(entries.iter().any(|(r, _)| *r > 0.0));
            let e: Vec<_> = entries.iter().map(|&(rho, p)| SegmentWeight { rho, p }).collect();
            let v = weighted_prediction(&e).unwrap();
            let lo = e.iter().map(|x| x.p).fold(f64::INFINITY, f64::min);
            let hi = e.iter().map(|x| x.p).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(v >= lo && v <= hi);
        }

        #[test]
        fn prediction_is_affine(
            w in proptest::collection::vec(-5.0f64..5.0, 4),
            u in proptest::collection::vec(-5.0f64..5.0, 3),
            v in proptest::collection::vec(-5.0f64..5.0, 3),
            alpha in 0.0f64..1.0,
        ) {
            let model = BaselineModel::from_weights(w, 0.0).unwrap();
            let mix: Vec<f64> = u.iter().zip(&v).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
            let lhs = predict_baseline(&model, &mix).unwrap();
            let rhs = alpha * predict_baseline(&model, &u).unwrap() + (1.0 - alpha) * predict_baseline(&model, &v).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
    }
}
