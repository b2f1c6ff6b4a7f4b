//! Model representations shared by every other module: parameter spaces and
//! priors, the tabulated and conjugate sampling models, losses, prediction
//! rules and risk estimates.

mod conjugate;
mod finite;
mod loss;
mod rule;
mod validate;

pub use conjugate::ConjugateModel;
pub use finite::FiniteModel;
pub use loss::{evaluate_loss, LossForm, LossSpec};
pub use rule::{MemoizedRule, PointSummary, PredictionRule, Search};
pub use validate::{validate_model, ValidationReport, Violation, ViolationKind};

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

/// A point of a parameter, observation or prediction space.
pub type Point = Vec<f64>;

#[derive(Debug, Clone, PartialEq)]
pub enum ParameterSpace {
    FiniteGrid(Vec<Point>),
    /// Per-dimension open box `(lower_i, upper_i)`; bounds may be infinite.
    Interval { lower: Vec<f64>, upper: Vec<f64> },
}

impl ParameterSpace {
    pub fn dimension(&self) -> usize {
        match self {
            ParameterSpace::FiniteGrid(points) => points.first().map_or(0, Vec::len),
            ParameterSpace::Interval { lower, .. } => lower.len(),
        }
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        match self {
            ParameterSpace::FiniteGrid(points) => points.iter().any(|p| p.as_slice() == theta),
            ParameterSpace::Interval { lower, upper } => {
                theta.len() == lower.len()
                    && theta
                        .iter()
                        .zip(lower.iter().zip(upper))
                        .all(|(&t, (&lo, &hi))| t > lo && t < hi)
            }
        }
    }
}

/// Named prior families for continuous parameter spaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorFamily {
    Uniform { lower: f64, upper: f64 },
    Beta { alpha: f64, beta: f64 },
    Gamma { shape: f64, rate: f64 },
    Normal { mean: f64, variance: f64 },
}

impl PriorFamily {
    pub fn density(&self, theta: f64) -> f64 {
        match *self {
            PriorFamily::Uniform { lower, upper } => {
                if theta >= lower && theta <= upper {
                    1.0 / (upper - lower)
                } else {
                    0.0
                }
            }
            PriorFamily::Beta { alpha, beta } => {
                if theta <= 0.0 || theta >= 1.0 {
                    return 0.0;
                }
                let ln_norm = ln_gamma(alpha + beta) - ln_gamma(alpha) - ln_gamma(beta);
                (ln_norm + (alpha - 1.0) * theta.ln() + (beta - 1.0) * (1.0 - theta).ln()).exp()
            }
            PriorFamily::Gamma { shape, rate } => {
                if theta <= 0.0 {
                    return 0.0;
                }
                (shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * theta.ln() - rate * theta)
                    .exp()
            }
            PriorFamily::Normal { mean, variance } => {
                let z = theta - mean;
                (-0.5 * z * z / variance).exp() / (2.0 * std::f64::consts::PI * variance).sqrt()
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            PriorFamily::Uniform { lower, upper } => (lower, upper),
            PriorFamily::Beta { .. } => (0.0, 1.0),
            PriorFamily::Gamma { .. } => (0.0, f64::INFINITY),
            PriorFamily::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            PriorFamily::Uniform { lower, upper } => rng.random_range(lower..upper),
            PriorFamily::Beta { alpha, beta } => Beta::new(alpha, beta)
                .expect("validated beta hyperparameters")
                .sample(rng),
            PriorFamily::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate)
                .expect("validated gamma hyperparameters")
                .sample(rng),
            PriorFamily::Normal { mean, variance } => Normal::new(mean, variance.sqrt())
                .expect("validated normal hyperparameters")
                .sample(rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    /// One weight per point of a finite grid.
    Weights(Vec<f64>),
    Density(PriorFamily),
}

/// Either of the two model representations.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Finite(FiniteModel),
    Conjugate(ConjugateModel),
}

impl Model {
    pub fn parameter_space(&self) -> ParameterSpace {
        match self {
            Model::Finite(m) => m.parameter_space(),
            Model::Conjugate(m) => m.parameter_space(),
        }
    }

    pub fn prior(&self) -> Prior {
        match self {
            Model::Finite(m) => Prior::Weights(m.prior().to_vec()),
            Model::Conjugate(m) => Prior::Density(m.prior_family()),
        }
    }

    /// Finite prediction space when one exists (finite tables, Beta-Bernoulli counts).
    pub fn pred_points(&self) -> Option<Vec<Point>> {
        match self {
            Model::Finite(m) => Some(m.pred_space().to_vec()),
            Model::Conjugate(m) => m.pred_points(),
        }
    }

    pub fn obs_points(&self) -> Option<Vec<Point>> {
        match self {
            Model::Finite(m) => Some(m.obs_space().to_vec()),
            Model::Conjugate(m) => m.obs_points(),
        }
    }

    pub fn as_finite(&self) -> Option<&FiniteModel> {
        match self {
            Model::Finite(m) => Some(m),
            Model::Conjugate(_) => None,
        }
    }
}

impl From<FiniteModel> for Model {
    fn from(m: FiniteModel) -> Self {
        Model::Finite(m)
    }
}

impl From<ConjugateModel> for Model {
    fn from(m: ConjugateModel) -> Self {
        Model::Conjugate(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskMethod {
    Exact,
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl RiskMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RiskMethod::Exact => "exact",
            RiskMethod::ClosedForm => "closed-form",
            RiskMethod::Quadrature => "quadrature",
            RiskMethod::MonteCarlo => "monte-carlo",
        }
    }
}

/// A risk value with the method that produced it.
///
/// `error` is an absolute bound for exact and quadrature results and the
/// sample standard error for Monte Carlo results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub value: f64,
    pub method: RiskMethod,
    pub error: f64,
    pub samples: Option<u64>,
}

impl RiskEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            method: RiskMethod::Exact,
            error: 0.0,
            samples: None,
        }
    }

    pub fn closed_form(value: f64) -> Self {
        Self {
            value,
            method: RiskMethod::ClosedForm,
            error: 0.0,
            samples: None,
        }
    }

    pub fn quadrature(value: f64, residual: f64) -> Self {
        Self {
            value,
            method: RiskMethod::Quadrature,
            error: residual,
            samples: None,
        }
    }

    pub fn monte_carlo(value: f64, std_error: f64, samples: u64) -> Self {
        Self {
            value,
            method: RiskMethod::MonteCarlo,
            error: std_error,
            samples: Some(samples),
        }
    }
}
