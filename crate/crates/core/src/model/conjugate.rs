use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};

use super::{ParameterSpace, Point, PriorFamily};
use crate::error::{Error, Result};

/// Conjugate sampling families with i.i.d. observations.
///
/// Observations are passed as their sufficient statistic: the number of
/// successes for Beta-Bernoulli, the sample mean for the normal family and the
/// total count for Gamma-Poisson. Predictions summarise the `n_pred` future
/// draws the same way (success count, mean, total count).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConjugateModel {
    BetaBernoulli {
        alpha: f64,
        beta: f64,
        n_obs: u32,
        n_pred: u32,
    },
    NormalKnownVar {
        prior_mean: f64,
        prior_var: f64,
        noise_var: f64,
        n_obs: u32,
        n_pred: u32,
    },
    GammaPoisson {
        shape: f64,
        rate: f64,
        n_obs: u32,
        n_pred: u32,
    },
}

fn is_count(x: f64) -> bool {
    x.is_finite() && x >= 0.0 && x.fract() == 0.0
}

impl ConjugateModel {
    pub fn beta_bernoulli(alpha: f64, beta: f64, n_obs: u32, n_pred: u32) -> Self {
        ConjugateModel::BetaBernoulli {
            alpha,
            beta,
            n_obs,
            n_pred,
        }
    }

    pub fn normal_known_var(
        prior_mean: f64,
        prior_var: f64,
        noise_var: f64,
        n_obs: u32,
        n_pred: u32,
    ) -> Self {
        ConjugateModel::NormalKnownVar {
            prior_mean,
            prior_var,
            noise_var,
            n_obs,
            n_pred,
        }
    }

    pub fn gamma_poisson(shape: f64, rate: f64, n_obs: u32, n_pred: u32) -> Self {
        ConjugateModel::GammaPoisson {
            shape,
            rate,
            n_obs,
            n_pred,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ConjugateModel::BetaBernoulli { .. } => "beta_bernoulli",
            ConjugateModel::NormalKnownVar { .. } => "normal_known_var",
            ConjugateModel::GammaPoisson { .. } => "gamma_poisson",
        }
    }

    pub fn n_obs(&self) -> u32 {
        match *self {
            ConjugateModel::BetaBernoulli { n_obs, .. }
            | ConjugateModel::NormalKnownVar { n_obs, .. }
            | ConjugateModel::GammaPoisson { n_obs, .. } => n_obs,
        }
    }

    pub fn n_pred(&self) -> u32 {
        match *self {
            ConjugateModel::BetaBernoulli { n_pred, .. }
            | ConjugateModel::NormalKnownVar { n_pred, .. }
            | ConjugateModel::GammaPoisson { n_pred, .. } => n_pred,
        }
    }

    pub fn prior_family(&self) -> PriorFamily {
        match *self {
            ConjugateModel::BetaBernoulli { alpha, beta, .. } => PriorFamily::Beta { alpha, beta },
            ConjugateModel::NormalKnownVar {
                prior_mean,
                prior_var,
                ..
            } => PriorFamily::Normal {
                mean: prior_mean,
                variance: prior_var,
            },
            ConjugateModel::GammaPoisson { shape, rate, .. } => PriorFamily::Gamma { shape, rate },
        }
    }

    pub fn parameter_space(&self) -> ParameterSpace {
        let (lo, hi) = self.prior_family().support();
        ParameterSpace::Interval {
            lower: vec![lo],
            upper: vec![hi],
        }
    }

    pub fn pred_points(&self) -> Option<Vec<Point>> {
        match *self {
            ConjugateModel::BetaBernoulli { n_pred, .. } => {
                Some((0..=n_pred).map(|k| vec![k as f64]).collect())
            }
            _ => None,
        }
    }

    pub fn obs_points(&self) -> Option<Vec<Point>> {
        match *self {
            ConjugateModel::BetaBernoulli { n_obs, .. } => {
                Some((0..=n_obs).map(|s| vec![s as f64]).collect())
            }
            _ => None,
        }
    }

    /// Checks an observation and returns its sufficient statistic.
    ///
    /// Values outside the support of the marginal (non-integer counts,
    /// counts above `n_obs`) have zero evidence and cannot be conditioned on.
    pub fn statistic(&self, y_obs: &[f64]) -> Result<f64> {
        if y_obs.len() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: y_obs.len(),
            });
        }
        let x = y_obs[0];
        let ok = match *self {
            ConjugateModel::BetaBernoulli { n_obs, .. } => is_count(x) && x <= n_obs as f64,
            ConjugateModel::NormalKnownVar { .. } => x.is_finite(),
            ConjugateModel::GammaPoisson { .. } => is_count(x),
        };
        if ok {
            Ok(x)
        } else {
            Err(Error::ConditioningUndefined {
                obs: y_obs.to_vec(),
            })
        }
    }

    pub fn check_theta(&self, theta: &[f64]) -> Result<f64> {
        if self.parameter_space().contains(theta) {
            Ok(theta[0])
        } else {
            Err(Error::ThetaOutsideSpace {
                theta: theta.to_vec(),
            })
        }
    }

    /// Draws the observed statistic given θ.
    pub fn sample_obs<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> f64 {
        self.sample_summary(theta, self.n_obs(), rng)
    }

    /// Draws the predicted summary given θ.
    pub fn sample_pred<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> f64 {
        self.sample_summary(theta, self.n_pred(), rng)
    }

    fn sample_summary<R: Rng + ?Sized>(&self, theta: f64, n: u32, rng: &mut R) -> f64 {
        match *self {
            ConjugateModel::BetaBernoulli { .. } => Binomial::new(n as u64, theta)
                .expect("theta in (0, 1)")
                .sample(rng) as f64,
            ConjugateModel::NormalKnownVar { noise_var, .. } => {
                Normal::new(theta, (noise_var / n as f64).sqrt())
                    .expect("positive variance")
                    .sample(rng)
            }
            ConjugateModel::GammaPoisson { .. } => {
                let lambda = theta * n as f64;
                if lambda <= 0.0 {
                    0.0
                } else {
                    Poisson::new(lambda).expect("positive rate").sample(rng)
                }
            }
        }
    }
}
