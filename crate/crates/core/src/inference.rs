//! Posteriors, marginal evidence and posterior predictive distributions.

use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution, Gamma, Normal as NormalSampler, Poisson};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::{
    ConjugateModel, FiniteModel, LossForm, LossSpec, Model, Point, PointSummary, PriorFamily,
};
use crate::numerics::seeded_rng;

/// Probabilities within this distance of the maximum count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// A distribution over finitely many points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    support: Vec<Point>,
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(support: Vec<Point>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                found: probs.len(),
            });
        }
        if support.is_empty() {
            return Err(Error::InvalidArgument("empty support".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "probabilities must be nonnegative, got {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        for (i, p) in support.iter().enumerate() {
            if support[..i].contains(p) {
                return Err(Error::InvalidArgument(format!("duplicate support point {p:?}")));
            }
        }
        Ok(Self { support, probs })
    }

    pub fn point_mass(at: Point) -> Self {
        Self {
            support: vec![at],
            probs: vec![1.0],
        }
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_of(&self, point: &[f64]) -> f64 {
        self.support
            .iter()
            .position(|p| p.as_slice() == point)
            .map_or(0.0, |i| self.probs[i])
    }

    pub fn dimension(&self) -> usize {
        self.support[0].len()
    }

    /// Componentwise mean.
    pub fn mean(&self) -> Point {
        let mut m = vec![0.0; self.dimension()];
        for (p, &w) in self.support.iter().zip(&self.probs) {
            for (acc, x) in m.iter_mut().zip(p) {
                *acc += w * x;
            }
        }
        m
    }

    pub fn variance(&self) -> Point {
        let mean = self.mean();
        let mut v = vec![0.0; self.dimension()];
        for (p, &w) in self.support.iter().zip(&self.probs) {
            for ((acc, x), mu) in v.iter_mut().zip(p).zip(&mean) {
                *acc += w * (x - mu) * (x - mu);
            }
        }
        v
    }

    /// Index of the highest-probability point, lowest index among ties.
    pub fn mode_index(&self) -> usize {
        let max = self.probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        self.probs
            .iter()
            .position(|&p| p >= max - TIE_TOL)
            .expect("nonempty support")
    }

    /// Smallest support value `m` with `CDF(m) >= 1/2`. Scalar supports only.
    pub fn median(&self) -> Result<Point> {
        if self.dimension() != 1 {
            return Err(Error::Unsupported(
                "median of a multivariate predictive".into(),
            ));
        }
        Ok(vec![self.quantile(0.5)])
    }

    /// Smallest support value whose CDF reaches `q`. Scalar supports only.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut order: Vec<usize> = (0..self.support.len()).collect();
        order.sort_by(|&a, &b| self.support[a][0].total_cmp(&self.support[b][0]));
        let mut cdf = 0.0;
        for &i in &order {
            cdf += self.probs[i];
            if cdf >= q - TIE_TOL {
                return self.support[i][0];
            }
        }
        self.support[*order.last().expect("nonempty")][0]
    }

    /// `Σ_y L(ŷ, y) p(y)`. Table losses index the support as the prediction space.
    pub fn expected_loss(&self, y_hat: &[f64], loss: &LossSpec) -> Result<f64> {
        if y_hat.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: y_hat.len(),
            });
        }
        match loss.form() {
            LossForm::Table { .. } => {
                loss.check(Some(self.support.len()))?;
                let i = self
                    .support
                    .iter()
                    .position(|p| p.as_slice() == y_hat)
                    .ok_or_else(|| Error::NotInPredSpace {
                        value: y_hat.to_vec(),
                    })?;
                Ok(self.expected_loss_at_index(i, loss))
            }
            _ => Ok(self
                .support
                .iter()
                .zip(&self.probs)
                .map(|(y, &p)| p * loss.pointwise(y_hat, y))
                .sum()),
        }
    }

    pub(crate) fn expected_loss_at_index(&self, i: usize, loss: &LossSpec) -> f64 {
        (0..self.support.len())
            .map(|j| self.probs[j] * loss.indexed(i, j, &self.support))
            .sum()
    }
}

/// Closed-form predictive families, parameterised after the posterior update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormPredictive {
    /// Number of successes in `n` future trials.
    BetaBinomial { alpha: f64, beta: f64, n: u32 },
    Normal { mean: f64, variance: f64 },
    /// `P(k) = Γ(k+r) / (Γ(r) k!) · prob^r · (1-prob)^k` with `r = shape`.
    NegativeBinomial { shape: f64, prob: f64 },
}

const TAIL: f64 = 1e-15;

impl ClosedFormPredictive {
    pub fn family(&self) -> &'static str {
        match self {
            ClosedFormPredictive::BetaBinomial { .. } => "beta-binomial",
            ClosedFormPredictive::Normal { .. } => "normal",
            ClosedFormPredictive::NegativeBinomial { .. } => "negative-binomial",
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, ClosedFormPredictive::Normal { .. })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ClosedFormPredictive::BetaBinomial { alpha, beta, n } => {
                n as f64 * alpha / (alpha + beta)
            }
            ClosedFormPredictive::Normal { mean, .. } => mean,
            ClosedFormPredictive::NegativeBinomial { shape, prob } => shape * (1.0 - prob) / prob,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            ClosedFormPredictive::BetaBinomial { alpha, beta, n } => {
                let n = n as f64;
                let s = alpha + beta;
                n * alpha * beta * (s + n) / (s * s * (s + 1.0))
            }
            ClosedFormPredictive::Normal { variance, .. } => variance,
            ClosedFormPredictive::NegativeBinomial { shape, prob } => {
                shape * (1.0 - prob) / (prob * prob)
            }
        }
    }

    /// Probability mass at `k` for the discrete families.
    pub fn pmf(&self, k: u64) -> f64 {
        match *self {
            ClosedFormPredictive::BetaBinomial { alpha, beta, n } => {
                if k > n as u64 {
                    return 0.0;
                }
                let (n, k) = (n as f64, k as f64);
                let ln_choose = ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0);
                (ln_choose + ln_beta(k + alpha, n - k + beta) - ln_beta(alpha, beta)).exp()
            }
            ClosedFormPredictive::NegativeBinomial { shape, prob } => {
                let k = k as f64;
                (ln_gamma(k + shape) - ln_gamma(shape) - ln_gamma(k + 1.0)
                    + shape * prob.ln()
                    + k * (1.0 - prob).ln())
                .exp()
            }
            ClosedFormPredictive::Normal { .. } => 0.0,
        }
    }

    /// Density for the normal family.
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            ClosedFormPredictive::Normal { mean, variance } => normal(mean, variance).pdf(x),
            _ => 0.0,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ClosedFormPredictive::Normal { mean, variance } => normal(mean, variance).cdf(x),
            _ => {
                if x < 0.0 {
                    return 0.0;
                }
                let top = x.floor() as u64;
                if let ClosedFormPredictive::BetaBinomial { n, .. } = *self {
                    if top >= n as u64 {
                        return 1.0;
                    }
                }
                (0..=top).map(|k| self.pmf(k)).sum::<f64>().min(1.0)
            }
        }
    }

    /// Smallest `x` with `CDF(x) >= q` (continuous inverse for the normal family).
    pub fn quantile(&self, q: f64) -> f64 {
        match *self {
            ClosedFormPredictive::Normal { mean, variance } => {
                normal(mean, variance).inverse_cdf(q)
            }
            _ => {
                let mut cdf = 0.0;
                let mut k = 0u64;
                loop {
                    cdf += self.pmf(k);
                    if cdf >= q - TIE_TOL || self.past_support(k) {
                        return k as f64;
                    }
                    k += 1;
                }
            }
        }
    }

    fn past_support(&self, k: u64) -> bool {
        match *self {
            ClosedFormPredictive::BetaBinomial { n, .. } => k >= n as u64,
            // Guard against unbounded scans when q rounds above the reachable mass.
            _ => k > 10_000_000,
        }
    }

    /// Last support point worth scanning: everything above carries < 1e-15 mass.
    pub fn scan_limit(&self) -> u64 {
        match *self {
            ClosedFormPredictive::BetaBinomial { n, .. } => n as u64,
            ClosedFormPredictive::NegativeBinomial { .. } => self.quantile(1.0 - TAIL) as u64 + 1,
            ClosedFormPredictive::Normal { .. } => 0,
        }
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// Highest-probability point (lowest on ties); the mean for the normal family.
    pub fn mode(&self) -> f64 {
        match *self {
            ClosedFormPredictive::Normal { mean, .. } => mean,
            _ => {
                let probs: Vec<f64> = (0..=self.scan_limit()).map(|k| self.pmf(k)).collect();
                let max = probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                probs
                    .iter()
                    .position(|&p| p >= max - TIE_TOL)
                    .expect("nonempty") as f64
            }
        }
    }

    /// Expected loss of predicting `y_hat`, computed in closed form or by a
    /// finite sum over the support.
    pub fn expected_loss(&self, y_hat: f64, loss: &LossSpec) -> Result<f64> {
        let scale = loss.scale();
        let base = match (loss.form(), *self) {
            (LossForm::Table { .. }, ClosedFormPredictive::BetaBinomial { n, .. }) => {
                loss.check(Some(n as usize + 1))?;
                if !(y_hat >= 0.0 && y_hat <= n as f64 && y_hat.fract() == 0.0) {
                    return Err(Error::NotInPredSpace { value: vec![y_hat] });
                }
                let i = y_hat as usize;
                let support: Vec<Point> = (0..=n).map(|k| vec![k as f64]).collect();
                return Ok((0..=n as usize)
                    .map(|j| self.pmf(j as u64) * loss.indexed(i, j, &support))
                    .sum());
            }
            (LossForm::Table { .. }, _) => {
                return Err(Error::Unsupported(
                    "table loss requires a finite prediction space".into(),
                ))
            }
            (LossForm::Squared, _) => {
                let bias = y_hat - self.mean();
                self.variance() + bias * bias
            }
            (LossForm::Absolute, ClosedFormPredictive::Normal { mean, variance }) => {
                let sd = variance.sqrt();
                let z = (y_hat - mean) / sd;
                let std = normal(0.0, 1.0);
                sd * (2.0 * std.pdf(z) + z * (2.0 * std.cdf(z) - 1.0))
            }
            (LossForm::ZeroOne { band }, ClosedFormPredictive::Normal { mean, variance }) => {
                let dist = normal(mean, variance);
                1.0 - (dist.cdf(y_hat + band) - dist.cdf(y_hat - band))
            }
            (LossForm::Absolute, _) => {
                // E|Y - ŷ| = (E[Y] - ŷ) + 2 E[(ŷ - Y)+]
                let below: f64 = if y_hat < 0.0 {
                    0.0
                } else {
                    (0..=y_hat.floor() as u64)
                        .map(|k| (y_hat - k as f64) * self.pmf(k))
                        .sum()
                };
                (self.mean() - y_hat + 2.0 * below).max(0.0)
            }
            (LossForm::ZeroOne { band }, _) => {
                let lo = (y_hat - band).ceil().max(0.0);
                let hi = (y_hat + band).floor();
                let inside: f64 = if hi < lo {
                    0.0
                } else {
                    (lo as u64..=hi as u64).map(|k| self.pmf(k)).sum()
                };
                (1.0 - inside).max(0.0)
            }
        };
        Ok(scale * base)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ClosedFormPredictive::BetaBinomial { alpha, beta, n } => {
                let p = Beta::new(alpha, beta).expect("positive shapes").sample(rng);
                Binomial::new(n as u64, p).expect("p in [0, 1]").sample(rng) as f64
            }
            ClosedFormPredictive::Normal { mean, variance } => {
                NormalSampler::new(mean, variance.sqrt())
                    .expect("positive variance")
                    .sample(rng)
            }
            ClosedFormPredictive::NegativeBinomial { shape, prob } => {
                let lambda = Gamma::new(shape, (1.0 - prob) / prob)
                    .expect("positive shape")
                    .sample(rng);
                if lambda <= 0.0 {
                    0.0
                } else {
                    Poisson::new(lambda).expect("positive rate").sample(rng)
                }
            }
        }
    }
}

fn normal(mean: f64, variance: f64) -> Normal {
    Normal::new(mean, variance.sqrt()).expect("validated normal parameters")
}

/// Posterior predictive distribution `p(y_pred | y_obs)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictive {
    Discrete(DiscreteDistribution),
    ClosedForm(ClosedFormPredictive),
}

impl Predictive {
    pub fn mean(&self) -> Point {
        match self {
            Predictive::Discrete(d) => d.mean(),
            Predictive::ClosedForm(c) => vec![c.mean()],
        }
    }

    pub fn summary(&self, summary: PointSummary) -> Result<Point> {
        match (self, summary) {
            (_, PointSummary::Mean) => Ok(self.mean()),
            (Predictive::Discrete(d), PointSummary::Median) => d.median(),
            (Predictive::Discrete(d), PointSummary::Mode) => Ok(d.support[d.mode_index()].clone()),
            (Predictive::ClosedForm(c), PointSummary::Median) => Ok(vec![c.median()]),
            (Predictive::ClosedForm(c), PointSummary::Mode) => Ok(vec![c.mode()]),
        }
    }

    pub fn expected_loss(&self, y_hat: &[f64], loss: &LossSpec) -> Result<f64> {
        match self {
            Predictive::Discrete(d) => d.expected_loss(y_hat, loss),
            Predictive::ClosedForm(c) => {
                if y_hat.len() != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: 1,
                        found: y_hat.len(),
                    });
                }
                c.expected_loss(y_hat[0], loss)
            }
        }
    }

    /// Central bracket between the `1e-6` and `1 - 1e-6` quantiles (scalar only).
    pub fn bracket(&self) -> Result<(f64, f64)> {
        const Q: f64 = 1e-6;
        match self {
            Predictive::Discrete(d) => {
                if d.dimension() != 1 {
                    return Err(Error::Unsupported(
                        "scalar minimisation over a multivariate predictive".into(),
                    ));
                }
                Ok((d.quantile(Q), d.quantile(1.0 - Q)))
            }
            Predictive::ClosedForm(c) => Ok((c.quantile(Q), c.quantile(1.0 - Q))),
        }
    }
}

/// Posterior over the parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Posterior {
    /// Weights over the finite parameter grid.
    Discrete(DiscreteDistribution),
    /// Updated conjugate prior.
    Updated(PriorFamily),
}

/// `p(y_obs) = Σ_θ Σ_{y_pred} t[θ][y_pred][y_obs] g(θ)` for a finite model.
pub fn finite_evidence(model: &FiniteModel, obs: usize) -> f64 {
    model
        .prior()
        .iter()
        .enumerate()
        .map(|(t, &g)| g * model.obs_likelihood(t, obs))
        .sum()
}

fn conditionable(model: &FiniteModel, obs: usize) -> Result<f64> {
    let evidence = finite_evidence(model, obs);
    if evidence > 0.0 {
        Ok(evidence)
    } else {
        Err(Error::ConditioningUndefined {
            obs: model.obs_space()[obs].clone(),
        })
    }
}

/// Posterior weights over θ given observation index `obs`.
pub fn finite_posterior(model: &FiniteModel, obs: usize) -> Result<Vec<f64>> {
    let evidence = conditionable(model, obs)?;
    Ok((0..model.n_theta())
        .map(|t| model.prior()[t] * model.obs_likelihood(t, obs) / evidence)
        .collect())
}

/// Predictive probabilities over the prediction space by conditioning the
/// prior-mixed joint table on observation index `obs`.
pub fn finite_predictive(model: &FiniteModel, obs: usize) -> Result<Vec<f64>> {
    let evidence = conditionable(model, obs)?;
    Ok((0..model.n_pred())
        .map(|k| {
            let mass: f64 = (0..model.n_theta())
                .map(|t| model.prior()[t] * model.joint(t, k, obs))
                .sum();
            mass / evidence
        })
        .collect())
}

fn finite_obs_index(model: &FiniteModel, y_obs: &[f64]) -> Result<usize> {
    if y_obs.len() != model.obs_space()[0].len() {
        return Err(Error::DimensionMismatch {
            expected: model.obs_space()[0].len(),
            found: y_obs.len(),
        });
    }
    model
        .obs_index(y_obs)
        .ok_or_else(|| Error::ConditioningUndefined {
            obs: y_obs.to_vec(),
        })
}

fn conjugate_posterior(model: &ConjugateModel, stat: f64) -> PriorFamily {
    match *model {
        ConjugateModel::BetaBernoulli {
            alpha, beta, n_obs, ..
        } => PriorFamily::Beta {
            alpha: alpha + stat,
            beta: beta + n_obs as f64 - stat,
        },
        ConjugateModel::NormalKnownVar {
            prior_mean,
            prior_var,
            noise_var,
            n_obs,
            ..
        } => {
            let precision = 1.0 / prior_var + n_obs as f64 / noise_var;
            let variance = 1.0 / precision;
            PriorFamily::Normal {
                mean: variance * (prior_mean / prior_var + n_obs as f64 * stat / noise_var),
                variance,
            }
        }
        ConjugateModel::GammaPoisson {
            shape, rate, n_obs, ..
        } => PriorFamily::Gamma {
            shape: shape + stat,
            rate: rate + n_obs as f64,
        },
    }
}

pub fn posterior(model: &Model, y_obs: &[f64]) -> Result<Posterior> {
    match model {
        Model::Finite(m) => {
            let s = finite_obs_index(m, y_obs)?;
            let weights = finite_posterior(m, s)?;
            Ok(Posterior::Discrete(DiscreteDistribution {
                support: m.theta_points().to_vec(),
                probs: weights,
            }))
        }
        Model::Conjugate(m) => {
            let stat = m.statistic(y_obs)?;
            Ok(Posterior::Updated(conjugate_posterior(m, stat)))
        }
    }
}

/// Marginal probability (or density, for the normal family) of `y_obs`.
/// Observations outside the observation space have evidence 0.
pub fn marginal_evidence(model: &Model, y_obs: &[f64]) -> Result<f64> {
    match model {
        Model::Finite(m) => match finite_obs_index(m, y_obs) {
            Ok(s) => Ok(finite_evidence(m, s)),
            Err(Error::ConditioningUndefined { .. }) => Ok(0.0),
            Err(e) => Err(e),
        },
        Model::Conjugate(m) => {
            let stat = match m.statistic(y_obs) {
                Ok(s) => s,
                Err(Error::ConditioningUndefined { .. }) => return Ok(0.0),
                Err(e) => return Err(e),
            };
            Ok(match *m {
                ConjugateModel::BetaBernoulli {
                    alpha, beta, n_obs, ..
                } => ClosedFormPredictive::BetaBinomial {
                    alpha,
                    beta,
                    n: n_obs,
                }
                .pmf(stat as u64),
                ConjugateModel::NormalKnownVar {
                    prior_mean,
                    prior_var,
                    noise_var,
                    n_obs,
                    ..
                } => normal(prior_mean, prior_var + noise_var / n_obs as f64).pdf(stat),
                ConjugateModel::GammaPoisson {
                    shape, rate, n_obs, ..
                } => ClosedFormPredictive::NegativeBinomial {
                    shape,
                    prob: rate / (rate + n_obs as f64),
                }
                .pmf(stat as u64),
            })
        }
    }
}

pub(crate) fn conjugate_predictive(model: &ConjugateModel, stat: f64) -> ClosedFormPredictive {
    match (conjugate_posterior(model, stat), *model) {
        (PriorFamily::Beta { alpha, beta }, ConjugateModel::BetaBernoulli { n_pred, .. }) => {
            ClosedFormPredictive::BetaBinomial {
                alpha,
                beta,
                n: n_pred,
            }
        }
        (
            PriorFamily::Normal { mean, variance },
            ConjugateModel::NormalKnownVar {
                noise_var, n_pred, ..
            },
        ) => ClosedFormPredictive::Normal {
            mean,
            variance: variance + noise_var / n_pred as f64,
        },
        (PriorFamily::Gamma { shape, rate }, ConjugateModel::GammaPoisson { n_pred, .. }) => {
            ClosedFormPredictive::NegativeBinomial {
                shape,
                prob: rate / (rate + n_pred as f64),
            }
        }
        _ => unreachable!("posterior family matches the model"),
    }
}

pub fn posterior_predictive(model: &Model, y_obs: &[f64]) -> Result<Predictive> {
    match model {
        Model::Finite(m) => {
            let s = finite_obs_index(m, y_obs)?;
            Ok(Predictive::Discrete(DiscreteDistribution {
                support: m.pred_space().to_vec(),
                probs: finite_predictive(m, s)?,
            }))
        }
        Model::Conjugate(m) => {
            let stat = m.statistic(y_obs)?;
            Ok(Predictive::ClosedForm(conjugate_predictive(m, stat)))
        }
    }
}

/// `count` i.i.d. draws from a predictive, reproducible from `seed`.
pub fn sample_predictive(predictive: &Predictive, count: usize, seed: u64) -> Result<Vec<Point>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let mut rng = seeded_rng(seed);
    Ok(match predictive {
        Predictive::Discrete(d) => {
            let mut cdf = Vec::with_capacity(d.probs.len());
            let mut acc = 0.0;
            for p in &d.probs {
                acc += p;
                cdf.push(acc);
            }
            (0..count)
                .map(|_| {
                    let u: f64 = rng.random::<f64>() * acc;
                    let i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                    d.support[i].clone()
                })
                .collect()
        }
        Predictive::ClosedForm(c) => (0..count).map(|_| vec![c.sample(&mut rng)]).collect(),
    })
}
