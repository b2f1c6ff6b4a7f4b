//! Frequentist prediction risk, Bayes prediction risk, posterior predictive
//! risk and risk curves over the parameter space.
//!
//! Method precedence is exact summation (both spaces finite), then closed
//! form, then Monte Carlo with a caller-supplied sample count and seed.

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::inference::{self, ClosedFormPredictive, Predictive};
use crate::model::{
    evaluate_loss, ConjugateModel, FiniteModel, LossForm, LossSpec, Model, Point, PointSummary,
    PredictionRule, RiskEstimate,
};
use crate::numerics::{seeded_rng, simpson_richardson};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodPreference {
    /// Exact, then closed form, then Monte Carlo.
    Auto,
    /// Always estimate by simulation.
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskOptions {
    pub mc_samples: u64,
    pub seed: u64,
    pub preference: MethodPreference,
}

impl Default for RiskOptions {
    fn default() -> Self {
        Self {
            mc_samples: 100_000,
            seed: 0,
            preference: MethodPreference::Auto,
        }
    }
}

impl RiskOptions {
    pub fn monte_carlo(mc_samples: u64, seed: u64) -> Self {
        Self {
            mc_samples,
            seed,
            preference: MethodPreference::MonteCarlo,
        }
    }
}

/// Per-(θ, y_obs, candidate) expected loss over predictions for a finite
/// model: `A[θ][s][c] = Σ_k L(c, k) t[θ][k][s]`. The frequentist risk of a
/// table rule at θ is then `Σ_s A[θ][s][rule(s)]`.
#[derive(Debug, Clone)]
pub struct RiskKernel {
    n_theta: usize,
    n_obs: usize,
    n_pred: usize,
    cells: Vec<f64>,
}

impl RiskKernel {
    pub fn new(model: &FiniteModel, loss: &LossSpec) -> Result<Self> {
        let matrix = loss.matrix(model.pred_space())?;
        let (n_theta, n_obs, n_pred) = (model.n_theta(), model.n_obs(), model.n_pred());
        let mut cells = Vec::with_capacity(n_theta * n_obs * n_pred);
        for t in 0..n_theta {
            for s in 0..n_obs {
                for c in 0..n_pred {
                    cells.push(
                        (0..n_pred)
                            .map(|k| matrix[c * n_pred + k] * model.joint(t, k, s))
                            .sum(),
                    );
                }
            }
        }
        Ok(Self {
            n_theta,
            n_obs,
            n_pred,
            cells,
        })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn frequentist(&self, theta: usize, table: &[usize]) -> f64 {
        let base = theta * self.n_obs * self.n_pred;
        table
            .iter()
            .enumerate()
            .map(|(s, &c)| self.cells[base + s * self.n_pred + c])
            .sum()
    }

    /// Frequentist risk at every grid point.
    pub fn profile(&self, table: &[usize]) -> Vec<f64> {
        (0..self.n_theta)
            .map(|t| self.frequentist(t, table))
            .collect()
    }
}

fn finite_table<'a>(model: &FiniteModel, rule: &'a PredictionRule) -> Result<&'a [usize]> {
    let table = rule.as_table().ok_or_else(|| {
        Error::RuleMismatch("finite models take table rules".into())
    })?;
    rule.check(&Model::Finite(model.clone()))?;
    Ok(table)
}

/// Expected loss of `rule` with θ held fixed, averaging over both `y_obs`
/// and `y_pred`.
pub fn frequentist_prediction_risk(
    model: &Model,
    rule: &PredictionRule,
    theta: &[f64],
    loss: &LossSpec,
    opts: &RiskOptions,
) -> Result<RiskEstimate> {
    match model {
        Model::Finite(m) => {
            let t = m.theta_index(theta).ok_or_else(|| Error::ThetaOutsideSpace {
                theta: theta.to_vec(),
            })?;
            let table = finite_table(m, rule)?;
            Ok(RiskEstimate::exact(
                RiskKernel::new(m, loss)?.frequentist(t, table),
            ))
        }
        Model::Conjugate(c) => {
            let theta = c.check_theta(theta)?;
            rule.check(model)?;
            conjugate_frequentist(model, c, rule, theta, loss, opts)
        }
    }
}

fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    // Recurrence on the pmf ratio, normalised to absorb rounding.
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut log_c = 0.0f64;
    for k in 0..=n {
        if k > 0 {
            log_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        out.push((log_c + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp());
    }
    let total: f64 = out.iter().sum();
    out.iter().map(|v| v / total).collect()
}

/// Poisson(μ) probabilities up to `μ + 12√μ + 30`, past which the
/// remaining mass is below 1e-20.
fn poisson_pmf(mu: f64) -> Vec<f64> {
    if mu <= 0.0 {
        return vec![1.0];
    }
    let top = (mu + 12.0 * mu.sqrt() + 30.0).ceil() as u64;
    (0..=top)
        .map(|k| {
            let k = k as f64;
            (k * mu.ln() - mu - ln_gamma(k + 1.0)).exp()
        })
        .collect()
}

fn conjugate_frequentist(
    model: &Model,
    c: &ConjugateModel,
    rule: &PredictionRule,
    theta: f64,
    loss: &LossSpec,
    opts: &RiskOptions,
) -> Result<RiskEstimate> {
    if opts.preference == MethodPreference::MonteCarlo {
        return mc_frequentist(model, c, rule, theta, loss, opts);
    }
    match *c {
        ConjugateModel::BetaBernoulli { n_obs, n_pred, .. } => {
            let pred_points = c.pred_points();
            let obs_pmf = binomial_pmf(n_obs, theta);
            let pred_pmf = binomial_pmf(n_pred, theta);
            let mut total = 0.0;
            for (s, ps) in obs_pmf.iter().enumerate() {
                let y_hat = rule.predict(model, &[s as f64])?;
                let inner: f64 = pred_pmf
                    .iter()
                    .enumerate()
                    .map(|(k, pk)| {
                        evaluate_loss(loss, &y_hat, &[k as f64], pred_points.as_deref())
                            .map(|l| l * pk)
                    })
                    .sum::<Result<f64>>()?;
                total += ps * inner;
            }
            Ok(RiskEstimate::exact(total))
        }
        ConjugateModel::NormalKnownVar {
            prior_mean,
            prior_var,
            noise_var,
            n_obs,
            n_pred,
        } if matches!(rule, PredictionRule::ClosedForm(_)) => {
            // Every summary of the normal predictive is the posterior mean,
            // affine in ȳ: ŷ = c + w·ȳ.
            let (n, m) = (n_obs as f64, n_pred as f64);
            let post_var = 1.0 / (1.0 / prior_var + n / noise_var);
            let w = post_var * n / noise_var;
            let c0 = post_var * prior_mean / prior_var;
            let diff = ClosedFormPredictive::Normal {
                mean: c0 + w * theta - theta,
                variance: w * w * noise_var / n + noise_var / m,
            };
            Ok(RiskEstimate::closed_form(diff.expected_loss(0.0, loss)?))
        }
        ConjugateModel::GammaPoisson {
            shape,
            rate,
            n_obs,
            n_pred,
        } if matches!(loss.form(), LossForm::Squared)
            && *rule == PredictionRule::ClosedForm(PointSummary::Mean) =>
        {
            // ŷ = c + d·S with S ~ Poisson(nθ), Y ~ Poisson(mθ).
            let (n, m) = (n_obs as f64, n_pred as f64);
            let d = m / (rate + n);
            let c0 = shape * d;
            let bias = c0 + d * n * theta - m * theta;
            let value = bias * bias + d * d * n * theta + m * theta;
            Ok(RiskEstimate::closed_form(loss.scale() * value))
        }
        ConjugateModel::GammaPoisson { n_obs, n_pred, .. } => {
            let obs_pmf = poisson_pmf(n_obs as f64 * theta);
            let pred_pmf = poisson_pmf(n_pred as f64 * theta);
            let mut total = 0.0;
            for (s, ps) in obs_pmf.iter().enumerate() {
                let y_hat = rule.predict(model, &[s as f64])?;
                let inner: f64 = pred_pmf
                    .iter()
                    .enumerate()
                    .map(|(k, pk)| evaluate_loss(loss, &y_hat, &[k as f64], None).map(|l| l * pk))
                    .sum::<Result<f64>>()?;
                total += ps * inner;
            }
            Ok(RiskEstimate::exact(total))
        }
        _ => mc_frequentist(model, c, rule, theta, loss, opts),
    }
}

struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn new() -> Self {
        Self {
            n: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn estimate(&self) -> RiskEstimate {
        let se = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        RiskEstimate::monte_carlo(self.mean, se, self.n)
    }
}

fn check_samples(opts: &RiskOptions) -> Result<()> {
    if opts.mc_samples == 0 {
        Err(Error::InvalidArgument(
            "Monte Carlo needs at least one sample".into(),
        ))
    } else {
        Ok(())
    }
}

fn mc_frequentist(
    model: &Model,
    c: &ConjugateModel,
    rule: &PredictionRule,
    theta: f64,
    loss: &LossSpec,
    opts: &RiskOptions,
) -> Result<RiskEstimate> {
    check_samples(opts)?;
    let mut rng = seeded_rng(opts.seed);
    let pred_points = c.pred_points();
    let mut acc = Moments::new();
    for _ in 0..opts.mc_samples {
        let s = c.sample_obs(theta, &mut rng);
        let y = c.sample_pred(theta, &mut rng);
        let y_hat = rule.predict(model, &[s])?;
        acc.push(evaluate_loss(loss, &y_hat, &[y], pred_points.as_deref())?);
    }
    Ok(acc.estimate())
}

/// Expected loss over the full joint of `(Y_pred, Y_obs, θ)`.
pub fn bayes_prediction_risk(
    model: &Model,
    rule: &PredictionRule,
    loss: &LossSpec,
    opts: &RiskOptions,
) -> Result<RiskEstimate> {
    match model {
        Model::Finite(m) => {
            let table = finite_table(m, rule)?;
            let kernel = RiskKernel::new(m, loss)?;
            let value = m
                .prior()
                .iter()
                .enumerate()
                .map(|(t, &g)| g * kernel.frequentist(t, table))
                .sum();
            Ok(RiskEstimate::exact(value))
        }
        Model::Conjugate(c) => {
            rule.check(model)?;
            conjugate_bayes(model, c, rule, loss, opts)
        }
    }
}

fn conjugate_bayes(
    model: &Model,
    c: &ConjugateModel,
    rule: &PredictionRule,
    loss: &LossSpec,
    opts: &RiskOptions,
) -> Result<RiskEstimate> {
    if opts.preference == MethodPreference::MonteCarlo {
        return mc_bayes(model, c, rule, loss, opts);
    }
    match *c {
        ConjugateModel::BetaBernoulli { n_obs, .. } => {
            // Σ_s p(s) · E[L(rule(s), Y_pred) | s]
            let mut total = 0.0;
            for s in 0..=n_obs {
                let y = [s as f64];
                let evidence = inference::marginal_evidence(model, &y)?;
                let y_hat = rule.predict(model, &y)?;
                let predictive = inference::conjugate_predictive(c, s as f64);
                total += evidence * predictive.expected_loss(y_hat[0], loss)?;
            }
            Ok(RiskEstimate::exact(total))
        }
        ConjugateModel::NormalKnownVar {
            prior_mean,
            prior_var,
            noise_var,
            n_obs,
            ..
        } => {
            if let PredictionRule::ClosedForm(_) = rule {
                // The predictive variance does not depend on ȳ and every
                // summary sits at the predictive mean.
                let predictive = inference::conjugate_predictive(c, prior_mean);
                let centred = ClosedFormPredictive::Normal {
                    mean: 0.0,
                    variance: predictive.variance(),
                };
                return Ok(RiskEstimate::closed_form(centred.expected_loss(0.0, loss)?));
            }
            // ∫ p(ȳ) · E[L(rule(ȳ), Y_pred) | ȳ] dȳ
            let sd = (prior_var + noise_var / n_obs as f64).sqrt();
            let integrand = |y: f64| -> f64 {
                let evidence = inference::marginal_evidence(model, &[y]).unwrap_or(f64::NAN);
                let y_hat = match rule.predict(model, &[y]) {
                    Ok(v) => v[0],
                    Err(_) => return f64::NAN,
                };
                evidence
                    * inference::conjugate_predictive(c, y)
                        .expected_loss(y_hat, loss)
                        .unwrap_or(f64::NAN)
            };
            let q = simpson_richardson(
                integrand,
                prior_mean - 12.0 * sd,
                prior_mean + 12.0 * sd,
                1e-10,
            );
            if !q.value.is_finite() {
                return Err(Error::UnboundedObjective);
            }
            Ok(RiskEstimate::quadrature(q.value, q.residual))
        }
        ConjugateModel::GammaPoisson {
            shape,
            rate,
            n_obs,
            n_pred,
        } if matches!(loss.form(), LossForm::Squared)
            && *rule == PredictionRule::ClosedForm(PointSummary::Mean) =>
        {
            // E_S[Var(Y_pred | S)] with Var = (a + S) m (b' + m) / b'^2.
            let (n, m) = (n_obs as f64, n_pred as f64);
            let post_rate = rate + n;
            let mean_shape = shape + n * shape / rate;
            let value = mean_shape * m * (post_rate + m) / (post_rate * post_rate);
            Ok(RiskEstimate::closed_form(loss.scale() * value))
        }
        ConjugateModel::GammaPoisson {
            shape, rate, n_obs, ..
        } => {
            // Σ_s p(s) · E[L(rule(s), Y_pred) | s], truncated where the
            // negative-binomial evidence has under 1e-15 mass left.
            let evidence = ClosedFormPredictive::NegativeBinomial {
                shape,
                prob: rate / (rate + n_obs as f64),
            };
            let mut total = 0.0;
            for s in 0..=evidence.scan_limit() {
                let y_hat = rule.predict(model, &[s as f64])?;
                let predictive = inference::conjugate_predictive(c, s as f64);
                total += evidence.pmf(s) * predictive.expected_loss(y_hat[0], loss)?;
            }
            Ok(RiskEstimate::exact(total))
        }
    }
}

fn mc_bayes(
    model: &Model,
    c: &ConjugateModel,
    rule: &PredictionRule,
    loss: &LossSpec,
    opts: &RiskOptions,
) -> Result<RiskEstimate> {
    check_samples(opts)?;
    let mut rng = seeded_rng(opts.seed);
    let prior = c.prior_family();
    let pred_points = c.pred_points();
    let mut acc = Moments::new();
    for _ in 0..opts.mc_samples {
        let theta = prior.sample(&mut rng);
        let s = c.sample_obs(theta, &mut rng);
        let y = c.sample_pred(theta, &mut rng);
        let y_hat = rule.predict(model, &[s])?;
        acc.push(evaluate_loss(loss, &y_hat, &[y], pred_points.as_deref())?);
    }
    Ok(acc.estimate())
}

/// `E[L(ŷ, Y_pred) | y_obs]`.
pub fn posterior_predictive_risk(
    model: &Model,
    y_obs: &[f64],
    y_hat: &[f64],
    loss: &LossSpec,
    opts: &RiskOptions,
) -> Result<RiskEstimate> {
    let predictive = inference::posterior_predictive(model, y_obs)?;
    if opts.preference == MethodPreference::MonteCarlo {
        check_samples(opts)?;
        let pred_points = model.pred_points();
        let draws = inference::sample_predictive(&predictive, opts.mc_samples as usize, opts.seed)?;
        let mut acc = Moments::new();
        for y in &draws {
            acc.push(evaluate_loss(loss, y_hat, y, pred_points.as_deref())?);
        }
        return Ok(acc.estimate());
    }
    let value = predictive.expected_loss(y_hat, loss)?;
    Ok(match &predictive {
        Predictive::Discrete(_) => RiskEstimate::exact(value),
        Predictive::ClosedForm(ClosedFormPredictive::BetaBinomial { .. }) => {
            RiskEstimate::exact(value)
        }
        Predictive::ClosedForm(ClosedFormPredictive::NegativeBinomial { .. })
            if !matches!(loss.form(), LossForm::Squared) =>
        {
            RiskEstimate::exact(value)
        }
        Predictive::ClosedForm(_) => RiskEstimate::closed_form(value),
    })
}

/// Frequentist risk at each grid point, in grid order.
pub fn risk_curve(
    model: &Model,
    rule: &PredictionRule,
    loss: &LossSpec,
    grid: &[Point],
    opts: &RiskOptions,
) -> Result<Vec<(Point, RiskEstimate)>> {
    grid.par_iter()
        .map(|theta| {
            frequentist_prediction_risk(model, rule, theta, loss, opts)
                .map(|r| (theta.clone(), r))
        })
        .collect()
}
