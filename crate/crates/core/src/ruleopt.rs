//! Bayes prediction rules: per-observation minimisation of the posterior
//! predictive risk, closed-form shortcuts, and enumeration of every
//! deterministic rule of a finite model.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inference::{self, ClosedFormPredictive, Predictive};
use crate::model::{
    ConjugateModel, FiniteModel, LossForm, LossSpec, MemoizedRule, Model, Point, PointSummary,
    PredictionRule, Search,
};
use crate::numerics::golden_section;

/// Candidates whose risk is within this of the minimum are tied; the lowest
/// index (or smallest value) wins.
pub const TIE_TOL: f64 = 1e-12;

/// Default cap on `|pred|^|obs|` for enumeration.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// Golden-section stopping width.
pub const GOLDEN_WIDTH: f64 = 1e-9;

/// Index of the smallest value, lowest index among values within [`TIE_TOL`].
pub(crate) fn argmin_lowest(values: &[f64]) -> usize {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    values
        .iter()
        .position(|&v| v <= min + TIE_TOL)
        .expect("nonempty candidate set")
}

/// Bayes rule of a finite model as a table of prediction-space indices.
///
/// Every observation must have positive marginal probability.
pub fn bayes_rule_table(model: &FiniteModel, loss: &LossSpec) -> Result<Vec<usize>> {
    bayes_table(model, loss, true)
}

/// Like [`bayes_rule_table`], but observations with zero marginal probability
/// map to prediction index 0. Their choice does not affect any risk, so the
/// result is still a Bayes rule.
pub fn canonical_bayes_table(model: &FiniteModel, loss: &LossSpec) -> Result<Vec<usize>> {
    bayes_table(model, loss, false)
}

fn bayes_table(model: &FiniteModel, loss: &LossSpec, strict: bool) -> Result<Vec<usize>> {
    let matrix = loss.matrix(model.pred_space())?;
    let n = model.n_pred();
    (0..model.n_obs())
        .into_par_iter()
        .map(|s| {
            if !strict && inference::finite_evidence(model, s) <= 0.0 {
                return Ok(0);
            }
            let probs = inference::finite_predictive(model, s)?;
            let risks: Vec<f64> = (0..n)
                .map(|c| (0..n).map(|k| matrix[c * n + k] * probs[k]).sum())
                .collect();
            Ok(argmin_lowest(&risks))
        })
        .collect()
}

/// Derives a rule minimising the posterior predictive risk at every observation.
///
/// Finite models get an exhaustive argmin over the prediction space. Conjugate
/// families get the closed-form minimiser (mean for squared loss, median for
/// absolute loss, mode for narrow zero-one bands) or a memoized exhaustive
/// search where no closed form applies.
pub fn bayes_prediction_rule(model: &Model, loss: &LossSpec) -> Result<PredictionRule> {
    match model {
        Model::Finite(m) => Ok(PredictionRule::Table(bayes_rule_table(m, loss)?)),
        Model::Conjugate(m) => conjugate_rule(m, loss),
    }
}

fn conjugate_rule(model: &ConjugateModel, loss: &LossSpec) -> Result<PredictionRule> {
    let pred_len = model.pred_points().map(|p| p.len());
    loss.check(pred_len)?;
    Ok(match loss.form() {
        LossForm::Squared => PredictionRule::ClosedForm(PointSummary::Mean),
        LossForm::Absolute => PredictionRule::ClosedForm(PointSummary::Median),
        LossForm::Table { .. } => {
            PredictionRule::Memoized(MemoizedRule::new(loss.clone(), Search::Exhaustive))
        }
        LossForm::ZeroOne { band } => match model {
            ConjugateModel::NormalKnownVar { .. } => PredictionRule::ClosedForm(PointSummary::Mode),
            _ if *band < 0.5 => PredictionRule::ClosedForm(PointSummary::Mode),
            _ => PredictionRule::Memoized(MemoizedRule::new(loss.clone(), Search::Exhaustive)),
        },
    })
}

/// A rule that finds each prediction by golden-section search on the
/// posterior predictive risk (conjugate families, squared or absolute loss).
pub fn numeric_bayes_rule(model: &Model, loss: &LossSpec) -> Result<PredictionRule> {
    match model {
        Model::Finite(_) => Err(Error::Unsupported(
            "finite models use the exhaustive rule".into(),
        )),
        Model::Conjugate(_) => match loss.form() {
            LossForm::Squared | LossForm::Absolute => Ok(PredictionRule::Memoized(
                MemoizedRule::new(loss.clone(), Search::GoldenSection),
            )),
            _ => Err(Error::Unsupported(format!(
                "golden-section search needs a convex loss, got {}",
                loss.name()
            ))),
        },
    }
}

/// Closed-form minimiser of the expected loss under a predictive:
/// mean (squared), smallest median (absolute), mode (zero-one).
pub fn closed_form_predictor(predictive: &Predictive, loss: &LossSpec) -> Result<Point> {
    let summary = match loss.form() {
        LossForm::Squared => PointSummary::Mean,
        LossForm::Absolute => PointSummary::Median,
        LossForm::ZeroOne { .. } => PointSummary::Mode,
        LossForm::Table { .. } => {
            return Err(Error::Unsupported(
                "table loss has no closed-form minimiser; use exhaustive argmin".into(),
            ))
        }
    };
    predictive.summary(summary)
}

/// Minimises `ŷ ↦ E[L(ŷ, Y_pred) | y_obs]` with the chosen search.
pub fn minimize_posterior_predictive_risk(
    predictive: &Predictive,
    loss: &LossSpec,
    search: Search,
) -> Result<Point> {
    match search {
        Search::GoldenSection => {
            if loss.is_table() {
                return Err(Error::Unsupported(
                    "golden-section search over a table loss".into(),
                ));
            }
            let (lo, hi) = predictive.bracket()?;
            let objective = |x: f64| predictive.expected_loss(&[x], loss).unwrap_or(f64::NAN);
            let x = golden_section(objective, lo, hi, GOLDEN_WIDTH)?.x;
            if matches!(loss.form(), LossForm::Squared) && hi > lo {
                return Ok(vec![parabolic_vertex(&objective, x, 1e-3 * (hi - lo))]);
            }
            Ok(vec![x])
        }
        Search::Exhaustive => exhaustive(predictive, loss),
    }
}

/// Vertex of the parabola through `f` at `x - h, x, x + h`. Squared-loss
/// risk is an exact parabola in ŷ, so this recovers the minimiser below the
/// width where rounding makes the objective look flat.
fn parabolic_vertex(f: &impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let (fm, f0, fp) = (f(x - h), f(x), f(x + h));
    let curvature = fp - 2.0 * f0 + fm;
    if curvature.is_nan() || curvature <= 0.0 {
        return x;
    }
    let vertex = x - 0.5 * h * (fp - fm) / curvature;
    if (vertex - x).abs() <= h {
        vertex
    } else {
        x
    }
}

fn exhaustive(predictive: &Predictive, loss: &LossSpec) -> Result<Point> {
    match predictive {
        Predictive::Discrete(d) => {
            loss.check(Some(d.support().len()))?;
            let risks: Vec<f64> = (0..d.support().len())
                .map(|i| d.expected_loss_at_index(i, loss))
                .collect();
            Ok(d.support()[argmin_lowest(&risks)].clone())
        }
        Predictive::ClosedForm(c) => match loss.form() {
            LossForm::Table { .. } => {
                let limit = c.scan_limit();
                let risks = (0..=limit)
                    .map(|k| c.expected_loss(k as f64, loss))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(vec![argmin_lowest(&risks) as f64])
            }
            LossForm::ZeroOne { band } if c.is_discrete() => Ok(vec![window_scan(c, *band)]),
            _ => closed_form_predictor(predictive, loss),
        },
    }
}

/// Best placement of a zero-one band over an integer-valued predictive: the
/// window covering `w + 1 = floor(2·band) + 1` consecutive integers with the
/// most mass, lowest start on ties, returned as the window centre.
fn window_scan(c: &ClosedFormPredictive, band: f64) -> f64 {
    let w = (2.0 * band).floor() as u64;
    let limit = c.scan_limit();
    let pmf: Vec<f64> = (0..=limit + w).map(|k| c.pmf(k)).collect();
    let masses: Vec<f64> = (0..=limit)
        .map(|j| pmf[j as usize..=(j + w) as usize].iter().sum::<f64>())
        .collect();
    let scores: Vec<f64> = masses.iter().map(|m| -m).collect();
    argmin_lowest(&scores) as f64 + w as f64 / 2.0
}

pub(crate) fn minimize_at(
    model: &Model,
    y_obs: &[f64],
    loss: &LossSpec,
    search: Search,
) -> Result<Point> {
    let predictive = inference::posterior_predictive(model, y_obs)?;
    minimize_posterior_predictive_risk(&predictive, loss, search)
}

/// `|pred|^|obs|`, saturating.
pub fn rule_count(model: &FiniteModel) -> u128 {
    let base = model.n_pred() as u128;
    let mut count: u128 = 1;
    for _ in 0..model.n_obs() {
        count = count.saturating_mul(base);
    }
    count
}

/// Iterator over every map obs-space → pred-space, lexicographic by
/// observation index (index 0 is the most significant digit).
#[derive(Debug, Clone)]
pub struct RuleEnumerator {
    n_pred: usize,
    next: Option<Vec<usize>>,
    remaining: u128,
}

impl Iterator for RuleEnumerator {
    type Item = PredictionRule;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carried = true;
        for digit in succ.iter_mut().rev() {
            *digit += 1;
            if *digit < self.n_pred {
                carried = false;
                break;
            }
            *digit = 0;
        }
        if !carried {
            self.next = Some(succ);
        }
        self.remaining = self.remaining.saturating_sub(1);
        Some(PredictionRule::Table(current))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, usize::try_from(self.remaining).ok())
    }
}

pub fn enumerate_all_rules(model: &FiniteModel, cap: u64) -> Result<RuleEnumerator> {
    let count = rule_count(model);
    if count > cap as u128 {
        return Err(Error::TooManyRules { count, cap });
    }
    Ok(RuleEnumerator {
        n_pred: model.n_pred(),
        next: Some(vec![0; model.n_obs()]),
        remaining: count,
    })
}
