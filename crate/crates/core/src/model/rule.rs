use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use super::{LossSpec, Model, Point};
use crate::error::{Error, Result};
use crate::{inference, ruleopt};

/// Summary of a predictive distribution used as a point prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointSummary {
    Mean,
    /// Smallest `m` with `CDF(m) >= 1/2`.
    Median,
    /// Highest-probability point, lowest index on ties.
    Mode,
}

impl PointSummary {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointSummary::Mean => "predictive-mean",
            PointSummary::Median => "predictive-median",
            PointSummary::Mode => "predictive-mode",
        }
    }
}

/// How a memoized rule finds the per-observation minimiser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Search {
    /// Golden-section search over the central predictive quantile bracket.
    GoldenSection,
    /// Scan over a finite candidate set derived from the predictive support.
    Exhaustive,
}

/// Per-observation argmin of the posterior predictive risk, computed on
/// first use and cached by the bit pattern of the observation.
#[derive(Clone)]
pub struct MemoizedRule {
    loss: LossSpec,
    search: Search,
    cache: Arc<RwLock<HashMap<Vec<u64>, Point>>>,
}

impl MemoizedRule {
    pub fn new(loss: LossSpec, search: Search) -> Self {
        Self {
            loss,
            search,
            cache: Arc::default(),
        }
    }

    pub fn loss(&self) -> &LossSpec {
        &self.loss
    }

    pub fn search(&self) -> Search {
        self.search
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().map(|c| c.len()).unwrap_or(0)
    }

    fn predict(&self, model: &Model, y_obs: &[f64]) -> Result<Point> {
        let key: Vec<u64> = y_obs.iter().map(|x| x.to_bits()).collect();
        if let Some(hit) = self.cache.read().ok().and_then(|c| c.get(&key).cloned()) {
            return Ok(hit);
        }
        let value = ruleopt::minimize_at(model, y_obs, &self.loss, self.search)?;
        if let Ok(mut cache) = self.cache.write() {
            cache.insert(key, value.clone());
        }
        Ok(value)
    }
}

impl fmt::Debug for MemoizedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MemoizedRule")
            .field("loss", &self.loss)
            .field("search", &self.search)
            .field("cached", &self.cached_len())
            .finish()
    }
}

impl PartialEq for MemoizedRule {
    fn eq(&self, other: &Self) -> bool {
        self.loss == other.loss && self.search == other.search
    }
}

/// A deterministic map from observations to predictions.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictionRule {
    /// Prediction-space index for every observation-space index.
    Table(Vec<usize>),
    ClosedForm(PointSummary),
    Memoized(MemoizedRule),
}

impl PredictionRule {
    pub fn as_table(&self) -> Option<&[usize]> {
        match self {
            PredictionRule::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PredictionRule::Table(t) => {
                let items: Vec<String> = t.iter().map(usize::to_string).collect();
                format!("table[{}]", items.join(" "))
            }
            PredictionRule::ClosedForm(s) => s.as_str().to_string(),
            PredictionRule::Memoized(m) => format!("memoized-{:?}", m.search).to_lowercase(),
        }
    }

    /// Checks that the rule is total over the model's observation space and
    /// maps into its prediction domain.
    pub fn check(&self, model: &Model) -> Result<()> {
        match (self, model) {
            (PredictionRule::Table(t), _) => {
                let obs = model.obs_points().ok_or_else(|| {
                    Error::RuleMismatch("table rules need a finite observation space".into())
                })?;
                let n_pred = model.pred_points().map_or(0, |p| p.len());
                if t.len() != obs.len() {
                    return Err(Error::RuleMismatch(format!(
                        "table has {} entries but the observation space has {} points",
                        t.len(),
                        obs.len()
                    )));
                }
                if let Some(bad) = t.iter().find(|&&i| i >= n_pred) {
                    return Err(Error::RuleMismatch(format!(
                        "prediction index {bad} outside a prediction space of {n_pred} points"
                    )));
                }
                Ok(())
            }
            (_, Model::Finite(_)) => Err(Error::RuleMismatch(
                "finite models take table rules (predictions must lie in the prediction space)"
                    .into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn predict(&self, model: &Model, y_obs: &[f64]) -> Result<Point> {
        match self {
            PredictionRule::Table(t) => {
                let obs = model.obs_points().ok_or_else(|| {
                    Error::RuleMismatch("table rules need a finite observation space".into())
                })?;
                let s = obs
                    .iter()
                    .position(|p| p.as_slice() == y_obs)
                    .ok_or_else(|| Error::ConditioningUndefined {
                        obs: y_obs.to_vec(),
                    })?;
                let pred = model.pred_points().unwrap_or_default();
                let idx = *t.get(s).ok_or_else(|| {
                    Error::RuleMismatch(format!("table has no entry for observation {s}"))
                })?;
                pred.get(idx).cloned().ok_or_else(|| {
                    Error::RuleMismatch(format!("prediction index {idx} out of range"))
                })
            }
            PredictionRule::ClosedForm(summary) => {
                let predictive = inference::posterior_predictive(model, y_obs)?;
                predictive.summary(*summary)
            }
            PredictionRule::Memoized(m) => m.predict(model, y_obs),
        }
    }
}
