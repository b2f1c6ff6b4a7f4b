//! Dominance comparisons between prediction rules of a finite model and
//! exhaustive admissibility certification.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{FiniteModel, LossSpec, Model, PredictionRule};
use crate::risk::RiskKernel;
use crate::ruleopt::{self, enumerate_all_rules};

/// Strictness tolerance separating genuine risk differences from rounding.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Dominates,
    DominatedBy,
    Incomparable,
    RiskEqual,
}

impl Relation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Relation::Dominates => "dominates",
            Relation::DominatedBy => "dominated-by",
            Relation::Incomparable => "incomparable",
            Relation::RiskEqual => "risk-equal",
        }
    }
}

/// Outcome of comparing rule A against rule B.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceVerdict {
    pub relation: Relation,
    /// θ index where the strict inequality holds, for `Dominates`/`DominatedBy`.
    pub witness: Option<usize>,
    /// `risk_A(θ) − risk_B(θ)` for every θ.
    pub margins: Vec<f64>,
}

/// Classifies two risk profiles: A dominates B iff `risk_A ≤ risk_B + tol`
/// everywhere and `risk_A < risk_B − tol` somewhere.
pub fn classify(risk_a: &[f64], risk_b: &[f64], tol: f64) -> DominanceVerdict {
    let margins: Vec<f64> = risk_a.iter().zip(risk_b).map(|(a, b)| a - b).collect();
    let a_weakly_better = margins.iter().all(|&d| d <= tol);
    let b_weakly_better = margins.iter().all(|&d| d >= -tol);
    let a_strict = margins.iter().position(|&d| d < -tol);
    let b_strict = margins.iter().position(|&d| d > tol);
    let (relation, witness) = match (a_weakly_better, a_strict, b_weakly_better, b_strict) {
        (true, Some(w), _, _) => (Relation::Dominates, Some(w)),
        (_, _, true, Some(w)) => (Relation::DominatedBy, Some(w)),
        (true, None, true, None) => (Relation::RiskEqual, None),
        _ => (Relation::Incomparable, None),
    };
    DominanceVerdict {
        relation,
        witness,
        margins,
    }
}

fn dominates(risk_a: &[f64], risk_b: &[f64], tol: f64) -> bool {
    let mut strict = false;
    for (a, b) in risk_a.iter().zip(risk_b) {
        let d = a - b;
        if d > tol {
            return false;
        }
        strict |= d < -tol;
    }
    strict
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

fn table_of<'a>(model: &FiniteModel, rule: &'a PredictionRule) -> Result<&'a [usize]> {
    rule.check(&Model::Finite(model.clone()))?;
    rule.as_table()
        .ok_or_else(|| Error::RuleMismatch("dominance checks take table rules".into()))
}

pub fn compare_rules(
    model: &FiniteModel,
    rule_a: &PredictionRule,
    rule_b: &PredictionRule,
    loss: &LossSpec,
    tol: f64,
) -> Result<DominanceVerdict> {
    check_tol(tol)?;
    let kernel = RiskKernel::new(model, loss)?;
    let a = kernel.profile(table_of(model, rule_a)?);
    let b = kernel.profile(table_of(model, rule_b)?);
    Ok(classify(&a, &b, tol))
}

/// Scans every rule and returns the first (in enumeration order) that
/// dominates `rule`, or `None` when the rule is admissible.
pub fn find_dominating_rule(
    model: &FiniteModel,
    rule: &PredictionRule,
    loss: &LossSpec,
    tol: f64,
    cap: u64,
) -> Result<Option<(PredictionRule, DominanceVerdict)>> {
    check_tol(tol)?;
    let kernel = RiskKernel::new(model, loss)?;
    let target = kernel.profile(table_of(model, rule)?);
    for candidate in enumerate_all_rules(model, cap)? {
        let profile = kernel.profile(candidate.as_table().expect("enumerated tables"));
        if dominates(&profile, &target, tol) {
            let verdict = classify(&profile, &target, tol);
            return Ok(Some((candidate, verdict)));
        }
    }
    Ok(None)
}

/// Status of one enumerated rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleStatus {
    /// Position in enumeration order.
    pub index: usize,
    pub table: Vec<usize>,
    pub admissible: bool,
    /// Lowest-index dominating rule and the θ index where it is strictly better.
    pub dominated_by: Option<usize>,
    pub witness_theta: Option<usize>,
    pub risks: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub rules: Vec<RuleStatus>,
    /// Enumeration index of the canonical Bayes rule for the model's prior.
    pub bayes_rule: Option<usize>,
    pub tol: f64,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> impl Iterator<Item = &RuleStatus> {
        self.rules.iter().filter(|r| r.admissible)
    }

    pub fn inadmissible(&self) -> impl Iterator<Item = &RuleStatus> {
        self.rules.iter().filter(|r| !r.admissible)
    }
}

/// Enumeration index of a rule table (obs index 0 is the most significant digit).
pub fn rule_index(table: &[usize], n_pred: usize) -> usize {
    table.iter().fold(0, |acc, &c| acc * n_pred + c)
}

/// Labels every rule admissible or inadmissible, with a dominating witness
/// for each inadmissible one.
pub fn admissibility_report(
    model: &FiniteModel,
    loss: &LossSpec,
    tol: f64,
    cap: u64,
) -> Result<AdmissibilityReport> {
    check_tol(tol)?;
    let kernel = RiskKernel::new(model, loss)?;
    let tables: Vec<Vec<usize>> = enumerate_all_rules(model, cap)?
        .map(|r| match r {
            PredictionRule::Table(t) => t,
            _ => unreachable!("enumeration yields tables"),
        })
        .collect();
    let profiles: Vec<Vec<f64>> = tables.iter().map(|t| kernel.profile(t)).collect();

    let rules = tables
        .par_iter()
        .enumerate()
        .map(|(i, table)| {
            let dominator = profiles
                .iter()
                .position(|other| dominates(other, &profiles[i], tol));
            let witness_theta = dominator.and_then(|j| classify(&profiles[j], &profiles[i], tol).witness);
            RuleStatus {
                index: i,
                table: table.clone(),
                admissible: dominator.is_none(),
                dominated_by: dominator,
                witness_theta,
                risks: profiles[i].clone(),
            }
        })
        .collect();

    let bayes_rule = ruleopt::canonical_bayes_table(model, loss)
        .ok()
        .map(|t| rule_index(&t, model.n_pred()));

    Ok(AdmissibilityReport {
        rules,
        bayes_rule,
        tol,
    })
}
