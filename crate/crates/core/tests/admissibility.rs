mod common;

use common::*;
use predrisk::admissibility::{
    admissibility_report, classify, compare_rules, find_dominating_rule, Relation, DEFAULT_TOL,
};
use predrisk::model::{FiniteModel, LossSpec, PredictionRule};
use predrisk::ruleopt::{bayes_rule_table, canonical_bayes_table};
use predrisk::suite::random_suite;

fn uniform_2x2x2() -> FiniteModel {
    FiniteModel::from_fn(
        pts(&[0.0, 1.0]),
        vec![0.5, 0.5],
        pts(&[0.0, 1.0]),
        pts(&[0.0, 1.0]),
        |_, _, _| 0.25,
    )
    .unwrap()
}

#[test]
fn a_rule_is_risk_equal_to_itself() {
    for inst in random_suite(10, 20, 3) {
        let r = PredictionRule::Table(vec![0; inst.model.n_obs()]);
        let v = compare_rules(&inst.model, &r, &r, &inst.loss, DEFAULT_TOL).unwrap();
        assert_eq!(v.relation, Relation::RiskEqual);
        assert_eq!(v.witness, None);
    }
}

#[test]
fn zero_risk_rule_dominates() {
    let m = FiniteModel::from_fn(
        pts(&[0.0, 1.0]),
        vec![0.5, 0.5],
        pts(&[0.0, 1.0]),
        pts(&[0.0, 1.0]),
        |t, k, s| if k == t && s == t { 1.0 } else { 0.0 },
    )
    .unwrap();
    let perfect = PredictionRule::Table(vec![0, 1]);
    let flipped = PredictionRule::Table(vec![1, 1]);
    let v = compare_rules(&m, &perfect, &flipped, &LossSpec::absolute(), DEFAULT_TOL).unwrap();
    assert_eq!(v.relation, Relation::Dominates);
    assert_eq!(v.witness, Some(0));
    let back = compare_rules(&m, &flipped, &perfect, &LossSpec::absolute(), DEFAULT_TOL).unwrap();
    assert_eq!(back.relation, Relation::DominatedBy);
}

#[test]
fn constant_rules_on_uniform_joint() {
    let m = uniform_2x2x2();
    let zero = PredictionRule::Table(vec![0, 0]);
    let one = PredictionRule::Table(vec![1, 1]);
    for loss in [LossSpec::squared(), LossSpec::zero_one(0.0)] {
        // Both constant rules have risk 0.5 at each θ (oracle: the double sum).
        for t in 0..2 {
            assert_eq!(brute_frequentist(&m, &loss, &[0, 0], t), 0.5);
            assert_eq!(brute_frequentist(&m, &loss, &[1, 1], t), 0.5);
        }
        let v = compare_rules(&m, &zero, &one, &loss, DEFAULT_TOL).unwrap();
        assert!(matches!(v.relation, Relation::RiskEqual | Relation::Incomparable));
        assert_eq!(v.relation, Relation::RiskEqual);
    }
}

#[test]
fn bayes_rules_are_never_dominated() {
    for inst in random_suite(2000, 50, 3) {
        let Ok(table) = bayes_rule_table(&inst.model, &inst.loss) else {
            continue;
        };
        let found = find_dominating_rule(
            &inst.model,
            &PredictionRule::Table(table),
            &inst.loss,
            DEFAULT_TOL,
            1_000_000,
        )
        .unwrap();
        assert!(found.is_none(), "seed {}", inst.seed);
    }
}

#[test]
fn strictly_suboptimal_choice_is_dominated() {
    // Y_pred is independent of Y_obs and favours 1 under every θ, and every
    // θ gives obs 1 positive probability.
    let pred = [[0.3, 0.7], [0.1, 0.9]];
    let obs = [[0.5, 0.5], [0.2, 0.8]];
    let m = FiniteModel::from_fn(
        pts(&[0.0, 1.0]),
        vec![0.6, 0.4],
        pts(&[0.0, 1.0]),
        pts(&[0.0, 1.0]),
        |t, k, s| pred[t][k] * obs[t][s],
    )
    .unwrap();
    let loss = LossSpec::zero_one(0.0);
    assert_eq!(bayes_rule_table(&m, &loss).unwrap(), vec![1, 1]);
    let worse = PredictionRule::Table(vec![1, 0]);
    let (dominator, verdict) = find_dominating_rule(&m, &worse, &loss, DEFAULT_TOL, 100)
        .unwrap()
        .expect("a dominating rule exists");
    assert_eq!(verdict.relation, Relation::Dominates);
    let check = compare_rules(&m, &dominator, &worse, &loss, DEFAULT_TOL).unwrap();
    assert_eq!(check.relation, Relation::Dominates);
    assert_eq!(verdict.margins, check.margins);
    // The Bayes rule is strictly better at every θ.
    let bayes = compare_rules(&m, &PredictionRule::Table(vec![1, 1]), &worse, &loss, DEFAULT_TOL)
        .unwrap();
    assert!(bayes.margins.iter().all(|&d| d < -DEFAULT_TOL));
}

#[test]
fn single_rule_space() {
    let m = FiniteModel::from_fn(
        pts(&[0.0, 1.0]),
        vec![0.5, 0.5],
        pts(&[0.0, 1.0, 2.0]),
        pts(&[1.0]),
        |t, _, s| [[0.2, 0.3, 0.5], [0.6, 0.2, 0.2]][t][s],
    )
    .unwrap();
    let only = PredictionRule::Table(vec![0, 0, 0]);
    assert!(find_dominating_rule(&m, &only, &LossSpec::squared(), DEFAULT_TOL, 10)
        .unwrap()
        .is_none());
    let report = admissibility_report(&m, &LossSpec::squared(), DEFAULT_TOL, 10).unwrap();
    assert_eq!(report.rules.len(), 1);
    assert!(report.rules[0].admissible);
    assert_eq!(report.rules[0].risks, vec![0.0, 0.0]);
}

#[test]
fn deterministic_model_admits_only_the_forced_rules() {
    let m = FiniteModel::from_fn(
        pts(&[0.0, 1.0]),
        vec![0.5, 0.5],
        pts(&[0.0, 1.0]),
        pts(&[0.0, 1.0]),
        |t, k, s| if k == t && s == t { 1.0 } else { 0.0 },
    )
    .unwrap();
    let loss = LossSpec::zero_one(0.0);
    let report = admissibility_report(&m, &loss, DEFAULT_TOL, 100).unwrap();
    // Oracle: a rule is admissible iff no other rule's brute-force risk
    // profile dominates it.
    let tables = all_tables(2, 2);
    let profiles: Vec<Vec<f64>> = tables
        .iter()
        .map(|t| (0..2).map(|th| brute_frequentist(&m, &loss, t, th)).collect())
        .collect();
    for (i, status) in report.rules.iter().enumerate() {
        let dominated = profiles.iter().any(|p| {
            p.iter().zip(&profiles[i]).all(|(a, b)| a <= b) && p.iter().zip(&profiles[i]).any(|(a, b)| a < b)
        });
        assert_eq!(status.admissible, !dominated);
    }
    let admissible: Vec<_> = report.admissible().map(|r| r.table.clone()).collect();
    assert_eq!(admissible, vec![vec![0, 1]]);
}

#[test]
fn report_partitions_and_contains_the_bayes_rule() {
    for inst in random_suite(4242, 60, 3) {
        let report =
            admissibility_report(&inst.model, &inst.loss, DEFAULT_TOL, 1_000_000).unwrap();
        assert_eq!(report.rules.len() as u128, predrisk::ruleopt::rule_count(&inst.model));
        assert!(report.admissible().count() >= 1, "seed {}", inst.seed);
        let bayes = report.bayes_rule.expect("canonical Bayes rule");
        assert!(report.rules[bayes].admissible, "seed {}", inst.seed);
        assert_eq!(
            report.rules[bayes].table,
            canonical_bayes_table(&inst.model, &inst.loss).unwrap()
        );
        for r in report.inadmissible() {
            let j = r.dominated_by.unwrap();
            let v = classify(&report.rules[j].risks, &r.risks, DEFAULT_TOL);
            assert_eq!(v.relation, Relation::Dominates);
            assert_eq!(v.witness, r.witness_theta);
        }
    }
}

#[test]
fn zero_prior_weight_probe() {
    // Validation is bypassed on purpose: with g(θ) = 0 somewhere, the
    // quasi-Bayes rule may be dominated. Record how often it happens.
    let mut dominated = 0;
    let mut checked = 0;
    for inst in random_suite(99, 60, 3) {
        if inst.model.n_theta() < 2 {
            continue;
        }
        let mut prior = vec![0.0; inst.model.n_theta()];
        prior[0] = 1.0;
        let quasi = inst.model.with_prior_unchecked(prior);
        let Ok(table) = canonical_bayes_table(&quasi, &inst.loss) else {
            continue;
        };
        checked += 1;
        if find_dominating_rule(&quasi, &PredictionRule::Table(table), &inst.loss, DEFAULT_TOL, 1_000_000)
            .unwrap()
            .is_some()
        {
            dominated += 1;
        }
    }
    eprintln!("zero-prior probe: {dominated} of {checked} quasi-Bayes rules dominated");
    assert!(checked > 0);
}
