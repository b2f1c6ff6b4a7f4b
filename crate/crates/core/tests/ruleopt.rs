mod common;

use common::*;
use predrisk::inference::{posterior_predictive, ClosedFormPredictive, DiscreteDistribution, Predictive};
use predrisk::model::{
    ConjugateModel, FiniteModel, LossSpec, Model, PointSummary, PredictionRule, Search,
};
use predrisk::ruleopt::{
    bayes_prediction_rule, closed_form_predictor, enumerate_all_rules,
    minimize_posterior_predictive_risk, numeric_bayes_rule, rule_count,
};
use predrisk::suite::random_suite;
use predrisk::Error;

#[test]
fn beta_bernoulli_squared_rule_is_the_predictive_mean() {
    let m: Model = ConjugateModel::beta_bernoulli(1.0, 1.0, 2, 1).into();
    let rule = bayes_prediction_rule(&m, &LossSpec::squared()).unwrap();
    assert_eq!(rule, PredictionRule::ClosedForm(PointSummary::Mean));
    for s in 0..=2u64 {
        // Posterior mean of θ given s successes in 2 trials, by quadrature.
        let oracle = integrate(|t| t * binomial_pmf(2, s, t), 0.0, 1.0, 1e-14)
            / integrate(|t| binomial_pmf(2, s, t), 0.0, 1.0, 1e-14);
        let got = rule.predict(&m, &[s as f64]).unwrap()[0];
        assert_close(got, oracle, 1e-10);
    }
    assert_close(rule.predict(&m, &[2.0]).unwrap()[0], 0.75, 1e-12);
}

#[test]
fn zero_one_rule_on_finite_model_picks_the_mode() {
    for inst in random_suite(3, 60, 3) {
        let m: Model = inst.model.clone().into();
        let Ok(PredictionRule::Table(table)) = bayes_prediction_rule(&m, &LossSpec::zero_one(0.0))
        else {
            continue;
        };
        for (s, &c) in table.iter().enumerate() {
            let probs = brute_predictive(&inst.model, s);
            let max = probs.iter().cloned().fold(f64::MIN, f64::max);
            let first = probs.iter().position(|&p| p >= max - 1e-12).unwrap();
            assert_eq!(c, first, "seed {} obs {s}", inst.seed);
        }
    }
}

#[test]
fn ties_resolve_to_the_lowest_index() {
    let m: Model = FiniteModel::from_fn(
        pts(&[0.0]),
        vec![1.0],
        pts(&[0.0]),
        pts(&[0.0, 1.0, 2.0]),
        |_, k, _| [0.4, 0.4, 0.2][k],
    )
    .unwrap()
    .into();
    let rule = bayes_prediction_rule(&m, &LossSpec::zero_one(0.0)).unwrap();
    assert_eq!(rule, PredictionRule::Table(vec![0]));
}

#[test]
fn symmetric_two_point_predictive() {
    let d = DiscreteDistribution::new(pts(&[0.0, 1.0]), vec![0.5, 0.5]).unwrap();
    let p = Predictive::Discrete(d);
    assert_eq!(closed_form_predictor(&p, &LossSpec::squared()).unwrap(), vec![0.5]);
    let golden = minimize_posterior_predictive_risk(&p, &LossSpec::squared(), Search::GoldenSection)
        .unwrap();
    assert_close(golden[0], 0.5, 1e-8);
    assert_eq!(closed_form_predictor(&p, &LossSpec::zero_one(0.0)).unwrap(), vec![0.0]);
}

#[test]
fn closed_form_predictor_examples() {
    let normal = Predictive::ClosedForm(ClosedFormPredictive::Normal { mean: -1.3, variance: 2.0 });
    assert_eq!(closed_form_predictor(&normal, &LossSpec::squared()).unwrap(), vec![-1.3]);

    let d = DiscreteDistribution::new(pts(&[0.0, 1.0, 2.0]), vec![0.2, 0.5, 0.3]).unwrap();
    let p = Predictive::Discrete(d);
    let median = closed_form_predictor(&p, &LossSpec::absolute()).unwrap();
    let scan: Vec<f64> = [0.0, 1.0, 2.0]
        .iter()
        .map(|c| p.expected_loss(&[*c], &LossSpec::absolute()).unwrap())
        .collect();
    let best = scan.iter().cloned().fold(f64::MAX, f64::min);
    assert_eq!(median, vec![1.0]);
    assert_eq!(scan[1], best);

    assert!(matches!(
        closed_form_predictor(&p, &LossSpec::table(vec![vec![0.0; 3]; 3])),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn golden_section_agrees_with_closed_form_on_conjugate_predictives() {
    let models: Vec<Model> = vec![
        ConjugateModel::beta_bernoulli(2.0, 1.5, 3, 4).into(),
        ConjugateModel::normal_known_var(-0.5, 1.0, 2.0, 4, 3).into(),
        ConjugateModel::gamma_poisson(2.5, 1.0, 2, 3).into(),
    ];
    for m in &models {
        let numeric = numeric_bayes_rule(m, &LossSpec::squared()).unwrap();
        for y in [0.0, 1.0, 3.0] {
            let p = posterior_predictive(m, &[y]).unwrap();
            let closed = closed_form_predictor(&p, &LossSpec::squared()).unwrap()[0];
            let golden = numeric.predict(m, &[y]).unwrap()[0];
            assert_close(golden, closed, 1e-8);
        }
    }
    assert!(numeric_bayes_rule(&models[0], &LossSpec::zero_one(0.5)).is_err());
}

#[test]
fn per_observation_optimality() {
    for inst in random_suite(808, 80, 3) {
        let m: Model = inst.model.clone().into();
        let Ok(rule) = bayes_prediction_rule(&m, &inst.loss) else {
            continue;
        };
        let pred = inst.model.pred_space();
        for (s, y) in inst.model.obs_space().iter().enumerate() {
            let p = posterior_predictive(&m, y).unwrap();
            let chosen = rule.as_table().unwrap()[s];
            let ours = p.expected_loss(&pred[chosen], &inst.loss).unwrap();
            for c in pred {
                assert!(ours <= p.expected_loss(c, &inst.loss).unwrap() + 1e-12);
            }
        }
    }
}

#[test]
fn rule_table_is_invariant_to_loss_scale() {
    for inst in random_suite(64, 60, 3) {
        let m: Model = inst.model.clone().into();
        let Ok(base) = bayes_prediction_rule(&m, &inst.loss) else {
            continue;
        };
        for c in [0.5, 2.0, 7.25] {
            assert_eq!(bayes_prediction_rule(&m, &inst.loss.scaled(c)).unwrap(), base);
        }
    }
}

#[test]
fn enumeration_counts_and_order() {
    let square = |n_obs: usize, n_pred: usize| {
        FiniteModel::from_fn(
            vec![vec![0.0]],
            vec![1.0],
            (0..n_obs).map(|i| vec![i as f64]).collect(),
            (0..n_pred).map(|i| vec![i as f64]).collect(),
            |_, _, _| 1.0 / (n_obs * n_pred) as f64,
        )
        .unwrap()
    };
    let m = square(2, 2);
    assert_eq!(enumerate_all_rules(&m, 100).unwrap().count(), 4);
    let m3 = square(3, 3);
    assert_eq!(rule_count(&m3), 27);
    let rules: Vec<_> = enumerate_all_rules(&m3, 100).unwrap().collect();
    assert_eq!(rules.len(), 27);
    assert_eq!(rules[0], PredictionRule::Table(vec![0, 0, 0]));
    let tables: Vec<Vec<usize>> = rules.iter().map(|r| r.as_table().unwrap().to_vec()).collect();
    assert_eq!(tables, all_tables(3, 3));

    match enumerate_all_rules(&m3, 26) {
        Err(Error::TooManyRules { count, cap }) => {
            assert_eq!(count, 27);
            assert_eq!(cap, 26);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn zero_evidence_observation_blocks_the_strict_rule() {
    let m: Model = FiniteModel::from_fn(
        pts(&[0.0]),
        vec![1.0],
        pts(&[0.0, 1.0]),
        pts(&[0.0, 1.0]),
        |_, k, s| if s == 0 { 0.5 } else { 0.0 * k as f64 },
    )
    .unwrap()
    .into();
    assert!(matches!(
        bayes_prediction_rule(&m, &LossSpec::squared()),
        Err(Error::ConditioningUndefined { .. })
    ));
}
