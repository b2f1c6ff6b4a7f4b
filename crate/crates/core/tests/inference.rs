mod common;

use common::*;
use predrisk::inference::{
    finite_predictive, marginal_evidence, posterior, posterior_predictive, sample_predictive,
    ClosedFormPredictive, DiscreteDistribution, Posterior, Predictive,
};
use predrisk::model::{ConjugateModel, FiniteModel, Model, PriorFamily};
use predrisk::suite::random_suite;
use predrisk::Error;

fn bb(alpha: f64, beta: f64, n_obs: u32, n_pred: u32) -> Model {
    ConjugateModel::beta_bernoulli(alpha, beta, n_obs, n_pred).into()
}

#[test]
fn symmetric_likelihood_gives_flat_posterior() {
    let m: Model = FiniteModel::from_fn(
        pts(&[0.0, 1.0]),
        vec![0.5, 0.5],
        pts(&[0.0, 1.0]),
        pts(&[0.0, 1.0]),
        |_, k, s| [[0.1, 0.4], [0.3, 0.2]][k][s],
    )
    .unwrap()
    .into();
    match posterior(&m, &[1.0]).unwrap() {
        Posterior::Discrete(d) => assert_eq!(d.probs(), &[0.5, 0.5]),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn beta_bernoulli_posterior_matches_quadrature() {
    // Beta(1,1) prior, two successes out of two.
    let m = bb(1.0, 1.0, 2, 1);
    let post = posterior(&m, &[2.0]).unwrap();
    assert_eq!(post, Posterior::Updated(PriorFamily::Beta { alpha: 3.0, beta: 1.0 }));

    let prior = beta_density(1.0, 1.0);
    let unnorm = |t: f64| prior(t) * binomial_pmf(2, 2, t);
    let z = integrate(unnorm, 0.0, 1.0, 1e-14);
    let mean = integrate(|t| t * unnorm(t), 0.0, 1.0, 1e-14) / z;
    let second = integrate(|t| t * t * unnorm(t), 0.0, 1.0, 1e-14) / z;
    // Beta(3,1): mean 3/4, variance 3/80.
    assert_close(mean, 0.75, 1e-10);
    assert_close(second - mean * mean, 3.0 / 80.0, 1e-10);
    let Posterior::Updated(family) = post else { unreachable!() };
    for t in [0.1, 0.4, 0.9] {
        assert_close(family.density(t), unnorm(t) / z, 1e-9);
    }
}

#[test]
fn single_point_parameter_space_gives_point_mass() {
    let m: Model = FiniteModel::from_fn(
        pts(&[2.5]),
        vec![1.0],
        pts(&[0.0, 1.0, 2.0]),
        pts(&[0.0, 1.0]),
        |_, k, s| [[0.1, 0.2, 0.3], [0.2, 0.1, 0.1]][k][s],
    )
    .unwrap()
    .into();
    for s in [0.0, 1.0, 2.0] {
        match posterior(&m, &[s]).unwrap() {
            Posterior::Discrete(d) => {
                assert_eq!(d, DiscreteDistribution::point_mass(vec![2.5]));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn uniform_joint_evidence() {
    let m: Model = FiniteModel::from_fn(
        pts(&[0.0, 1.0]),
        vec![0.5, 0.5],
        pts(&[0.0, 1.0]),
        pts(&[0.0, 1.0]),
        |_, _, _| 0.25,
    )
    .unwrap()
    .into();
    assert_eq!(marginal_evidence(&m, &[0.0]).unwrap(), 0.5);
    assert_eq!(marginal_evidence(&m, &[1.0]).unwrap(), 0.5);
    assert_eq!(marginal_evidence(&m, &[7.0]).unwrap(), 0.0);
}

#[test]
fn beta_bernoulli_evidence_matches_quadrature() {
    let m = bb(1.0, 1.0, 2, 1);
    let oracle = integrate(|t| binomial_pmf(2, 1, t), 0.0, 1.0, 1e-14);
    assert_close(oracle, 1.0 / 3.0, 1e-12);
    assert_close(marginal_evidence(&m, &[1.0]).unwrap(), oracle, 1e-12);

    let m = bb(2.5, 0.8, 5, 1);
    let prior = beta_density(2.5, 0.8);
    let total: f64 = (0..=5).map(|s| marginal_evidence(&m, &[s as f64]).unwrap()).sum();
    assert_close(total, 1.0, 1e-12);
    for s in 0..=5u64 {
        // The Beta(2.5, 0.8) kernel is singular at 1; keep off the endpoint.
        let oracle = integrate(|t| prior(t) * binomial_pmf(5, s, t), 0.0, 1.0, 1e-12);
        assert_close(marginal_evidence(&m, &[s as f64]).unwrap(), oracle, 1e-4);
    }
}

#[test]
fn evidence_sums_to_one_on_random_models() {
    for inst in random_suite(400, 100, 3) {
        let m: Model = inst.model.clone().into();
        let total: f64 = inst
            .model
            .obs_space()
            .iter()
            .map(|y| marginal_evidence(&m, y).unwrap())
            .sum();
        assert_close(total, 1.0, 1e-12);
    }
}

#[test]
fn beta_bernoulli_predictive_examples() {
    let m = bb(1.0, 1.0, 2, 1);
    let p1 = match posterior_predictive(&m, &[1.0]).unwrap() {
        Predictive::ClosedForm(c) => c.pmf(1),
        other => panic!("unexpected {other:?}"),
    };
    assert_close(p1, 0.5, 1e-12);

    let Predictive::ClosedForm(c) = posterior_predictive(&m, &[2.0]).unwrap() else {
        panic!("closed form expected");
    };
    // P(next = 1 | two successes) = posterior mean of θ, by quadrature.
    let oracle = integrate(|t| t * t * t, 0.0, 1.0, 1e-14)
        / integrate(|t| t * t, 0.0, 1.0, 1e-14);
    assert_close(c.pmf(1), oracle, 1e-12);
    assert_close(c.pmf(1), 0.75, 1e-12);
    assert_close(c.pmf(0) + c.pmf(1), 1.0, 1e-12);
}

#[test]
fn independent_single_theta_predictive_is_the_likelihood() {
    let f_pred = [0.2, 0.3, 0.5];
    let f_obs = [0.6, 0.4];
    let m: Model = FiniteModel::from_fn(
        pts(&[1.0]),
        vec![1.0],
        pts(&[0.0, 1.0]),
        pts(&[0.0, 1.0, 2.0]),
        |_, k, s| f_pred[k] * f_obs[s],
    )
    .unwrap()
    .into();
    for s in [0.0, 1.0] {
        let Predictive::Discrete(d) = posterior_predictive(&m, &[s]).unwrap() else {
            panic!("discrete expected");
        };
        for (p, q) in d.probs().iter().zip(f_pred) {
            assert_close(*p, q, 1e-15);
        }
    }
}

#[test]
fn normal_predictive_matches_quadrature() {
    let (mu0, tau2, sigma2, n, m_pred) = (0.5, 2.0, 3.0, 4u32, 2u32);
    let m: Model = ConjugateModel::normal_known_var(mu0, tau2, sigma2, n, m_pred).into();
    let ybar = 1.3;
    let Predictive::ClosedForm(c) = posterior_predictive(&m, &[ybar]).unwrap() else {
        panic!("closed form expected");
    };
    let unnorm = |t: f64| normal_pdf(t, mu0, tau2) * normal_pdf(ybar, t, sigma2 / n as f64);
    let (lo, hi) = (-15.0, 15.0);
    let z = integrate(unnorm, lo, hi, 1e-14);
    for y in [-2.0, 0.0, 0.9, 3.0] {
        let oracle = integrate(
            |t| unnorm(t) * normal_pdf(y, t, sigma2 / m_pred as f64),
            lo,
            hi,
            1e-14,
        ) / z;
        assert_close(c.pdf(y), oracle, 1e-10);
    }
}

#[test]
fn gamma_poisson_predictive_matches_quadrature() {
    let (a, b, n, m_pred) = (2.0, 1.5, 3u32, 2u32);
    let m: Model = ConjugateModel::gamma_poisson(a, b, n, m_pred).into();
    let total = 4.0;
    let Predictive::ClosedForm(c) = posterior_predictive(&m, &[total]).unwrap() else {
        panic!("closed form expected");
    };
    let prior = gamma_density(a, b, 60.0);
    let unnorm = |t: f64| prior(t) * poisson_pmf(total as u64, n as f64 * t);
    let z = integrate(unnorm, 0.0, 60.0, 1e-14);
    let mut mass = 0.0;
    for k in 0..12u64 {
        let oracle =
            integrate(|t| unnorm(t) * poisson_pmf(k, m_pred as f64 * t), 0.0, 60.0, 1e-14) / z;
        assert_close(c.pmf(k), oracle, 1e-10);
        mass += c.pmf(k);
    }
    assert!(mass < 1.0);
}

#[test]
fn zero_evidence_is_an_error() {
    let m: Model = FiniteModel::from_fn(
        pts(&[0.0, 1.0]),
        vec![0.5, 0.5],
        pts(&[0.0, 1.0, 2.0]),
        pts(&[0.0]),
        |t, _, s| if s == t { 1.0 } else { 0.0 },
    )
    .unwrap()
    .into();
    assert!(matches!(
        posterior_predictive(&m, &[2.0]),
        Err(Error::ConditioningUndefined { .. })
    ));
    assert!(matches!(posterior(&m, &[5.0]), Err(Error::ConditioningUndefined { .. })));
    assert!(matches!(
        posterior_predictive(&bb(1.0, 1.0, 2, 1), &[3.0]),
        Err(Error::ConditioningUndefined { .. })
    ));
}

#[test]
fn finite_predictive_matches_brute_force() {
    for inst in random_suite(77, 60, 3) {
        for s in 0..inst.model.n_obs() {
            let got = finite_predictive(&inst.model, s).unwrap();
            for (a, b) in got.iter().zip(brute_predictive(&inst.model, s)) {
                assert_close(*a, b, 1e-12);
            }
        }
    }
}

#[test]
fn point_mass_sampling() {
    let p = Predictive::Discrete(DiscreteDistribution::point_mass(vec![3.0, -1.0]));
    let draws = sample_predictive(&p, 500, 9).unwrap();
    assert!(draws.iter().all(|d| d == &vec![3.0, -1.0]));
    assert!(sample_predictive(&p, 0, 9).is_err());
}

#[test]
fn sampling_frequencies_within_four_standard_errors() {
    let probs = vec![0.1, 0.25, 0.4, 0.25];
    let d = DiscreteDistribution::new(pts(&[0.0, 1.0, 2.0, 3.0]), probs.clone()).unwrap();
    let count = 100_000;
    let draws = sample_predictive(&Predictive::Discrete(d), count, 2024).unwrap();
    for (i, p) in probs.iter().enumerate() {
        let freq = draws.iter().filter(|y| y[0] == i as f64).count() as f64 / count as f64;
        let se = (p * (1.0 - p) / count as f64).sqrt();
        assert!((freq - p).abs() < 4.0 * se, "point {i}: {freq} vs {p}");
    }

    let nb = ClosedFormPredictive::NegativeBinomial { shape: 3.0, prob: 0.4 };
    let draws = sample_predictive(&Predictive::ClosedForm(nb), count, 5).unwrap();
    for k in 0..6u64 {
        let p = nb.pmf(k);
        let freq = draws.iter().filter(|y| y[0] == k as f64).count() as f64 / count as f64;
        let se = (p * (1.0 - p) / count as f64).sqrt();
        assert!((freq - p).abs() < 4.0 * se, "k={k}: {freq} vs {p}");
    }
}

#[test]
fn sampling_is_reproducible() {
    let c = ClosedFormPredictive::Normal { mean: 1.0, variance: 2.0 };
    let a = sample_predictive(&Predictive::ClosedForm(c), 1000, 42).unwrap();
    let b = sample_predictive(&Predictive::ClosedForm(c), 1000, 42).unwrap();
    let bits = |v: &[Vec<f64>]| v.iter().map(|x| x[0].to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    let c2 = sample_predictive(&Predictive::ClosedForm(c), 1000, 43).unwrap();
    assert_ne!(bits(&a), bits(&c2));
}
