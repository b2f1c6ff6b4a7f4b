//! Seeded generation of small random finite models, used to replay the
//! optimality and admissibility certificates on many instances.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::model::{FiniteModel, LossSpec, Point};
use crate::numerics::seeded_rng;

/// One generated instance; `seed` replays it exactly.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub seed: u64,
    pub model: FiniteModel,
    pub loss: LossSpec,
}

/// A point drawn uniformly from the probability simplex of dimension `n`.
fn simplex<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 && draws.iter().all(|&d| d > 0.0) {
            return draws.into_iter().map(|d| d / total).collect();
        }
    }
}

fn axis(n: usize) -> Vec<Point> {
    (0..n).map(|i| vec![i as f64]).collect()
}

/// A finite model with `|Θ|, |obs|, |pred|` each uniform on `1..=max_dim`,
/// per-θ joint tables uniform on the simplex and a strictly positive prior.
pub fn random_finite_model(seed: u64, max_dim: usize) -> FiniteModel {
    let mut rng = seeded_rng(seed);
    let n_theta = rng.random_range(1..=max_dim);
    let n_obs = rng.random_range(1..=max_dim);
    let n_pred = rng.random_range(1..=max_dim);
    let prior = simplex(n_theta, &mut rng);
    let tables: Vec<Vec<f64>> = (0..n_theta)
        .map(|_| simplex(n_pred * n_obs, &mut rng))
        .collect();
    FiniteModel::from_fn(
        axis(n_theta),
        prior,
        axis(n_obs),
        axis(n_pred),
        |t, k, s| tables[t][k * n_obs + s],
    )
    .expect("generated shapes are consistent")
}

/// One of squared, absolute, zero-one or a random nonnegative table loss.
pub fn random_loss(seed: u64, n_pred: usize) -> LossSpec {
    let mut rng = seeded_rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    match rng.random_range(0..4) {
        0 => LossSpec::squared(),
        1 => LossSpec::absolute(),
        2 => LossSpec::zero_one(0.0),
        _ => LossSpec::table(
            (0..n_pred)
                .map(|_| (0..n_pred).map(|_| rng.random::<f64>()).collect())
                .collect(),
        ),
    }
}

/// `count` instances with seeds `base_seed, base_seed + 1, ...`.
pub fn random_suite(base_seed: u64, count: usize, max_dim: usize) -> Vec<RandomInstance> {
    (0..count as u64)
        .map(|i| {
            let seed = base_seed.wrapping_add(i);
            let model = random_finite_model(seed, max_dim);
            let loss = random_loss(seed, model.n_pred());
            RandomInstance { seed, model, loss }
        })
        .collect()
}
