//! Independent oracles for the integration tests: plain composite Simpson,
//! brute-force sums straight off the joint table, hand-rolled pmfs.
#![allow(dead_code)]

use std::path::PathBuf;

use predrisk::model::{evaluate_loss, FiniteModel, LossSpec, Point};

pub fn pts(v: &[f64]) -> Vec<Point> {
    v.iter().map(|&x| vec![x]).collect()
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixtures_in(dir: &str) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixture(dir))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "predrisk"))
        .collect();
    files.sort();
    files
}

/// Composite Simpson with `n` (even) panels.
pub fn simpson_n(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Simpson with panel doubling until two successive estimates agree to `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut n = 64;
    let mut prev = simpson_n(&f, a, b, n);
    loop {
        n *= 2;
        let next = simpson_n(&f, a, b, n);
        if (next - prev).abs() < tol || n >= 1 << 22 {
            return next;
        }
        prev = next;
    }
}

pub fn choose(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    choose(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

pub fn poisson_pmf(k: u64, mu: f64) -> f64 {
    let mut v = (-mu).exp();
    for i in 1..=k {
        v *= mu / i as f64;
    }
    v
}

pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean) * (x - mean) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Unnormalised Beta kernel, normalised numerically.
pub fn beta_density(alpha: f64, beta: f64) -> impl Fn(f64) -> f64 {
    let kernel = move |t: f64| {
        let v = t.powf(alpha - 1.0) * (1.0 - t).powf(beta - 1.0);
        if (0.0..=1.0).contains(&t) && v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let z = integrate(kernel, 0.0, 1.0, 1e-14);
    move |t| kernel(t) / z
}

/// Gamma(shape, rate) density, normalised numerically over `[0, upper]`.
pub fn gamma_density(shape: f64, rate: f64, upper: f64) -> impl Fn(f64) -> f64 {
    let kernel = move |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            t.powf(shape - 1.0) * (-rate * t).exp()
        }
    };
    let z = integrate(kernel, 0.0, upper, 1e-14);
    move |t| kernel(t) / z
}

/// Frequentist risk at θ index `t`, straight off the joint table.
pub fn brute_frequentist(m: &FiniteModel, loss: &LossSpec, table: &[usize], t: usize) -> f64 {
    let pred = m.pred_space();
    let mut total = 0.0;
    for s in 0..m.n_obs() {
        for k in 0..m.n_pred() {
            let l = evaluate_loss(loss, &pred[table[s]], &pred[k], Some(pred)).unwrap();
            total += l * m.joint(t, k, s);
        }
    }
    total
}

/// `Σ_θ Σ_pred Σ_obs L(rule(obs), pred) t[θ][pred][obs] g(θ)`.
pub fn brute_bayes(m: &FiniteModel, loss: &LossSpec, table: &[usize]) -> f64 {
    let pred = m.pred_space();
    let mut total = 0.0;
    for t in 0..m.n_theta() {
        for k in 0..m.n_pred() {
            for s in 0..m.n_obs() {
                let l = evaluate_loss(loss, &pred[table[s]], &pred[k], Some(pred)).unwrap();
                total += l * m.joint(t, k, s) * m.prior()[t];
            }
        }
    }
    total
}

pub fn brute_evidence(m: &FiniteModel, s: usize) -> f64 {
    let mut total = 0.0;
    for t in 0..m.n_theta() {
        for k in 0..m.n_pred() {
            total += m.joint(t, k, s) * m.prior()[t];
        }
    }
    total
}

pub fn brute_predictive(m: &FiniteModel, s: usize) -> Vec<f64> {
    let z = brute_evidence(m, s);
    (0..m.n_pred())
        .map(|k| (0..m.n_theta()).map(|t| m.joint(t, k, s) * m.prior()[t]).sum::<f64>() / z)
        .collect()
}

/// Every map obs → pred, odometer style with obs index 0 most significant.
pub fn all_tables(n_obs: usize, n_pred: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n_obs];
    loop {
        out.push(cur.clone());
        let mut i = n_obs;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < n_pred {
                break;
            }
            cur[i] = 0;
        }
    }
}

pub fn assert_close(actual: f64, expected: f64, tol: f64) {
    assert!(
        (actual - expected).abs() <= tol,
        "{actual} differs from {expected} by more than {tol}"
    );
}
