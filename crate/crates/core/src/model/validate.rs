use std::fmt;

use super::{ConjugateModel, FiniteModel, Model, Point};

pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Normalization,
    Positivity,
    Negative,
    NonFinite,
    Duplicate,
    Hyperparameter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Index path of the offending entry, e.g. `joint[1]` or `prior_weights[0]`.
    pub path: String,
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: String, kind: ViolationKind, message: String) {
        self.violations.push(Violation {
            path,
            kind,
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}: {}", v.path, v.message)?;
        }
        Ok(())
    }
}

/// Checks every model invariant and reports each violation with its index path.
pub fn validate_model(model: &Model) -> ValidationReport {
    match model {
        Model::Finite(m) => validate_finite(m),
        Model::Conjugate(m) => validate_conjugate(m),
    }
}

fn check_points(report: &mut ValidationReport, name: &str, points: &[Point]) {
    for (i, p) in points.iter().enumerate() {
        if p.iter().any(|x| !x.is_finite()) {
            report.push(
                format!("{name}[{i}]"),
                ViolationKind::NonFinite,
                "coordinates must be finite".into(),
            );
        }
        if points[..i].iter().any(|q| q == p) {
            report.push(
                format!("{name}[{i}]"),
                ViolationKind::Duplicate,
                format!("duplicate point {p:?}"),
            );
        }
    }
}

fn validate_finite(m: &FiniteModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_points(&mut report, "theta_points", m.theta_points());
    check_points(&mut report, "obs_space", m.obs_space());
    check_points(&mut report, "pred_space", m.pred_space());

    let mut prior_finite = true;
    for (i, &w) in m.prior().iter().enumerate() {
        if !w.is_finite() {
            prior_finite = false;
            report.push(
                format!("prior_weights[{i}]"),
                ViolationKind::NonFinite,
                "weight must be finite".into(),
            );
        } else if w <= 0.0 {
            report.push(
                format!("prior_weights[{i}]"),
                ViolationKind::Positivity,
                format!("prior weight must be strictly positive, got {w}"),
            );
        }
    }
    let total: f64 = m.prior().iter().sum();
    if prior_finite && (total - 1.0).abs() > NORMALIZATION_TOL {
        report.push(
            "prior_weights".into(),
            ViolationKind::Normalization,
            format!("prior weights sum to {total}, expected 1"),
        );
    }

    for t in 0..m.n_theta() {
        let mut sum = 0.0;
        let mut finite = true;
        for k in 0..m.n_pred() {
            for s in 0..m.n_obs() {
                let v = m.joint(t, k, s);
                if !v.is_finite() {
                    finite = false;
                    report.push(
                        format!("joint[{t}][{k}][{s}]"),
                        ViolationKind::NonFinite,
                        "probability must be finite".into(),
                    );
                } else if v < 0.0 {
                    report.push(
                        format!("joint[{t}][{k}][{s}]"),
                        ViolationKind::Negative,
                        format!("probability must be nonnegative, got {v}"),
                    );
                }
                sum += v;
            }
        }
        if finite && (sum - 1.0).abs() > NORMALIZATION_TOL {
            report.push(
                format!("joint[{t}]"),
                ViolationKind::Normalization,
                format!("slice for theta index {t} sums to {sum}, expected 1"),
            );
        }
    }
    report
}

fn validate_conjugate(m: &ConjugateModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut positive = |name: &str, v: f64| {
        if !(v.is_finite() && v > 0.0) {
            report.push(
                name.to_string(),
                ViolationKind::Hyperparameter,
                format!("must be strictly positive and finite, got {v}"),
            );
        }
    };
    match *m {
        ConjugateModel::BetaBernoulli { alpha, beta, .. } => {
            positive("alpha", alpha);
            positive("beta", beta);
        }
        ConjugateModel::NormalKnownVar {
            prior_var,
            noise_var,
            ..
        } => {
            positive("prior_var", prior_var);
            positive("noise_var", noise_var);
        }
        ConjugateModel::GammaPoisson { shape, rate, .. } => {
            positive("shape", shape);
            positive("rate", rate);
        }
    }
    if let ConjugateModel::NormalKnownVar { prior_mean, .. } = *m {
        if !prior_mean.is_finite() {
            report.push(
                "prior_mean".into(),
                ViolationKind::NonFinite,
                "must be finite".into(),
            );
        }
    }
    if m.n_obs() < 1 {
        report.push(
            "n_obs".into(),
            ViolationKind::Hyperparameter,
            "must be at least 1".into(),
        );
    }
    if m.n_pred() < 1 {
        report.push(
            "n_pred".into(),
            ViolationKind::Hyperparameter,
            "must be at least 1".into(),
        );
    }
    report
}
