//! The `.predrisk` document format: a TOML tree with `format_version`,
//! `model`, `loss` and an optional `experiment` stanza.
//!
//! ```toml
//! format_version = 1
//!
//! [model]
//! kind = "finite"
//! theta_points = [[0.0], [1.0]]
//! prior_weights = [0.5, 0.5]
//! obs_space = [[0.0], [1.0]]
//! pred_space = [[0.0], [1.0]]
//! joint = [[[0.25, 0.25], [0.25, 0.25]], [[0.25, 0.25], [0.25, 0.25]]]
//!
//! [loss]
//! form = "squared"
//! ```
//!
//! Probabilities are never renormalised; a model that breaks an invariant is
//! rejected with the index path of every violation.

use std::fmt::Write as _;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::model::{
    validate_model, ConjugateModel, FiniteModel, LossForm, LossSpec, Model, Point,
};

pub const FORMAT_VERSION: i64 = 1;
pub const EXTENSION: &str = "predrisk";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Experiment {
    pub seed: Option<u64>,
    pub mc_samples: Option<u64>,
    pub tol: Option<f64>,
    pub cap: Option<u64>,
    pub theta_grid: Option<Vec<Point>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecDocument {
    pub model: Model,
    pub loss: LossSpec,
    pub experiment: Option<Experiment>,
}

fn schema(key: &str, constraint: impl Into<String>) -> Error {
    Error::Schema {
        key: key.to_string(),
        constraint: constraint.into(),
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Counts `[model]`, `[[model]]` and `model = ...` stanzas so duplicates are
/// reported as a schema problem rather than a generic syntax error.
fn model_stanzas(text: &str) -> usize {
    text.lines()
        .map(str::trim)
        .filter(|l| {
            let compact: String = l.chars().filter(|c| !c.is_whitespace()).collect();
            compact.starts_with("[model]")
                || compact.starts_with("[[model]]")
                || compact.starts_with("model=")
        })
        .count()
}

fn check_keys(table: &Table, prefix: &str, allowed: &[&str]) -> Result<()> {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            let path = if prefix.is_empty() {
                key.clone()
            } else {
                format!("{prefix}.{key}")
            };
            return Err(schema(
                &path,
                format!("unknown key; expected one of {}", allowed.join(", ")),
            ));
        }
    }
    Ok(())
}

fn required<'a>(table: &'a Table, prefix: &str, key: &str) -> Result<&'a Value> {
    table
        .get(key)
        .ok_or_else(|| schema(&format!("{prefix}.{key}"), "required key is missing"))
}

fn number(value: &Value, path: &str) -> Result<f64> {
    let x = match value {
        Value::Integer(i) => *i as f64,
        Value::Float(f) => *f,
        _ => return Err(schema(path, "expected a number")),
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(schema(path, "numbers must be finite"))
    }
}

fn count(value: &Value, path: &str) -> Result<u64> {
    match value {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(schema(path, "expected a nonnegative integer")),
    }
}

fn count_u32(value: &Value, path: &str) -> Result<u32> {
    let n = count(value, path)?;
    u32::try_from(n).map_err(|_| schema(path, "integer too large"))
}

fn array<'a>(value: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    value
        .as_array()
        .ok_or_else(|| schema(path, "expected an array"))
}

fn numbers(value: &Value, path: &str) -> Result<Vec<f64>> {
    array(value, path)?
        .iter()
        .enumerate()
        .map(|(i, v)| number(v, &format!("{path}[{i}]")))
        .collect()
}

/// A list of points; a bare number stands for a one-dimensional point.
fn points(value: &Value, path: &str) -> Result<Vec<Point>> {
    array(value, path)?
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let p = format!("{path}[{i}]");
            match v {
                Value::Array(_) => numbers(v, &p),
                _ => Ok(vec![number(v, &p)?]),
            }
        })
        .collect()
}

fn matrix(value: &Value, path: &str) -> Result<Vec<Vec<f64>>> {
    array(value, path)?
        .iter()
        .enumerate()
        .map(|(i, row)| numbers(row, &format!("{path}[{i}]")))
        .collect()
}

fn parse_model(table: &Table) -> Result<Model> {
    let kind = required(table, "model", "kind")?
        .as_str()
        .ok_or_else(|| schema("model.kind", "expected a string"))?;
    let get = |key: &str| required(table, "model", key);
    let path = |key: &str| format!("model.{key}");
    match kind {
        "finite" => {
            check_keys(
                table,
                "model",
                &["kind", "theta_points", "prior_weights", "obs_space", "pred_space", "joint"],
            )?;
            let theta = points(get("theta_points")?, &path("theta_points"))?;
            let prior = numbers(get("prior_weights")?, &path("prior_weights"))?;
            let obs = points(get("obs_space")?, &path("obs_space"))?;
            let pred = points(get("pred_space")?, &path("pred_space"))?;
            let joint_value = get("joint")?;
            let joint = array(joint_value, "model.joint")?
                .iter()
                .enumerate()
                .map(|(t, slice)| matrix(slice, &format!("model.joint[{t}]")))
                .collect::<Result<Vec<_>>>()?;
            FiniteModel::new(theta, prior, obs, pred, joint)
                .map(Model::Finite)
                .map_err(|e| schema("model", format!("inconsistent dimensions: {e}")))
        }
        "beta_bernoulli" => {
            check_keys(table, "model", &["kind", "alpha", "beta", "n_obs", "n_pred"])?;
            Ok(ConjugateModel::beta_bernoulli(
                number(get("alpha")?, &path("alpha"))?,
                number(get("beta")?, &path("beta"))?,
                count_u32(get("n_obs")?, &path("n_obs"))?,
                count_u32(get("n_pred")?, &path("n_pred"))?,
            )
            .into())
        }
        "normal_known_var" => {
            check_keys(
                table,
                "model",
                &["kind", "prior_mean", "prior_var", "noise_var", "n_obs", "n_pred"],
            )?;
            Ok(ConjugateModel::normal_known_var(
                number(get("prior_mean")?, &path("prior_mean"))?,
                number(get("prior_var")?, &path("prior_var"))?,
                number(get("noise_var")?, &path("noise_var"))?,
                count_u32(get("n_obs")?, &path("n_obs"))?,
                count_u32(get("n_pred")?, &path("n_pred"))?,
            )
            .into())
        }
        "gamma_poisson" => {
            check_keys(table, "model", &["kind", "shape", "rate", "n_obs", "n_pred"])?;
            Ok(ConjugateModel::gamma_poisson(
                number(get("shape")?, &path("shape"))?,
                number(get("rate")?, &path("rate"))?,
                count_u32(get("n_obs")?, &path("n_obs"))?,
                count_u32(get("n_pred")?, &path("n_pred"))?,
            )
            .into())
        }
        other => Err(schema(
            "model.kind",
            format!(
                "unknown kind \"{other}\"; expected finite, beta_bernoulli, normal_known_var or gamma_poisson"
            ),
        )),
    }
}

fn parse_loss(table: &Table) -> Result<LossSpec> {
    let form = required(table, "loss", "form")?
        .as_str()
        .ok_or_else(|| schema("loss.form", "expected a string"))?;
    let form = match form {
        "squared" => {
            check_keys(table, "loss", &["form", "scale"])?;
            LossForm::Squared
        }
        "absolute" => {
            check_keys(table, "loss", &["form", "scale"])?;
            LossForm::Absolute
        }
        "zero_one" => {
            check_keys(table, "loss", &["form", "band", "scale"])?;
            let band = number(required(table, "loss", "band")?, "loss.band")?;
            if band < 0.0 {
                return Err(schema("loss.band", "must be >= 0"));
            }
            LossForm::ZeroOne { band }
        }
        "table" => {
            check_keys(table, "loss", &["form", "matrix", "scale"])?;
            let m = matrix(required(table, "loss", "matrix")?, "loss.matrix")?;
            for (i, row) in m.iter().enumerate() {
                if let Some(j) = row.iter().position(|v| *v < 0.0) {
                    return Err(schema(&format!("loss.matrix[{i}][{j}]"), "losses must be >= 0"));
                }
            }
            LossForm::Table { matrix: m }
        }
        other => {
            return Err(schema(
                "loss.form",
                format!("unknown form \"{other}\"; expected squared, absolute, zero_one or table"),
            ))
        }
    };
    let scale = match table.get("scale") {
        Some(v) => {
            let s = number(v, "loss.scale")?;
            if s <= 0.0 {
                return Err(schema("loss.scale", "must be > 0"));
            }
            s
        }
        None => 1.0,
    };
    Ok(LossSpec::with_scale(form, scale))
}

fn parse_experiment(table: &Table) -> Result<Experiment> {
    check_keys(
        table,
        "experiment",
        &["seed", "mc_samples", "tol", "cap", "theta_grid"],
    )?;
    let mut exp = Experiment::default();
    if let Some(v) = table.get("seed") {
        exp.seed = Some(count(v, "experiment.seed")?);
    }
    if let Some(v) = table.get("mc_samples") {
        let n = count(v, "experiment.mc_samples")?;
        if n == 0 {
            return Err(schema("experiment.mc_samples", "must be >= 1"));
        }
        exp.mc_samples = Some(n);
    }
    if let Some(v) = table.get("tol") {
        let t = number(v, "experiment.tol")?;
        if t <= 0.0 {
            return Err(schema("experiment.tol", "must be > 0"));
        }
        exp.tol = Some(t);
    }
    if let Some(v) = table.get("cap") {
        let c = count(v, "experiment.cap")?;
        if c == 0 {
            return Err(schema("experiment.cap", "must be >= 1"));
        }
        exp.cap = Some(c);
    }
    if let Some(v) = table.get("theta_grid") {
        let grid = points(v, "experiment.theta_grid")?;
        if grid.is_empty() {
            return Err(schema("experiment.theta_grid", "must not be empty"));
        }
        exp.theta_grid = Some(grid);
    }
    Ok(exp)
}

/// Parses and validates a document.
pub fn parse_spec(text: &str) -> Result<SpecDocument> {
    if model_stanzas(text) > 1 {
        return Err(schema("model", "exactly one model stanza is allowed"));
    }
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        Error::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    check_keys(&root, "", &["format_version", "model", "loss", "experiment"])?;

    match root.get("format_version") {
        Some(Value::Integer(v)) if *v == FORMAT_VERSION => {}
        Some(_) => return Err(schema("format_version", "must be the integer 1")),
        None => return Err(schema("format_version", "required key is missing")),
    }
    let model_table = match root.get("model") {
        Some(Value::Table(t)) => t,
        Some(Value::Array(_)) => return Err(schema("model", "exactly one model stanza is allowed")),
        Some(_) => return Err(schema("model", "expected a table")),
        None => return Err(schema("model", "exactly one model stanza is required")),
    };
    let loss_table = match root.get("loss") {
        Some(Value::Table(t)) => t,
        Some(_) => return Err(schema("loss", "expected a table")),
        None => return Err(schema("loss", "required stanza is missing")),
    };
    let experiment = match root.get("experiment") {
        Some(Value::Table(t)) => Some(parse_experiment(t)?),
        Some(_) => return Err(schema("experiment", "expected a table")),
        None => None,
    };

    let model = parse_model(model_table)?;
    let report = validate_model(&model);
    if !report.is_valid() {
        return Err(Error::InvalidModel(report));
    }
    let loss = parse_loss(loss_table)?;
    let pred_len = model.pred_points().map(|p| p.len());
    if let Err(e) = loss.check(pred_len) {
        return Err(schema(
            if loss.is_table() { "loss.matrix" } else { "loss" },
            e.to_string(),
        ));
    }
    if let (Some(grid), Some(exp_dim)) = (
        experiment.as_ref().and_then(|e| e.theta_grid.as_ref()),
        Some(model.parameter_space().dimension()),
    ) {
        if let Some(i) = grid.iter().position(|p| p.len() != exp_dim) {
            return Err(schema(
                &format!("experiment.theta_grid[{i}]"),
                format!("expected a point of dimension {exp_dim}"),
            ));
        }
    }
    Ok(SpecDocument {
        model,
        loss,
        experiment,
    })
}

/// Seventeen significant digits, which round-trips every finite double.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn float_list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| float(x)).collect();
    format!("[{}]", items.join(", "))
}

fn point_list(ps: &[Point]) -> String {
    let items: Vec<String> = ps.iter().map(|p| float_list(p)).collect();
    format!("[{}]", items.join(", "))
}

/// Canonical form: keys in schema order, floats with 17 significant digits.
pub fn serialize_spec(doc: &SpecDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format_version = {FORMAT_VERSION}");
    let _ = writeln!(out);
    let _ = writeln!(out, "[model]");
    match &doc.model {
        Model::Finite(m) => {
            let _ = writeln!(out, "kind = \"finite\"");
            let _ = writeln!(out, "theta_points = {}", point_list(m.theta_points()));
            let _ = writeln!(out, "prior_weights = {}", float_list(m.prior()));
            let _ = writeln!(out, "obs_space = {}", point_list(m.obs_space()));
            let _ = writeln!(out, "pred_space = {}", point_list(m.pred_space()));
            let _ = writeln!(out, "joint = [");
            for slice in m.joint_table() {
                let _ = writeln!(out, "  {},", point_list(&slice));
            }
            let _ = writeln!(out, "]");
        }
        Model::Conjugate(c) => {
            let _ = writeln!(out, "kind = \"{}\"", c.kind());
            match *c {
                ConjugateModel::BetaBernoulli { alpha, beta, .. } => {
                    let _ = writeln!(out, "alpha = {}", float(alpha));
                    let _ = writeln!(out, "beta = {}", float(beta));
                }
                ConjugateModel::NormalKnownVar {
                    prior_mean,
                    prior_var,
                    noise_var,
                    ..
                } => {
                    let _ = writeln!(out, "prior_mean = {}", float(prior_mean));
                    let _ = writeln!(out, "prior_var = {}", float(prior_var));
                    let _ = writeln!(out, "noise_var = {}", float(noise_var));
                }
                ConjugateModel::GammaPoisson { shape, rate, .. } => {
                    let _ = writeln!(out, "shape = {}", float(shape));
                    let _ = writeln!(out, "rate = {}", float(rate));
                }
            }
            let _ = writeln!(out, "n_obs = {}", c.n_obs());
            let _ = writeln!(out, "n_pred = {}", c.n_pred());
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "[loss]");
    let _ = writeln!(out, "form = \"{}\"", doc.loss.name());
    match doc.loss.form() {
        LossForm::ZeroOne { band } => {
            let _ = writeln!(out, "band = {}", float(*band));
        }
        LossForm::Table { matrix } => {
            let _ = writeln!(out, "matrix = {}", point_list(matrix));
        }
        _ => {}
    }
    if doc.loss.scale() != 1.0 {
        let _ = writeln!(out, "scale = {}", float(doc.loss.scale()));
    }
    if let Some(exp) = &doc.experiment {
        let _ = writeln!(out);
        let _ = writeln!(out, "[experiment]");
        if let Some(seed) = exp.seed {
            let _ = writeln!(out, "seed = {seed}");
        }
        if let Some(n) = exp.mc_samples {
            let _ = writeln!(out, "mc_samples = {n}");
        }
        if let Some(tol) = exp.tol {
            let _ = writeln!(out, "tol = {}", float(tol));
        }
        if let Some(cap) = exp.cap {
            let _ = writeln!(out, "cap = {cap}");
        }
        if let Some(grid) = &exp.theta_grid {
            let _ = writeln!(out, "theta_grid = {}", point_list(grid));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
format_version = 1

[model]
kind = "finite"
theta_points = [0.0, 1.0]
prior_weights = [0.5, 0.5]
obs_space = [0, 1]
pred_space = [0, 1]
joint = [
  [[0.25, 0.25], [0.25, 0.25]],
  [[0.25, 0.25], [0.25, 0.25]],
]

[loss]
form = "squared"
"#;

    #[test]
    fn parses_minimal_document() {
        let doc = parse_spec(MINIMAL).unwrap();
        let m = doc.model.as_finite().unwrap();
        assert_eq!(m.n_theta(), 2);
        assert_eq!(m.joint(1, 1, 1), 0.25);
        assert_eq!(doc.loss, LossSpec::squared());
        assert!(doc.experiment.is_none());
    }

    #[test]
    fn round_trip() {
        let doc = parse_spec(MINIMAL).unwrap();
        let text = serialize_spec(&doc);
        assert_eq!(parse_spec(&text).unwrap(), doc);
        assert_eq!(serialize_spec(&parse_spec(&text).unwrap()), text);
    }

    #[test]
    fn slice_normalisation_names_theta_index() {
        let bad = MINIMAL.replace(
            "  [[0.25, 0.25], [0.25, 0.25]],\n]",
            "  [[0.25, 0.15], [0.25, 0.25]],\n]",
        );
        match parse_spec(&bad).unwrap_err() {
            Error::InvalidModel(report) => {
                assert_eq!(report.violations.len(), 1);
                assert_eq!(report.violations[0].path, "joint[1]");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn duplicate_model_stanza() {
        let dup = format!("{MINIMAL}\n[model]\nkind = \"beta_bernoulli\"\n");
        match parse_spec(&dup).unwrap_err() {
            Error::Schema { key, constraint } => {
                assert_eq!(key, "model");
                assert!(constraint.contains("exactly one model"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_spec("format_version = 1\n[model\n").unwrap_err() {
            Error::Syntax { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let extra = MINIMAL.replace("form = \"squared\"", "form = \"squared\"\nband = 0.5");
        assert!(matches!(
            parse_spec(&extra),
            Err(Error::Schema { key, .. }) if key == "loss.band"
        ));
    }

    #[test]
    fn conjugate_round_trip_preserves_hyperparameters() {
        let text = "format_version = 1\n[model]\nkind = \"normal_known_var\"\nprior_mean = 0.1\nprior_var = 0.3\nnoise_var = 1e-3\nn_obs = 4\nn_pred = 2\n[loss]\nform = \"zero_one\"\nband = 0.25\n[experiment]\nseed = 9\ntheta_grid = [-1.0, 0.0, 1.0]\n";
        let doc = parse_spec(text).unwrap();
        assert_eq!(
            doc.model,
            Model::Conjugate(ConjugateModel::normal_known_var(0.1, 0.3, 1e-3, 4, 2))
        );
        let again = parse_spec(&serialize_spec(&doc)).unwrap();
        assert_eq!(again, doc);
    }
}
