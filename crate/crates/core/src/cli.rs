//! Command-line front end: `predrisk predict|risk|admissibility <spec> [flags]`.
//!
//! Standard output carries data only; diagnostics go to standard error. Exit
//! codes: 0 success, 2 spec or argument errors, 3 undefined conditioning,
//! 4 rule-file mismatch, 5 rule-space cap exceeded.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use toml::Table;

use crate::admissibility::{self, DEFAULT_TOL};
use crate::error::Error;
use crate::inference::{self, ClosedFormPredictive, Predictive};
use crate::model::{Model, Point, PointSummary, PredictionRule, RiskEstimate, Search};
use crate::modelspec::{self, SpecDocument};
use crate::risk::{self, MethodPreference, RiskOptions};
use crate::ruleopt::{self, DEFAULT_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SPEC: i32 = 2;
pub const EXIT_CONDITIONING: i32 = 3;
pub const EXIT_RULE_MISMATCH: i32 = 4;
pub const EXIT_CAP: i32 = 5;

const DEFAULT_MC_SAMPLES: u64 = 100_000;

#[derive(Debug, Parser)]
#[command(name = "predrisk", version, about = "Bayes prediction rules, prediction risk and admissibility")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Dominance strictness tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    mc_samples: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum number of enumerated rules.
    #[arg(long, global = true)]
    cap: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Risk evaluation method; `auto` prefers exact, then closed form, then Monte Carlo.
    #[arg(long, global = true, value_enum, default_value_t = Method::Auto)]
    method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Functional {
    Frequentist,
    Bayes,
    PosteriorPredictive,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Posterior predictive, Bayes point prediction and its risk for one observation.
    Predict {
        spec: PathBuf,
        /// Observation, components separated by commas.
        #[arg(long, allow_hyphen_values = true)]
        y_obs: String,
    },
    /// Risk of a prediction rule under one of the three risk functionals.
    Risk {
        spec: PathBuf,
        /// `bayes`, `mean`, `median`, `mode` or a rule file.
        #[arg(long, default_value = "bayes")]
        rule: String,
        #[arg(long, value_enum, default_value_t = Functional::Frequentist)]
        functional: Functional,
        /// Parameter values; commas separate scalar points, semicolons separate vector points.
        #[arg(long, allow_hyphen_values = true)]
        theta_grid: Option<String>,
        /// Observations for the posterior-predictive functional, same syntax as `--theta-grid`.
        #[arg(long, allow_hyphen_values = true)]
        y_obs: Option<String>,
    },
    /// Partitions every rule of a finite model into admissible and inadmissible.
    Admissibility { spec: PathBuf },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ConditioningUndefined { .. } => EXIT_CONDITIONING,
            Error::RuleMismatch(_) => EXIT_RULE_MISMATCH,
            Error::TooManyRules { .. } => EXIT_CAP,
            _ => EXIT_SPEC,
        };
        Failure::new(code, e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SPEC } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_SPEC;
            }
            EXIT_OK
        }
        Err(f) => {
            let _ = writeln!(err, "predrisk: {}", f.message);
            f.code
        }
    }
}

/// Effective settings after merging flags over the document's experiment stanza.
#[derive(Debug, Clone)]
struct Settings {
    tol: f64,
    mc_samples: u64,
    seed: u64,
    cap: u64,
    method: Method,
}

impl Settings {
    fn resolve(global: &GlobalArgs, doc: &SpecDocument) -> CliResult<Self> {
        let exp = doc.experiment.clone().unwrap_or_default();
        let s = Settings {
            tol: global.tol.or(exp.tol).unwrap_or(DEFAULT_TOL),
            mc_samples: global.mc_samples.or(exp.mc_samples).unwrap_or(DEFAULT_MC_SAMPLES),
            seed: global.seed.or(exp.seed).unwrap_or(0),
            cap: global.cap.or(exp.cap).unwrap_or(DEFAULT_CAP),
            method: global.method,
        };
        if !(s.tol > 0.0 && s.tol.is_finite()) {
            return Err(Failure::new(EXIT_SPEC, "--tol must be a positive number"));
        }
        if s.mc_samples == 0 {
            return Err(Failure::new(EXIT_SPEC, "--mc-samples must be at least 1"));
        }
        if s.cap == 0 {
            return Err(Failure::new(EXIT_SPEC, "--cap must be at least 1"));
        }
        Ok(s)
    }

    fn risk_options(&self) -> RiskOptions {
        RiskOptions {
            mc_samples: self.mc_samples,
            seed: self.seed,
            preference: match self.method {
                Method::Auto => MethodPreference::Auto,
                Method::MonteCarlo => MethodPreference::MonteCarlo,
            },
        }
    }

    fn method_name(&self) -> &'static str {
        match self.method {
            Method::Auto => "auto",
            Method::MonteCarlo => "monte-carlo",
        }
    }

    /// `key=value` provenance pairs, in a fixed order.
    fn pairs(&self, command: &str, spec: &Path, doc: &SpecDocument) -> Vec<(String, String)> {
        vec![
            ("command".into(), command.into()),
            ("spec".into(), spec.display().to_string()),
            ("loss".into(), doc.loss.name().into()),
            ("tol".into(), num(self.tol)),
            ("mc_samples".into(), self.mc_samples.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("cap".into(), self.cap.to_string()),
            ("method".into(), self.method_name().into()),
        ]
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn point_text(p: &[f64]) -> String {
    p.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

fn provenance_line(pairs: &[(String, String)]) -> String {
    let body: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("# predrisk {}\n", body.join(" "))
}

fn provenance_json(pairs: &[(String, String)]) -> Value {
    let map: serde_json::Map<String, Value> = pairs
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    json!({ "provenance": map })
}

fn load_spec(path: &Path) -> CliResult<SpecDocument> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_SPEC, format!("cannot read {}: {e}", path.display())))?;
    modelspec::parse_spec(&text)
        .map_err(|e| Failure::new(EXIT_SPEC, format!("{}: {e}", path.display())))
}

fn parse_point(text: &str) -> CliResult<Point> {
    text.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| Failure::new(EXIT_SPEC, format!("cannot parse number `{}`", c.trim())))
        })
        .collect()
}

/// Scalar points separated by commas when `dim == 1`; otherwise vector
/// points separated by semicolons with comma-separated components.
fn parse_points(text: &str, dim: usize) -> CliResult<Vec<Point>> {
    let points: Vec<Point> = if dim == 1 && !text.contains(';') {
        parse_point(text)?.into_iter().map(|x| vec![x]).collect()
    } else {
        text.split(';').map(parse_point).collect::<CliResult<_>>()?
    };
    if points.is_empty() {
        return Err(Failure::new(EXIT_SPEC, "empty point list"));
    }
    Ok(points)
}

fn obs_dimension(model: &Model) -> usize {
    model
        .obs_points()
        .and_then(|p| p.first().map(Vec::len))
        .unwrap_or(1)
}

fn execute(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Predict { spec, y_obs } => {
            let doc = load_spec(spec)?;
            let settings = Settings::resolve(&cli.global, &doc)?;
            let mut pairs = settings.pairs("predict", spec, &doc);
            pairs.push(("y_obs".into(), y_obs.clone()));
            cmd_predict(&doc, &settings, &pairs, y_obs, cli.global.format)
        }
        Command::Risk {
            spec,
            rule,
            functional,
            theta_grid,
            y_obs,
        } => {
            let doc = load_spec(spec)?;
            let settings = Settings::resolve(&cli.global, &doc)?;
            let mut pairs = settings.pairs("risk", spec, &doc);
            pairs.push(("rule".into(), rule.clone()));
            pairs.push((
                "functional".into(),
                functional
                    .to_possible_value()
                    .expect("no skipped variants")
                    .get_name()
                    .to_string(),
            ));
            let rule = resolve_rule(&doc, rule)?;
            cmd_risk(
                &doc,
                &settings,
                &pairs,
                &rule,
                *functional,
                theta_grid.as_deref(),
                y_obs.as_deref(),
                cli.global.format.unwrap_or(Format::Csv),
            )
        }
        Command::Admissibility { spec } => {
            let doc = load_spec(spec)?;
            let settings = Settings::resolve(&cli.global, &doc)?;
            let pairs = settings.pairs("admissibility", spec, &doc);
            cmd_admissibility(&doc, &settings, &pairs, cli.global.format.unwrap_or(Format::Csv))
        }
    }
}

fn predictive_json(predictive: &Predictive) -> Value {
    match predictive {
        Predictive::Discrete(d) => json!({
            "family": "table",
            "support": d.support(),
            "probabilities": d.probs(),
        }),
        Predictive::ClosedForm(c) => match *c {
            ClosedFormPredictive::BetaBinomial { alpha, beta, n } => {
                json!({ "family": c.family(), "alpha": alpha, "beta": beta, "n": n })
            }
            ClosedFormPredictive::Normal { mean, variance } => {
                json!({ "family": c.family(), "mean": mean, "variance": variance })
            }
            ClosedFormPredictive::NegativeBinomial { shape, prob } => {
                json!({ "family": c.family(), "shape": shape, "prob": prob })
            }
        },
    }
}

fn cmd_predict(
    doc: &SpecDocument,
    settings: &Settings,
    pairs: &[(String, String)],
    y_obs: &str,
    format: Option<Format>,
) -> CliResult<String> {
    let y = parse_point(y_obs)?;
    let predictive = inference::posterior_predictive(&doc.model, &y)?;
    let prediction =
        ruleopt::minimize_posterior_predictive_risk(&predictive, &doc.loss, Search::Exhaustive)?;
    let risk = risk::posterior_predictive_risk(
        &doc.model,
        &y,
        &prediction,
        &doc.loss,
        &settings.risk_options(),
    )?;
    match format {
        Some(Format::Csv) => {
            let mut out = provenance_line(pairs);
            out.push_str("y_obs,prediction,risk,method,error\n");
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                point_text(&y),
                point_text(&prediction),
                num(risk.value),
                risk.method.as_str(),
                num(risk.error)
            );
            Ok(out)
        }
        Some(Format::JsonLines) | None => {
            let mut record = json!({
                "y_obs": y,
                "predictive": predictive_json(&predictive),
                "prediction": prediction,
                "risk": risk.value,
                "method": risk.method.as_str(),
                "error": risk.error,
            });
            if let Some(n) = risk.samples {
                record["samples"] = json!(n);
            }
            record["provenance"] = provenance_json(pairs)["provenance"].clone();
            Ok(format!("{record}\n"))
        }
    }
}

/// Parses a rule file: a TOML document holding `predictions`, the
/// prediction-space index chosen for each observation-space index.
pub fn parse_rule_file(text: &str) -> crate::Result<PredictionRule> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::RuleMismatch(format!("rule file: {}", e.message())))?;
    if let Some(key) = table.keys().find(|k| k.as_str() != "predictions") {
        return Err(Error::RuleMismatch(format!(
            "rule file: unknown key `{key}`"
        )));
    }
    let items = table
        .get("predictions")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::RuleMismatch("rule file: `predictions` array is required".into()))?;
    items
        .iter()
        .enumerate()
        .map(|(i, v)| match v.as_integer() {
            Some(x) if x >= 0 => Ok(x as usize),
            _ => Err(Error::RuleMismatch(format!(
                "rule file: predictions[{i}] must be a nonnegative integer"
            ))),
        })
        .collect::<crate::Result<Vec<_>>>()
        .map(PredictionRule::Table)
}

fn resolve_rule(doc: &SpecDocument, source: &str) -> CliResult<PredictionRule> {
    let rule = match source {
        "bayes" => match &doc.model {
            Model::Finite(m) => PredictionRule::Table(ruleopt::canonical_bayes_table(m, &doc.loss)?),
            model => ruleopt::bayes_prediction_rule(model, &doc.loss)?,
        },
        "mean" => PredictionRule::ClosedForm(PointSummary::Mean),
        "median" => PredictionRule::ClosedForm(PointSummary::Median),
        "mode" => PredictionRule::ClosedForm(PointSummary::Mode),
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::new(EXIT_RULE_MISMATCH, format!("cannot read rule file {path}: {e}"))
            })?;
            parse_rule_file(&text)?
        }
    };
    rule.check(&doc.model)?;
    Ok(rule)
}

fn risk_json(key: &str, label: Option<&[f64]>, est: &RiskEstimate) -> Value {
    let mut v = json!({
        key: label,
        "risk": est.value,
        "method": est.method.as_str(),
        "error": est.error,
    });
    if let Some(n) = est.samples {
        v["samples"] = json!(n);
    }
    v
}

#[allow(clippy::too_many_arguments)]
fn cmd_risk(
    doc: &SpecDocument,
    settings: &Settings,
    pairs: &[(String, String)],
    rule: &PredictionRule,
    functional: Functional,
    theta_grid: Option<&str>,
    y_obs: Option<&str>,
    format: Format,
) -> CliResult<String> {
    let opts = settings.risk_options();
    let model = &doc.model;
    let rows: Vec<(Option<Point>, RiskEstimate)> = match functional {
        Functional::Frequentist => {
            let dim = model.parameter_space().dimension();
            let grid = match (theta_grid, doc.experiment.as_ref().and_then(|e| e.theta_grid.clone()), model) {
                (Some(text), _, _) => parse_points(text, dim)?,
                (None, Some(grid), _) => grid,
                (None, None, Model::Finite(m)) => m.theta_points().to_vec(),
                (None, None, Model::Conjugate(_)) => {
                    return Err(Failure::new(
                        EXIT_SPEC,
                        "frequentist risk of a continuous-parameter model needs --theta-grid or experiment.theta_grid",
                    ))
                }
            };
            risk::risk_curve(model, rule, &doc.loss, &grid, &opts)?
                .into_iter()
                .map(|(t, r)| (Some(t), r))
                .collect()
        }
        Functional::Bayes => vec![(None, risk::bayes_prediction_risk(model, rule, &doc.loss, &opts)?)],
        Functional::PosteriorPredictive => {
            let explicit = y_obs.is_some();
            let points = match (y_obs, model.obs_points()) {
                (Some(text), _) => parse_points(text, obs_dimension(model))?,
                (None, Some(points)) => points,
                (None, None) => {
                    return Err(Failure::new(
                        EXIT_SPEC,
                        "posterior-predictive risk of a continuous observation model needs --y-obs",
                    ))
                }
            };
            let mut rows = Vec::with_capacity(points.len());
            for y in points {
                if !explicit && inference::marginal_evidence(model, &y)? <= 0.0 {
                    continue;
                }
                let y_hat = rule.predict(model, &y)?;
                let est = risk::posterior_predictive_risk(model, &y, &y_hat, &doc.loss, &opts)?;
                rows.push((Some(y), est));
            }
            rows
        }
    };
    let key = match functional {
        Functional::PosteriorPredictive => "y_obs",
        _ => "theta",
    };
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(&provenance_line(pairs));
            let _ = writeln!(out, "{key},risk,method,error");
            for (label, est) in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    label.as_deref().map(point_text).unwrap_or_default(),
                    num(est.value),
                    est.method.as_str(),
                    num(est.error)
                );
            }
        }
        Format::JsonLines => {
            let _ = writeln!(out, "{}", provenance_json(pairs));
            for (label, est) in &rows {
                let _ = writeln!(out, "{}", risk_json(key, label.as_deref(), est));
            }
        }
    }
    Ok(out)
}

fn cmd_admissibility(
    doc: &SpecDocument,
    settings: &Settings,
    pairs: &[(String, String)],
    format: Format,
) -> CliResult<String> {
    let model = doc.model.as_finite().ok_or_else(|| {
        Failure::new(
            EXIT_SPEC,
            "admissibility certification needs a finite model",
        )
    })?;
    let report = admissibility::admissibility_report(model, &doc.loss, settings.tol, settings.cap)?;
    let opt = |x: Option<usize>| x.map(|i| i.to_string()).unwrap_or_default();
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(&provenance_line(pairs));
            out.push_str("rule,predictions,status,dominated_by,witness_theta,bayes,risks\n");
            for r in &report.rules {
                let preds: Vec<String> = r.table.iter().map(usize::to_string).collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.index,
                    preds.join(";"),
                    if r.admissible { "admissible" } else { "inadmissible" },
                    opt(r.dominated_by),
                    opt(r.witness_theta),
                    report.bayes_rule == Some(r.index),
                    point_text(&r.risks)
                );
            }
        }
        Format::JsonLines => {
            let _ = writeln!(out, "{}", provenance_json(pairs));
            for r in &report.rules {
                let _ = writeln!(
                    out,
                    "{}",
                    json!({
                        "rule": r.index,
                        "predictions": r.table,
                        "status": if r.admissible { "admissible" } else { "inadmissible" },
                        "dominated_by": r.dominated_by,
                        "witness_theta": r.witness_theta,
                        "bayes": report.bayes_rule == Some(r.index),
                        "risks": r.risks,
                    })
                );
            }
        }
    }
    Ok(out)
}
