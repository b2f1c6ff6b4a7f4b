use super::Point;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum LossForm {
    /// Squared Euclidean distance.
    Squared,
    /// L1 distance.
    Absolute,
    /// 0 when every coordinate of `ŷ − y` lies within `[-band, band]`, 1 otherwise.
    ZeroOne { band: f64 },
    /// `matrix[i][j] = L(pred_space[i], pred_space[j])`.
    Table { matrix: Vec<Vec<f64>> },
}

/// A loss function `L(ŷ, y)` with a positive scale factor.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    form: LossForm,
    scale: f64,
}

impl LossSpec {
    pub fn new(form: LossForm) -> Self {
        Self { form, scale: 1.0 }
    }

    pub fn squared() -> Self {
        Self::new(LossForm::Squared)
    }

    pub fn absolute() -> Self {
        Self::new(LossForm::Absolute)
    }

    pub fn zero_one(band: f64) -> Self {
        Self::new(LossForm::ZeroOne { band })
    }

    pub fn table(matrix: Vec<Vec<f64>>) -> Self {
        Self::new(LossForm::Table { matrix })
    }

    /// The same loss multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            form: self.form.clone(),
            scale: self.scale * c,
        }
    }

    pub fn with_scale(form: LossForm, scale: f64) -> Self {
        Self { form, scale }
    }

    pub fn form(&self) -> &LossForm {
        &self.form
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn name(&self) -> &'static str {
        match self.form {
            LossForm::Squared => "squared",
            LossForm::Absolute => "absolute",
            LossForm::ZeroOne { .. } => "zero_one",
            LossForm::Table { .. } => "table",
        }
    }

    pub fn is_table(&self) -> bool {
        matches!(self.form, LossForm::Table { .. })
    }

    /// Checks the loss against a prediction space of `pred_len` points (if finite).
    pub fn check(&self, pred_len: Option<usize>) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "loss scale must be positive and finite, got {}",
                self.scale
            )));
        }
        match &self.form {
            LossForm::ZeroOne { band } if !(band.is_finite() && *band >= 0.0) => Err(
                Error::InvalidArgument(format!("zero-one band must be >= 0, got {band}")),
            ),
            LossForm::Table { matrix } => {
                let n = pred_len.ok_or_else(|| {
                    Error::Unsupported("table loss requires a finite prediction space".into())
                })?;
                if matrix.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: matrix.len(),
                    });
                }
                for row in matrix {
                    if row.len() != n {
                        return Err(Error::DimensionMismatch {
                            expected: n,
                            found: row.len(),
                        });
                    }
                    if let Some(v) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                        return Err(Error::InvalidArgument(format!(
                            "loss table entries must be finite and nonnegative, got {v}"
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Loss for non-table forms; coordinates are zipped without a length check.
    pub(crate) fn pointwise(&self, y_hat: &[f64], y: &[f64]) -> f64 {
        let base = match &self.form {
            LossForm::Squared => y_hat.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum(),
            LossForm::Absolute => y_hat.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            LossForm::ZeroOne { band } => {
                if y_hat.iter().zip(y).all(|(a, b)| (a - b).abs() <= *band) {
                    0.0
                } else {
                    1.0
                }
            }
            LossForm::Table { .. } => unreachable!("table loss needs indices"),
        };
        self.scale * base
    }

    /// Loss of predicting pred-space index `i` when index `j` occurs.
    pub(crate) fn indexed(&self, i: usize, j: usize, pred_space: &[Point]) -> f64 {
        match &self.form {
            LossForm::Table { matrix } => self.scale * matrix[i][j],
            _ => self.pointwise(&pred_space[i], &pred_space[j]),
        }
    }

    /// Row-major `n × n` loss matrix over a finite prediction space.
    pub fn matrix(&self, pred_space: &[Point]) -> Result<Vec<f64>> {
        self.check(Some(pred_space.len()))?;
        let n = pred_space.len();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.indexed(i, j, pred_space));
            }
        }
        Ok(out)
    }
}

/// Evaluates `L(ŷ, y)`.
///
/// Table losses need the finite prediction space the matrix is indexed by;
/// both values must be points of it.
pub fn evaluate_loss(
    loss: &LossSpec,
    y_hat: &[f64],
    y_pred: &[f64],
    pred_space: Option<&[Point]>,
) -> Result<f64> {
    if y_hat.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_hat.len(),
            found: y_pred.len(),
        });
    }
    if let Some(space) = pred_space {
        if let Some(first) = space.first() {
            if first.len() != y_hat.len() {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    found: y_hat.len(),
                });
            }
        }
    }
    match loss.form() {
        LossForm::Table { .. } => {
            let space = pred_space.ok_or_else(|| {
                Error::Unsupported("table loss requires a finite prediction space".into())
            })?;
            loss.check(Some(space.len()))?;
            let find = |v: &[f64]| {
                space
                    .iter()
                    .position(|p| p.as_slice() == v)
                    .ok_or_else(|| Error::NotInPredSpace { value: v.to_vec() })
            };
            let i = find(y_hat)?;
            let j = find(y_pred)?;
            Ok(loss.indexed(i, j, space))
        }
        _ => {
            loss.check(None)?;
            Ok(loss.pointwise(y_hat, y_pred))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squared_example() {
        assert_eq!(
            evaluate_loss(&LossSpec::squared(), &[2.0], &[5.0], None).unwrap(),
            9.0
        );
    }

    #[test]
    fn absolute_identity() {
        assert_eq!(
            evaluate_loss(&LossSpec::absolute(), &[1.25], &[1.25], None).unwrap(),
            0.0
        );
    }

    #[test]
    fn zero_one_band() {
        let l = LossSpec::zero_one(0.5);
        assert_eq!(evaluate_loss(&l, &[1.0], &[1.4], None).unwrap(), 0.0);
        assert_eq!(evaluate_loss(&l, &[1.0], &[1.6], None).unwrap(), 1.0);
    }

    #[test]
    fn table_lookup_and_errors() {
        let space = vec![vec![0.0], vec![1.0]];
        let l = LossSpec::table(vec![vec![0.0, 2.0], vec![3.0, 0.0]]);
        assert_eq!(
            evaluate_loss(&l, &[1.0], &[0.0], Some(&space)).unwrap(),
            3.0
        );
        assert!(matches!(
            evaluate_loss(&l, &[0.5], &[0.0], Some(&space)),
            Err(Error::NotInPredSpace { .. })
        ));
        assert!(evaluate_loss(&l, &[0.0], &[0.0], None).is_err());
        let bad = LossSpec::table(vec![vec![0.0]]);
        assert!(matches!(
            evaluate_loss(&bad, &[0.0], &[0.0], Some(&space)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            evaluate_loss(&LossSpec::squared(), &[0.0, 1.0], &[0.0], None),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn multivariate_forms() {
        let a = [1.0, 2.0];
        let b = [0.0, 4.0];
        assert_eq!(evaluate_loss(&LossSpec::squared(), &a, &b, None).unwrap(), 5.0);
        assert_eq!(evaluate_loss(&LossSpec::absolute(), &a, &b, None).unwrap(), 3.0);
        assert_eq!(
            evaluate_loss(&LossSpec::zero_one(1.0), &a, &b, None).unwrap(),
            1.0
        );
    }

    #[test]
    fn scaling_multiplies() {
        let l = LossSpec::squared().scaled(3.0);
        assert_eq!(evaluate_loss(&l, &[2.0], &[5.0], None).unwrap(), 27.0);
    }
}
