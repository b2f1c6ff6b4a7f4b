use super::{ParameterSpace, Point};
use crate::error::{Error, Result};

/// A tabulated joint model `t[θ][y_pred][y_obs]` over finite spaces, together
/// with prior weights on the parameter grid.
///
/// Construction only checks shapes. Probability invariants (normalisation,
/// prior positivity) are reported by [`super::validate_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteModel {
    theta: Vec<Point>,
    prior: Vec<f64>,
    obs_space: Vec<Point>,
    pred_space: Vec<Point>,
    // Row-major [theta][pred][obs].
    joint: Vec<f64>,
}

fn check_points(name: &str, points: &[Point]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidArgument(format!("{name} must not be empty")))?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::InvalidArgument(format!(
            "{name} points must have at least one coordinate"
        )));
    }
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
    }
    Ok(dim)
}

impl FiniteModel {
    pub fn new(
        theta: Vec<Point>,
        prior: Vec<f64>,
        obs_space: Vec<Point>,
        pred_space: Vec<Point>,
        joint: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        check_points("theta_points", &theta)?;
        check_points("obs_space", &obs_space)?;
        check_points("pred_space", &pred_space)?;
        if prior.len() != theta.len() {
            return Err(Error::DimensionMismatch {
                expected: theta.len(),
                found: prior.len(),
            });
        }
        if joint.len() != theta.len() {
            return Err(Error::DimensionMismatch {
                expected: theta.len(),
                found: joint.len(),
            });
        }
        let mut flat = Vec::with_capacity(theta.len() * pred_space.len() * obs_space.len());
        for slice in &joint {
            if slice.len() != pred_space.len() {
                return Err(Error::DimensionMismatch {
                    expected: pred_space.len(),
                    found: slice.len(),
                });
            }
            for row in slice {
                if row.len() != obs_space.len() {
                    return Err(Error::DimensionMismatch {
                        expected: obs_space.len(),
                        found: row.len(),
                    });
                }
                flat.extend_from_slice(row);
            }
        }
        Ok(Self {
            theta,
            prior,
            obs_space,
            pred_space,
            joint: flat,
        })
    }

    /// Builds a model from a per-θ function `f(θ, y_pred, y_obs)` over index triples.
    pub fn from_fn(
        theta: Vec<Point>,
        prior: Vec<f64>,
        obs_space: Vec<Point>,
        pred_space: Vec<Point>,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let joint = (0..theta.len())
            .map(|t| {
                (0..pred_space.len())
                    .map(|k| (0..obs_space.len()).map(|s| f(t, k, s)).collect())
                    .collect()
            })
            .collect();
        Self::new(theta, prior, obs_space, pred_space, joint)
    }

    /// Same tables with a different prior. No validation is performed, which
    /// lets callers probe what happens when prior positivity fails.
    pub fn with_prior_unchecked(&self, prior: Vec<f64>) -> Self {
        assert_eq!(prior.len(), self.theta.len());
        Self {
            prior,
            ..self.clone()
        }
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn n_obs(&self) -> usize {
        self.obs_space.len()
    }

    pub fn n_pred(&self) -> usize {
        self.pred_space.len()
    }

    pub fn theta_points(&self) -> &[Point] {
        &self.theta
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn obs_space(&self) -> &[Point] {
        &self.obs_space
    }

    pub fn pred_space(&self) -> &[Point] {
        &self.pred_space
    }

    pub fn parameter_space(&self) -> ParameterSpace {
        ParameterSpace::FiniteGrid(self.theta.clone())
    }

    #[inline]
    pub fn joint(&self, theta: usize, pred: usize, obs: usize) -> f64 {
        self.joint[(theta * self.pred_space.len() + pred) * self.obs_space.len() + obs]
    }

    /// Nested copy of the joint table, indexed `[θ][y_pred][y_obs]`.
    pub fn joint_table(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.n_theta())
            .map(|t| {
                (0..self.n_pred())
                    .map(|k| (0..self.n_obs()).map(|s| self.joint(t, k, s)).collect())
                    .collect()
            })
            .collect()
    }

    /// `f(y_obs | θ)`, the joint marginalised over predictions.
    pub fn obs_likelihood(&self, theta: usize, obs: usize) -> f64 {
        (0..self.n_pred()).map(|k| self.joint(theta, k, obs)).sum()
    }

    pub fn theta_index(&self, theta: &[f64]) -> Option<usize> {
        self.theta.iter().position(|p| p.as_slice() == theta)
    }

    pub fn obs_index(&self, y_obs: &[f64]) -> Option<usize> {
        self.obs_space.iter().position(|p| p.as_slice() == y_obs)
    }

    pub fn pred_index(&self, y_pred: &[f64]) -> Option<usize> {
        self.pred_space.iter().position(|p| p.as_slice() == y_pred)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[f64]) -> Vec<Point> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn joint_indexing_matches_nested_layout() {
        let m = FiniteModel::from_fn(
            pts(&[0.0, 1.0]),
            vec![0.5, 0.5],
            pts(&[0.0, 1.0, 2.0]),
            pts(&[0.0, 1.0]),
            |t, k, s| (100 * t + 10 * k + s) as f64,
        )
        .unwrap();
        assert_eq!(m.joint(1, 1, 2), 112.0);
        assert_eq!(m.joint_table()[0][1][2], 12.0);
        assert_eq!(m.obs_likelihood(1, 0), 100.0 + 110.0);
    }

    #[test]
    fn shape_errors() {
        let err = FiniteModel::new(
            pts(&[0.0]),
            vec![1.0],
            pts(&[0.0, 1.0]),
            pts(&[0.0]),
            vec![vec![vec![1.0]]],
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                found: 1
            }
        );
        assert!(FiniteModel::new(vec![], vec![], pts(&[0.0]), pts(&[0.0]), vec![]).is_err());
    }

    #[test]
    fn lookups() {
        let m = FiniteModel::from_fn(
            pts(&[0.25, 0.75]),
            vec![0.5, 0.5],
            pts(&[0.0, 1.0]),
            pts(&[3.0]),
            |_, _, _| 0.5,
        )
        .unwrap();
        assert_eq!(m.theta_index(&[0.75]), Some(1));
        assert_eq!(m.obs_index(&[2.0]), None);
        assert_eq!(m.pred_index(&[3.0]), Some(0));
    }
}
