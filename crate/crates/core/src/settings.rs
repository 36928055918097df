use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{TorusGrid, DEFAULT_RANK_TOL};

/// Log-spaced λ grid: `min · 10^{i/per_decade}` for every `i` with value `<= max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub min: f64,
    pub max: f64,
    pub per_decade: usize,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self { min: 1e-3, max: 2.0, per_decade: 64 }
    }
}

impl LambdaGrid {
    pub fn new(min: f64, max: f64, per_decade: usize) -> Result<Self> {
        let g = Self { min, max, per_decade };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) || self.per_decade == 0 {
            return Err(Error::Domain(format!(
                "lambda grid needs 0 < min < max and points per decade > 0, got {}:{}:{}",
                self.min, self.max, self.per_decade
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let ppd = self.per_decade as f64;
        let count = ((self.max / self.min).log10() * ppd + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.min * 10f64.powf(i as f64 / ppd)).collect()
    }
}

/// Numerical knobs shared by every computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    /// Grid points per torus axis; `None` picks the per-dimension default.
    pub points_per_dim: Option<usize>,
    pub rank_tol: f64,
    pub lambda: LambdaGrid,
    pub fit_window: Option<(f64, f64)>,
    /// Absolute lower bound on singular values for "bounded inverse" decisions.
    pub invertible_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            points_per_dim: None,
            rank_tol: DEFAULT_RANK_TOL,
            lambda: LambdaGrid::default(),
            fit_window: None,
            invertible_tol: 1e-6,
        }
    }
}

impl Settings {
    pub fn with_points(points_per_dim: usize) -> Self {
        Self { points_per_dim: Some(points_per_dim), ..Self::default() }
    }

    pub fn grid(&self, num_vars: usize) -> Result<TorusGrid> {
        match self.points_per_dim {
            Some(n) => TorusGrid::new(num_vars, n),
            None => TorusGrid::default_for(num_vars),
        }
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.lambda.values()
    }

    pub fn validate(&self) -> Result<()> {
        self.lambda.validate()?;
        if let Some(n) = self.points_per_dim {
            if n < 2 {
                return Err(Error::Domain(format!("grid needs N >= 2, got {n}")));
            }
        }
        if !(self.rank_tol > 0.0) {
            return Err(Error::Domain("rank tolerance must be positive".into()));
        }
        if let Some((lo, hi)) = self.fit_window {
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::Domain(format!("fit window {lo}:{hi} is not increasing")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lambda_grid_is_log_spaced() {
        let v = LambdaGrid::default().values();
        assert_eq!(v[0], 1e-3);
        assert!(*v.last().unwrap() <= 2.0);
        assert!(*v.last().unwrap() > 2.0 / 10f64.powf(1.0 / 64.0));
        let r = v[1] / v[0];
        assert!(v.windows(2).all(|w| ((w[1] / w[0]) - r).abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(LambdaGrid::new(1.0, 0.5, 10).is_err());
        assert!(LambdaGrid::new(0.0, 0.5, 10).is_err());
        let s = Settings { fit_window: Some((0.5, 0.1)), ..Settings::default() };
        assert!(s.validate().is_err());
        assert!(Settings::with_points(1).validate().is_err());
    }
}
