/*
Copyright 2026 The affine-l1 Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Application drivers: compositional regression data, regularization
//! paths and sparse subspace clustering.

mod path;
mod preprocess;
mod ssc;

pub use path::{lambda_grid, solve_path, PathRecord, PathResult};
pub use preprocess::log_contrast_preprocess;
pub use ssc::{ssc_column_problem, ssc_solve, SscOptions, SscResult};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::ssn::Problem;

/// Features with a response: real values for regression, ±1 labels for
/// classification.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: DMatrix<f64>,
    pub response: Vec<f64>,
    pub feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        features: DMatrix<f64>,
        response: Vec<f64>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if response.len() != features.nrows() {
            return Err(Error::DimensionMismatch {
                what: "response length vs feature rows",
                expected: features.nrows(),
                got: response.len(),
            });
        }
        if let Some(names) = &feature_names {
            if names.len() != features.ncols() {
                return Err(Error::DimensionMismatch {
                    what: "feature names vs feature columns",
                    expected: features.ncols(),
                    got: names.len(),
                });
            }
        }
        Ok(Self {
            features,
            response,
            feature_names,
        })
    }

    pub fn nrows(&self) -> usize {
        self.features.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.features.ncols()
    }

    pub fn regression(&self, mu: Vec<f64>, c: f64) -> Result<Problem> {
        Problem::new(
            self.features.clone(),
            LossKind::least_squares(self.response.clone()),
            mu,
            c,
        )
    }

    /// Fails unless every response is ±1.
    pub fn classification(&self, mu: Vec<f64>, c: f64) -> Result<Problem> {
        Problem::new(
            self.features.clone(),
            LossKind::logistic(self.response.clone())?,
            mu,
            c,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormChoice {
    Euclidean,
    /// `‖Aᵀb‖_∞`
    #[default]
    Max,
}

/// Log-spaced grid `λ_j = ρ_j‖Aᵀb‖` from `rho_max` down to `rho_min`.
#[derive(Debug, Clone)]
pub struct PathConfig {
    pub rho_max: f64,
    pub rho_min: f64,
    pub npoints: usize,
    pub norm: NormChoice,
    pub warm_start: bool,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            rho_max: 0.9,
            rho_min: 1e-6,
            npoints: 20,
            norm: NormChoice::Max,
            warm_start: true,
        }
    }
}

impl PathConfig {
    /// `rho_max = rho_min` is accepted and yields a constant grid.
    pub fn validate(&self) -> Result<()> {
        let ok = |r: f64| r > 0.0 && r <= 1.0;
        if !ok(self.rho_max) || !ok(self.rho_min) || self.rho_max < self.rho_min {
            return Err(Error::InvalidParameter(format!(
                "need 1 >= rho_max >= rho_min > 0, got {} and {}",
                self.rho_max, self.rho_min
            )));
        }
        if self.npoints < 2 {
            return Err(Error::InvalidParameter(format!(
                "npoints must be at least 2, got {}",
                self.npoints
            )));
        }
        Ok(())
    }
}
