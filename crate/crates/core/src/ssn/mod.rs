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

//! Double-loop solver for `min_x f(Ax) + λ(‖x‖₁ + δ{μᵀx = c})`.
//!
//! The outer loop is a preconditioned proximal point method: each step
//! approximately minimizes
//!
//! `F(x) + ‖x − xᵏ‖²/(2σ_k) + τ‖Ax − Axᵏ‖²/(2σ_k)`
//!
//! through its concave dual `G_k(y)`, which is maximized by a semismooth
//! Newton method. Generalized Hessians of `G_k` come from the structured
//! B-subdifferential of the prox, so each Newton system only involves the
//! columns of `A` on the active set.

mod dual;
mod inner;
mod newton;
mod outer;

pub use dual::{dual_gradient, dual_value, DualEval, SubproblemContext};
pub use inner::{ssn_inner, ssn_inner_with, InnerOptions, InnerResult};
pub use newton::{assemble_newton_apply, solve_newton_direction, NewtonOperator, NewtonStrategy};
pub use outer::{
    estimate_tau, kkt_residual, ppa_outer, ppa_outer_from, OuterRecord, OuterSchedule,
    SolveOptions, SolveResult, WarmStart,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::prox::ConstraintSpec;

/// Problem data: design matrix, loss with its anchor, and the affine
/// constraint `μᵀx = c`. The regularization weight is supplied per solve.
#[derive(Debug, Clone)]
pub struct Problem {
    a: DMatrix<f64>,
    loss: LossKind,
    mu: Vec<f64>,
    c: f64,
}

impl Problem {
    pub fn new(a: DMatrix<f64>, loss: LossKind, mu: Vec<f64>, c: f64) -> Result<Self> {
        if loss.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                what: "loss anchor length vs rows of A",
                expected: a.nrows(),
                got: loss.len(),
            });
        }
        if mu.len() != a.ncols() {
            return Err(Error::DimensionMismatch {
                what: "mu length vs columns of A",
                expected: a.ncols(),
                got: mu.len(),
            });
        }
        // validates mu and c
        ConstraintSpec::new(mu.clone(), c, 0.0)?;
        Ok(Self { a, loss, mu, c })
    }

    /// Least squares with `μ = e`.
    pub fn least_squares(a: DMatrix<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        let n = a.ncols();
        Self::new(a, LossKind::least_squares(b), vec![1.0; n], c)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn loss(&self) -> &LossKind {
        &self.loss
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }

    pub fn constraint(&self, lambda: f64) -> Result<ConstraintSpec> {
        ConstraintSpec::new(self.mu.clone(), self.c, lambda)
    }

    /// `f(Ax) + λ‖x‖₁` (the indicator is not evaluated).
    pub fn objective(&self, x: &[f64], lambda: f64) -> f64 {
        let ax = &self.a * DVector::from_column_slice(x);
        self.loss.value(ax.as_slice()) + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// `|μᵀx − c|`.
    pub fn feasibility(&self, x: &[f64]) -> f64 {
        (crate::prox::dot(&self.mu, x) - self.c).abs()
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
