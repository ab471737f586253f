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

//! The inner dual subproblem.
//!
//! With `v = Axᵏ + (σ/τ)y` and `u = xᵏ − σAᵀy`,
//!
//! `G_k(y) = (τ/σ)E_{σf/τ}(v) + (1/σ)E_{σλq}(u) − ‖u‖²/(2σ) + ‖xᵏ‖²/(2σ)
//!           − τ‖v‖²/(2σ) + τ‖Axᵏ‖²/(2σ)`
//!
//! and `∇G_k(y) = A·Prox_{σλq}(u) − Prox_{σf/τ}(v)`.

use nalgebra::DVector;

use super::Problem;
use crate::error::Result;
use crate::loss::{loss_prox, moreau_envelope};
use crate::prox::{prox_affine_l1, ConstraintSpec, ProxResult};

/// Data fixed for one outer iteration.
#[derive(Debug, Clone)]
pub struct SubproblemContext<'a> {
    pub problem: &'a Problem,
    pub lambda: f64,
    pub sigma: f64,
    pub tau: f64,
    x_anchor: DVector<f64>,
    ax_anchor: DVector<f64>,
    /// constraint with weight `σλ`
    spec: ConstraintSpec,
}

/// Everything computed at one dual point; reused by the line search,
/// the stopping test and the Newton system.
#[derive(Debug, Clone)]
pub struct DualEval {
    pub y: DVector<f64>,
    /// `Prox_{σλq}(u)`: the primal candidate
    pub prox: ProxResult,
    pub ax: DVector<f64>,
    /// `Prox_{σf/τ}(v)`
    pub p: Vec<f64>,
    pub grad: DVector<f64>,
    pub grad_norm: f64,
    pub value: f64,
}

impl DualEval {
    pub fn x(&self) -> &[f64] {
        &self.prox.z
    }
}

impl<'a> SubproblemContext<'a> {
    pub fn new(
        problem: &'a Problem,
        lambda: f64,
        x_anchor: &[f64],
        sigma: f64,
        tau: f64,
    ) -> Result<Self> {
        let spec = problem.constraint(sigma * lambda)?;
        let x_anchor = DVector::from_column_slice(x_anchor);
        let ax_anchor = problem.a() * &x_anchor;
        Ok(Self {
            problem,
            lambda,
            sigma,
            tau,
            x_anchor,
            ax_anchor,
            spec,
        })
    }

    pub fn x_anchor(&self) -> &DVector<f64> {
        &self.x_anchor
    }

    pub fn ax_anchor(&self) -> &DVector<f64> {
        &self.ax_anchor
    }

    /// Constraint carrying the scaled weight `σλ`.
    pub fn scaled_spec(&self) -> &ConstraintSpec {
        &self.spec
    }

    /// Loss prox weight `σ/τ`.
    pub fn loss_weight(&self) -> f64 {
        self.sigma / self.tau
    }

    pub fn u_of(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.x_anchor - self.problem.a().tr_mul(y) * self.sigma
    }

    pub fn v_of(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.ax_anchor + y * self.loss_weight()
    }

    /// Evaluates `G_k`, its gradient and the primal candidates at `y`.
    ///
    /// The value uses the rearrangement
    /// `f(p) + λ‖x‖₁ + ‖x − xᵏ‖²/(2σ) + τ‖p − Axᵏ‖²/(2σ) + ⟨Ax − p, y⟩`,
    /// which equals the envelope form but keeps every term at the scale
    /// of the objective instead of `(σ/τ)²‖y‖²`.
    pub fn evaluate(&self, y: &DVector<f64>) -> DualEval {
        let u = self.u_of(y);
        let prox = prox_affine_l1(u.as_slice(), &self.spec);
        let x = DVector::from_column_slice(&prox.z);
        let ax = self.problem.a() * &x;
        let v = self.v_of(y);
        let p = loss_prox(self.problem.loss(), v.as_slice(), self.loss_weight());
        let pv = DVector::from_column_slice(&p);
        let grad = &ax - &pv;

        let l1: f64 = prox.z.iter().map(|t| t.abs()).sum();
        let dx2 = (&x - &self.x_anchor).norm_squared();
        let dp2 = (&pv - &self.ax_anchor).norm_squared();
        let value = self.problem.loss().value(&p)
            + self.lambda * l1
            + dx2 / (2.0 * self.sigma)
            + self.tau * dp2 / (2.0 * self.sigma)
            + grad.dot(y);
        let grad_norm = grad.norm();
        DualEval {
            y: y.clone(),
            prox,
            ax,
            p,
            grad,
            grad_norm,
            value,
        }
    }

    /// Primal subproblem objective
    /// `f(Ax) + λ‖x‖₁ + ‖x − xᵏ‖²/(2σ) + τ‖A(x − xᵏ)‖²/(2σ)`.
    pub fn primal_value(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        let ax = self.problem.a() * &xv;
        self.problem.loss().value(ax.as_slice())
            + self.lambda * x.iter().map(|t| t.abs()).sum::<f64>()
            + (&xv - &self.x_anchor).norm_squared() / (2.0 * self.sigma)
            + self.tau * (&ax - &self.ax_anchor).norm_squared() / (2.0 * self.sigma)
    }

    /// Duality gap `F_k(x) − G_k(y)` at the candidate `x = Prox_{σλq}(u)`.
    ///
    /// Closed form `D_f(Ax, p) + τ‖Ax − p‖²/(2σ)` with `D_f` the Bregman
    /// divergence of `f`; it is nonnegative and free of cancellation.
    pub fn gap(&self, eval: &DualEval) -> f64 {
        let d = self.problem.loss().bregman(eval.ax.as_slice(), &eval.p);
        d.max(0.0) + self.tau * eval.grad_norm * eval.grad_norm / (2.0 * self.sigma)
    }

    /// Right-hand side of the inexactness test:
    /// `ε²/(2σ) · min{1, ‖x − xᵏ‖² + τ‖A(x − xᵏ)‖²}`.
    pub fn gap_bound(&self, eval: &DualEval, epsilon: f64) -> f64 {
        let dx2 = (DVector::from_column_slice(eval.x()) - &self.x_anchor).norm_squared();
        let dax2 = (&eval.ax - &self.ax_anchor).norm_squared();
        epsilon * epsilon / (2.0 * self.sigma) * (dx2 + self.tau * dax2).min(1.0)
    }
}

/// `G_k(y)` computed term by term from the two Moreau envelopes.
pub fn dual_value(ctx: &SubproblemContext<'_>, y: &DVector<f64>) -> f64 {
    let u = ctx.u_of(y);
    let v = ctx.v_of(y);
    let prox = prox_affine_l1(u.as_slice(), ctx.scaled_spec());
    let env_q = ctx.sigma * ctx.lambda * prox.z.iter().map(|t| t.abs()).sum::<f64>()
        + 0.5
            * prox
                .z
                .iter()
                .zip(u.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
    let env_f = moreau_envelope(ctx.problem.loss(), v.as_slice(), ctx.loss_weight());
    let s = ctx.sigma;
    let t = ctx.tau;
    (t / s) * env_f + env_q / s - u.norm_squared() / (2.0 * s)
        + ctx.x_anchor().norm_squared() / (2.0 * s)
        - t * v.norm_squared() / (2.0 * s)
        + t * ctx.ax_anchor().norm_squared() / (2.0 * s)
}

/// `∇G_k(y)`.
pub fn dual_gradient(ctx: &SubproblemContext<'_>, y: &DVector<f64>) -> DVector<f64> {
    ctx.evaluate(y).grad
}
