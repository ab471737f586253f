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

//! Semismooth Newton ascent on `G_k`.

use nalgebra::DVector;

use super::dual::{DualEval, SubproblemContext};
use super::newton::{assemble_newton_apply, solve_newton_direction, NewtonStrategy};
use crate::error::Error;
use crate::loss::LossKind;

const ARMIJO_MU: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 50;
const ETA_BAR: f64 = 0.005;
/// relative accuracy assumed for computed values of `G`
const VALUE_NOISE: f64 = 1e-11;
/// exponent `1 + δ` in the linear-solve tolerance `‖∇G‖^{1+δ}`
const TOL_POWER: f64 = 1.5;

#[derive(Debug, Clone)]
pub struct InnerOptions {
    pub max_iter: usize,
    pub strategy: NewtonStrategy,
    /// keep per-iteration traces in the result
    pub record: bool,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            strategy: NewtonStrategy::Auto,
            record: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InnerResult {
    /// final dual iterate with its primal candidate
    pub eval: DualEval,
    pub newton_iters: usize,
    pub backtracks: usize,
    /// the stopping test was satisfied
    pub converged: bool,
    /// a step failed to produce ascent after the maximal number of halvings
    pub line_search_failed: bool,
    pub grad_norms: Vec<f64>,
    pub values: Vec<f64>,
}

impl InnerResult {
    pub fn y(&self) -> &DVector<f64> {
        &self.eval.y
    }

    pub fn x(&self) -> &[f64] {
        self.eval.x()
    }
}

/// Maximizes `G_k` from `y0` until `‖∇G_k‖ ≤ tol`.
pub fn ssn_inner(
    ctx: &SubproblemContext<'_>,
    y0: &DVector<f64>,
    tol: f64,
    opts: &InnerOptions,
) -> InnerResult {
    ssn_inner_with(ctx, y0, opts, |e| e.grad_norm <= tol)
}

/// Maximizes `G_k` from `y0` until `stop` accepts the current point.
///
/// Directions solve `V d = ∇G` to residual `min{η̄, ‖∇G‖^{1.5}}`; the step
/// is the first `2^{-m}` with
/// `G(y + 2^{-m}d) ≥ G(y) + 10⁻⁴·2^{-m}⟨∇G, d⟩`.
///
/// Once `⟨∇G, d⟩` falls below the rounding level of `G` the value test can
/// no longer see progress; from then on a step is accepted when it shrinks
/// `‖∇G‖` by the factor `1 − 10⁻⁴·2^{-m}`.
pub fn ssn_inner_with<F>(
    ctx: &SubproblemContext<'_>,
    y0: &DVector<f64>,
    opts: &InnerOptions,
    mut stop: F,
) -> InnerResult
where
    F: FnMut(&DualEval) -> bool,
{
    let logistic = matches!(ctx.problem.loss(), LossKind::Logistic { .. });
    let mut eval = ctx.evaluate(y0);
    let mut res = InnerResult {
        eval: eval.clone(),
        newton_iters: 0,
        backtracks: 0,
        converged: false,
        line_search_failed: false,
        grad_norms: Vec::new(),
        values: Vec::new(),
    };
    loop {
        if opts.record {
            res.grad_norms.push(eval.grad_norm);
            res.values.push(eval.value);
        }
        if stop(&eval) {
            res.converged = true;
            break;
        }
        if res.newton_iters >= opts.max_iter {
            break;
        }
        let gn = eval.grad_norm;
        let mut eps = if logistic { 0.1 * gn.min(0.1) } else { 0.0 };
        let tol = ETA_BAR.min(gn.powf(TOL_POWER));
        let mut attempt = 0;
        let dir = loop {
            let op = assemble_newton_apply(ctx, &eval, eps);
            match solve_newton_direction(&op, &eval.grad, tol, opts.strategy) {
                Ok(sol) => break Some(sol.d),
                Err(Error::Factorization) if attempt < 8 => {
                    eps = (eps * 10.0).max(1e-10 * (1.0 + gn));
                    attempt += 1;
                }
                Err(_) => break None,
            }
        };
        let Some(d) = dir else {
            res.line_search_failed = true;
            break;
        };
        let slope = eval.grad.dot(&d);
        // below this the predicted gain is lost in the rounding of G itself
        let blind = slope <= VALUE_NOISE * (1.0 + eval.value.abs());
        let mut step = 1.0;
        let mut accepted = None;
        for m in 0..=MAX_BACKTRACKS {
            let trial = ctx.evaluate(&(&eval.y + &d * step));
            let ok = if blind {
                trial.grad_norm <= (1.0 - ARMIJO_MU * step) * gn
            } else {
                trial.value >= eval.value + ARMIJO_MU * step * slope
            };
            if ok {
                res.backtracks += m;
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
        }
        res.newton_iters += 1;
        match accepted {
            Some(next) => eval = next,
            None => {
                res.backtracks += MAX_BACKTRACKS;
                res.line_search_failed = true;
                break;
            }
        }
    }
    res.eval = eval;
    res
}
