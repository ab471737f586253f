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

//! Outer proximal point loop.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dual::SubproblemContext;
use super::inner::{ssn_inner_with, InnerOptions};
use super::newton::NewtonStrategy;
use super::{norm, Problem};
use crate::error::{Error, Result};
use crate::prox::prox_affine_l1;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// target for the relative KKT residual
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub sigma_max: f64,
    /// proximal weight on `‖A(x − xᵏ)‖²`; estimated as `1/λ_max(AAᵀ)` when unset
    pub tau: Option<f64>,
    pub strategy: NewtonStrategy,
    /// seed of the power-iteration start vector
    pub seed: u64,
    /// keep inner traces
    pub record: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_outer: 100,
            max_inner: 100,
            sigma_max: 1e8,
            tau: None,
            strategy: NewtonStrategy::Auto,
            seed: 0,
            record: false,
        }
    }
}

/// `σ_k = min(3^{⌊k/2⌋}, σ_max)`, `ε_k = 0.5/1.06^k`.
#[derive(Debug, Clone, Copy)]
pub struct OuterSchedule {
    pub tau: f64,
    pub sigma_max: f64,
}

impl OuterSchedule {
    pub fn sigma(&self, k: usize) -> f64 {
        3f64.powi((k / 2) as i32).min(self.sigma_max)
    }

    pub fn epsilon(&self, k: usize) -> f64 {
        0.5 / 1.06f64.powi(k as i32)
    }
}

/// Starting point for [`ppa_outer_from`].
#[derive(Debug, Clone, Default)]
pub struct WarmStart {
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct OuterRecord {
    pub sigma: f64,
    pub epsilon: f64,
    pub newton_iters: usize,
    pub gap: f64,
    pub gap_bound: f64,
    pub gap_condition_met: bool,
    /// inner loop ended at the rounding floor of `‖∇G‖` rather than on the gap test
    pub stopped_at_floor: bool,
    pub kkt_residual: f64,
    /// `|μᵀx^{k+1} − c|`
    pub feasibility: f64,
    pub grad_norms: Vec<f64>,
    pub dual_values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
    pub kkt_residual: f64,
    pub feasibility: f64,
    pub converged: bool,
    pub outer_iters: usize,
    pub newton_iters_total: usize,
    /// largest Newton count of a single subproblem
    pub newton_iters_max: usize,
    pub tau: f64,
    pub seconds: f64,
    pub history: Vec<OuterRecord>,
}

impl SolveResult {
    pub fn nnz(&self) -> usize {
        self.x.iter().filter(|v| **v != 0.0).count()
    }
}

const POWER_TOL: f64 = 1e-6;
const POWER_MAX_ITER: usize = 500;

/// `1/λ_max(AAᵀ)` by power iteration on the smaller Gram matrix.
pub fn estimate_tau(a: &DMatrix<f64>, seed: u64) -> Result<f64> {
    if a.iter().all(|v| *v == 0.0) || a.is_empty() {
        return Err(Error::ZeroMatrix);
    }
    let wide = a.nrows() <= a.ncols();
    let dim = if wide { a.nrows() } else { a.ncols() };
    let gram = |v: &DVector<f64>| -> DVector<f64> {
        if wide {
            a * a.tr_mul(v)
        } else {
            a.tr_mul(&(a * v))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0) + 0.5);
    v /= v.norm();
    let mut est = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let w = gram(&v);
        let next = v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 {
            break;
        }
        v = w / wn;
        let done = (next - est).abs() <= POWER_TOL * next.abs();
        est = next;
        if done {
            break;
        }
    }
    if est <= 0.0 {
        // start vector landed in the null space; fall back to the Frobenius bound
        est = a.norm_squared();
    }
    Ok(1.0 / est)
}

/// `‖x − Prox_{λq}(x − Aᵀ∇f(Ax))‖ / (1 + ‖x‖)`.
pub fn kkt_residual(problem: &Problem, lambda: f64, x: &[f64]) -> f64 {
    let xv = DVector::from_column_slice(x);
    let ax = problem.a() * &xv;
    let g = DVector::from_vec(problem.loss().gradient(ax.as_slice()));
    let u = &xv - problem.a().tr_mul(&g);
    let spec = problem
        .constraint(lambda)
        .expect("kkt_residual: invalid lambda");
    let p = prox_affine_l1(u.as_slice(), &spec);
    let diff: f64 = x
        .iter()
        .zip(&p.z)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    diff / (1.0 + norm(x))
}

/// Solves `min f(Ax) + λq(x)` from `x = 0`, `y = 0`.
pub fn ppa_outer(problem: &Problem, lambda: f64, opts: &SolveOptions) -> Result<SolveResult> {
    ppa_outer_from(problem, lambda, opts, &WarmStart::default())
}

/// As [`ppa_outer`], from a given primal/dual pair.
pub fn ppa_outer_from(
    problem: &Problem,
    lambda: f64,
    opts: &SolveOptions,
    warm: &WarmStart,
) -> Result<SolveResult> {
    let start = Instant::now();
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    let (m, n) = (problem.nrows(), problem.ncols());
    let tau = match opts.tau {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(Error::InvalidParameter(format!("tau must be positive, got {t}"))),
        None => estimate_tau(problem.a(), opts.seed)?,
    };
    let schedule = OuterSchedule {
        tau,
        sigma_max: opts.sigma_max,
    };
    let mut x = match &warm.x {
        Some(x) if x.len() == n => x.clone(),
        Some(x) => {
            return Err(Error::DimensionMismatch {
                what: "warm-start x",
                expected: n,
                got: x.len(),
            })
        }
        None => vec![0.0; n],
    };
    let mut y = match &warm.y {
        Some(y) if y.len() == m => DVector::from_column_slice(y),
        Some(y) => {
            return Err(Error::DimensionMismatch {
                what: "warm-start y",
                expected: m,
                got: y.len(),
            })
        }
        None => DVector::zeros(m),
    };
    let inner_opts = InnerOptions {
        max_iter: opts.max_inner,
        strategy: opts.strategy,
        record: opts.record,
    };
    let floor = 1e-13 * (1.0 + norm(problem.loss().anchor()));

    let mut kkt = if warm.x.is_some() {
        kkt_residual(problem, lambda, &x)
    } else {
        f64::INFINITY
    };
    let mut history = Vec::new();
    let mut newton_total = 0;
    let mut newton_max = 0;
    let mut k = 0;
    while kkt > opts.tol && k < opts.max_outer {
        let sigma = schedule.sigma(k);
        let eps = schedule.epsilon(k);
        let ctx = SubproblemContext::new(problem, lambda, &x, sigma, tau)?;
        let mut met = false;
        let mut at_floor = false;
        let inner = ssn_inner_with(&ctx, &y, &inner_opts, |e| {
            met = ctx.gap(e) <= ctx.gap_bound(e, eps);
            at_floor = e.grad_norm <= floor;
            met || at_floor
        });
        let gap = ctx.gap(&inner.eval);
        let gap_bound = ctx.gap_bound(&inner.eval, eps);
        newton_total += inner.newton_iters;
        newton_max = newton_max.max(inner.newton_iters);
        x = inner.eval.prox.z.clone();
        y = inner.eval.y.clone();
        kkt = kkt_residual(problem, lambda, &x);
        history.push(OuterRecord {
            sigma,
            epsilon: eps,
            newton_iters: inner.newton_iters,
            gap,
            gap_bound,
            gap_condition_met: gap <= gap_bound,
            stopped_at_floor: inner.converged && !met && at_floor,
            kkt_residual: kkt,
            feasibility: problem.feasibility(&x),
            grad_norms: inner.grad_norms,
            dual_values: inner.values,
        });
        k += 1;
    }
    Ok(SolveResult {
        objective: problem.objective(&x, lambda),
        feasibility: problem.feasibility(&x),
        kkt_residual: kkt,
        converged: kkt <= opts.tol,
        outer_iters: k,
        newton_iters_total: newton_total,
        newton_iters_max: newton_max,
        tau,
        seconds: start.elapsed().as_secs_f64(),
        history,
        x,
        y: y.as_slice().to_vec(),
    })
}
