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

//! Newton systems of the dual subproblem.
//!
//! The generalized Hessian (negated) at `y` is
//!
//! `V = (σ/τ)·H + σ·A_K(I − μ_Kμ_Kᵀ/s)A_Kᵀ + εI`
//!
//! where `H` is an element of `∂Prox_{σf/τ}(v)` (diagonal), `K` is the
//! support of the prox Jacobian element and `s = ‖μ_K‖²`. Only the `|K|`
//! active columns of `A` are touched.

use nalgebra::{DMatrix, DVector};

use super::dual::{DualEval, SubproblemContext};
use crate::error::{Error, Result};
use crate::loss::{jacobian_at_prox, LossKind};
use crate::prox::canonical_bsub;

/// Above this many rows the automatic strategy avoids the dense `m × m` system.
pub const DIRECT_MAX_ROWS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NewtonStrategy {
    /// Dense Cholesky for small `m`, otherwise SMW when `|K| < m`, else CG.
    #[default]
    Auto,
    Dense,
    /// Sherman–Morrison–Woodbury through a `|K| × |K|` core system.
    Smw,
    Cg,
}

/// Structured form of `V`.
#[derive(Debug, Clone)]
pub struct NewtonOperator {
    diag: DVector<f64>,
    sigma: f64,
    a_k: DMatrix<f64>,
    mu_k: DVector<f64>,
    /// `A_K μ_K`
    a_mu: DVector<f64>,
    s: f64,
    support: Vec<usize>,
}

impl NewtonOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Active set `K`.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn diagonal_part(&self) -> &DVector<f64> {
        &self.diag
    }

    pub fn apply(&self, d: &DVector<f64>) -> DVector<f64> {
        let mut out = self.diag.component_mul(d);
        if !self.support.is_empty() {
            let t = self.a_k.tr_mul(d);
            out += &self.a_k * t * self.sigma;
            if self.s > 0.0 {
                out -= &self.a_mu * (self.sigma * self.a_mu.dot(d) / self.s);
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::from_diagonal(&self.diag);
        if !self.support.is_empty() {
            m += &self.a_k * self.a_k.transpose() * self.sigma;
            if self.s > 0.0 {
                m -= &self.a_mu * self.a_mu.transpose() * (self.sigma / self.s);
            }
        }
        m
    }

    /// `B = A_K(I − μ_Kμ_Kᵀ/s)`, so that `V = D + σBBᵀ`.
    fn projected_columns(&self) -> DMatrix<f64> {
        let mut b = self.a_k.clone();
        if self.s > 0.0 {
            b -= &self.a_mu * self.mu_k.transpose() / self.s;
        }
        b
    }

    fn jacobi(&self) -> DVector<f64> {
        let mut p = self.diag.clone();
        for col in self.a_k.column_iter() {
            for i in 0..p.len() {
                p[i] += self.sigma * col[i] * col[i];
            }
        }
        if self.s > 0.0 {
            for i in 0..p.len() {
                p[i] -= self.sigma * self.a_mu[i] * self.a_mu[i] / self.s;
            }
        }
        p.map(|v| if v > 0.0 { v } else { 1.0 })
    }
}

/// Builds `V` at the evaluated point with regularization `eps`.
pub fn assemble_newton_apply(
    ctx: &SubproblemContext<'_>,
    eval: &DualEval,
    eps: f64,
) -> NewtonOperator {
    let m = eval.y.len();
    let k = ctx.loss_weight();
    let diag = match ctx.problem.loss() {
        LossKind::LeastSquares { .. } => DVector::from_element(m, k / (1.0 + k) + eps),
        LossKind::Logistic { labels } => {
            let h = jacobian_at_prox(&eval.p, labels, k);
            DVector::from_iterator(m, h.into_iter().map(|v| k * v + eps))
        }
    };
    let elem = canonical_bsub(&eval.prox, ctx.scaled_spec());
    let support = elem.support();
    let a_k = ctx.problem.a().select_columns(&support);
    let mu_k = DVector::from_iterator(support.len(), support.iter().map(|&i| elem.mu_masked()[i]));
    let a_mu = &a_k * &mu_k;
    NewtonOperator {
        diag,
        sigma: ctx.sigma,
        a_k,
        mu_k,
        a_mu,
        s: elem.s(),
        support,
    }
}

/// Outcome of one linear solve.
#[derive(Debug, Clone)]
pub struct NewtonSolve {
    pub d: DVector<f64>,
    pub residual: f64,
    /// strategy actually used (never `Auto`)
    pub method: NewtonStrategy,
    pub cg_iters: usize,
}

fn resolve(op: &NewtonOperator, strategy: NewtonStrategy) -> NewtonStrategy {
    match strategy {
        NewtonStrategy::Auto => {
            if op.dim() <= DIRECT_MAX_ROWS {
                NewtonStrategy::Dense
            } else if op.support.len() < op.dim() {
                NewtonStrategy::Smw
            } else {
                NewtonStrategy::Cg
            }
        }
        s => s,
    }
}

/// Solves `V d = rhs` to residual `tol`.
///
/// Direct solves get one step of iterative refinement and fall back to CG
/// when the residual is still above `tol` and CG can improve on it.
/// A failed Cholesky factorization is reported as [`Error::Factorization`];
/// the caller is expected to raise the regularization and retry.
pub fn solve_newton_direction(
    op: &NewtonOperator,
    rhs: &DVector<f64>,
    tol: f64,
    strategy: NewtonStrategy,
) -> Result<NewtonSolve> {
    if op.support.is_empty() {
        let d = rhs.component_div(&op.diag);
        let residual = (op.apply(&d) - rhs).norm();
        return Ok(NewtonSolve {
            d,
            residual,
            method: resolve(op, strategy),
            cg_iters: 0,
        });
    }
    let method = resolve(op, strategy);
    let (d, cg_iters) = match method {
        NewtonStrategy::Dense => {
            let chol = op.to_dense().cholesky().ok_or(Error::Factorization)?;
            let mut d = chol.solve(rhs);
            let r = rhs - op.apply(&d);
            d += chol.solve(&r);
            (d, 0)
        }
        NewtonStrategy::Smw => {
            let solver = SmwSolver::new(op)?;
            let mut d = solver.solve(rhs);
            let r = rhs - op.apply(&d);
            d += solver.solve(&r);
            (d, 0)
        }
        NewtonStrategy::Cg | NewtonStrategy::Auto => {
            let zero = DVector::zeros(op.dim());
            pcg(op, rhs, zero, tol)
        }
    };
    let residual = (op.apply(&d) - rhs).norm();
    Ok(NewtonSolve {
        d,
        residual,
        method,
        cg_iters,
    })
}

struct SmwSolver {
    dinv: DVector<f64>,
    b: DMatrix<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl SmwSolver {
    fn new(op: &NewtonOperator) -> Result<Self> {
        let dinv = op.diag.map(|v| 1.0 / v);
        let b = op.projected_columns();
        let mut db = b.clone();
        for mut col in db.column_iter_mut() {
            col.component_mul_assign(&dinv);
        }
        let mut core = b.tr_mul(&db);
        for i in 0..core.nrows() {
            core[(i, i)] += 1.0 / op.sigma;
        }
        let chol = core.cholesky().ok_or(Error::Factorization)?;
        Ok(Self { dinv, b, chol })
    }

    fn solve(&self, r: &DVector<f64>) -> DVector<f64> {
        let dr = r.component_mul(&self.dinv);
        let t = self.chol.solve(&self.b.tr_mul(&dr));
        dr - (&self.b * t).component_mul(&self.dinv)
    }
}

/// Jacobi-preconditioned conjugate gradients from `x0`.
fn pcg(
    op: &NewtonOperator,
    rhs: &DVector<f64>,
    mut x: DVector<f64>,
    tol: f64,
) -> (DVector<f64>, usize) {
    let pinv = op.jacobi().map(|v| 1.0 / v);
    let mut r = rhs - op.apply(&x);
    let mut z = r.component_mul(&pinv);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let max_iter = (2 * op.dim()).max(100);
    let mut it = 0;
    while it < max_iter && r.norm() > tol {
        let q = op.apply(&p);
        let pq = p.dot(&q);
        if pq <= 0.0 {
            break;
        }
        let a = rz / pq;
        x.axpy(a, &p, 1.0);
        r.axpy(-a, &q, 1.0);
        z = r.component_mul(&pinv);
        let rz_new = r.dot(&z);
        p = &z + &p * (rz_new / rz);
        rz = rz_new;
        it += 1;
    }
    (x, it)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssn::Problem;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(m: usize, n: usize, logistic: bool, seed: u64) -> (Problem, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let loss = if logistic {
            LossKind::logistic((0..m).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect())
                .unwrap()
        } else {
            LossKind::least_squares((0..m).map(|_| rng.random_range(-1.0..1.0)).collect())
        };
        let mu = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
        let xk = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        (Problem::new(a, loss, mu, 1.0).unwrap(), xk)
    }

    fn operator(prob: &Problem, xk: &[f64], eps: f64) -> (NewtonOperator, DualEval) {
        let ctx = SubproblemContext::new(prob, 0.05, xk, 2.0, 0.1).unwrap();
        let y = DVector::from_fn(prob.nrows(), |i, _| 0.1 * i as f64 - 0.2);
        let e = ctx.evaluate(&y);
        (assemble_newton_apply(&ctx, &e, eps), e)
    }

    #[test]
    fn apply_matches_dense() {
        let (prob, xk) = setup(6, 15, true, 1);
        let (op, _) = operator(&prob, &xk, 1e-3);
        assert!(!op.support().is_empty());
        let d = DVector::from_fn(6, |i, _| (i as f64 + 1.0).cos());
        let dense = op.to_dense() * &d;
        assert!((op.apply(&d) - dense).norm() < 1e-12);
    }

    #[test]
    fn operator_is_symmetric_positive_definite() {
        let (prob, xk) = setup(5, 12, false, 2);
        let (op, _) = operator(&prob, &xk, 0.0);
        let m = op.to_dense();
        assert!((&m - m.transpose()).norm() < 1e-12);
        let eig = m.symmetric_eigenvalues();
        assert!(eig.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn strategies_agree() {
        for (seed, logistic) in [(3, false), (4, true)] {
            let (prob, xk) = setup(8, 20, logistic, seed);
            let (op, e) = operator(&prob, &xk, 1e-4);
            let dense = solve_newton_direction(&op, &e.grad, 1e-13, NewtonStrategy::Dense).unwrap();
            let smw = solve_newton_direction(&op, &e.grad, 1e-13, NewtonStrategy::Smw).unwrap();
            let cg = solve_newton_direction(&op, &e.grad, 1e-13, NewtonStrategy::Cg).unwrap();
            assert_eq!(dense.method, NewtonStrategy::Dense);
            assert!(dense.residual < 1e-12);
            assert!((&dense.d - &smw.d).norm() < 1e-10 * (1.0 + dense.d.norm()));
            assert!((&dense.d - &cg.d).norm() < 1e-9 * (1.0 + dense.d.norm()));
        }
    }

    #[test]
    fn empty_support_is_diagonal_solve() {
        // large λ with c = 0 pushes the prox to the degenerate zero branch
        let (a, b) = (
            DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]),
            vec![0.1, -0.1],
        );
        let prob = Problem::least_squares(a, b, 0.0).unwrap();
        let ctx = SubproblemContext::new(&prob, 10.0, &[0.0; 3], 1.0, 0.5).unwrap();
        let e = ctx.evaluate(&DVector::zeros(2));
        assert!(e.prox.degenerate_zero);
        let op = assemble_newton_apply(&ctx, &e, 0.0);
        assert!(op.support().is_empty());
        let sol = solve_newton_direction(&op, &e.grad, 1e-14, NewtonStrategy::Auto).unwrap();
        let expect = e.grad / (2.0 / 3.0);
        assert!((sol.d - expect).norm() < 1e-14);
    }
}
