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

//! Independent reference implementations used to check the fast paths.
//!
//! Nothing here shares code with the breakpoint search or the Newton
//! solver beyond the plain soft-threshold helper and the problem types.

use std::fmt;
use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::loss::{sigmoid, LossKind};
use crate::prox::{prox_affine_l1, ConstraintSpec};
use crate::ssn::Problem;

/// Largest dimension accepted by [`prox_bruteforce`].
pub const BRUTEFORCE_MAX_DIM: usize = 12;

/// Prox of `λq_{μ,c}` by enumerating all `3ⁿ` sign patterns.
///
/// For a pattern `s` with support `S` the problem restricted to that face,
/// `min ½‖z − x‖² + λsᵀz` s.t. `μ_Sᵀz_S = c`, `z_{Sᶜ} = 0`, has a closed
/// form. Candidates whose signs match `s` strictly are feasible, and the
/// minimizer is one of them, so the cheapest candidate is the prox.
/// Sign matching allows a rounding margin so that a coordinate that is
/// zero in exact arithmetic is never credited to a nonzero pattern.
pub fn prox_bruteforce(x: &[f64], spec: &ConstraintSpec) -> Result<Vec<f64>> {
    let n = x.len();
    if n != spec.len() {
        return Err(Error::DimensionMismatch {
            what: "x vs mu",
            expected: spec.len(),
            got: n,
        });
    }
    if n == 0 || n > BRUTEFORCE_MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "brute force needs 1 <= n <= {BRUTEFORCE_MAX_DIM}, got {n}"
        )));
    }
    let mu = spec.mu();
    let (c, lambda) = (spec.c(), spec.lambda());
    let mut signs = vec![0i8; n];
    let mut z = vec![0.0; n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut t = code;
        for s in signs.iter_mut() {
            *s = (t % 3) as i8 - 1;
            t /= 3;
        }
        let mut num = -c;
        let mut den = 0.0;
        for i in 0..n {
            if signs[i] != 0 {
                num += mu[i] * (x[i] - lambda * signs[i] as f64);
                den += mu[i] * mu[i];
            }
        }
        let w = if den > 0.0 {
            num / den
        } else if c == 0.0 {
            0.0
        } else {
            continue;
        };
        let mut ok = true;
        for i in 0..n {
            z[i] = if signs[i] == 0 {
                0.0
            } else {
                x[i] - lambda * signs[i] as f64 - w * mu[i]
            };
            // values within rounding of zero belong to the pattern with s_i = 0
            let tol = 1e-13 * (1.0 + x[i].abs() + (w * mu[i]).abs() + lambda);
            let consistent = match signs[i] {
                1 => z[i] > tol,
                -1 => z[i] < -tol,
                _ => true,
            };
            if !consistent {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let obj: f64 = (0..n)
            .map(|i| 0.5 * (z[i] - x[i]) * (z[i] - x[i]) + lambda * z[i].abs())
            .sum();
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, z.clone()));
        }
    }
    best.map(|(_, z)| z)
        .ok_or_else(|| Error::InvalidParameter("no feasible sign pattern".into()))
}

/// Central-difference Jacobian of `f` at `x` with step `h`.
pub fn fd_jacobian<F>(f: F, x: &[f64], h: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let m = f(x).len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + h;
        let fp = f(&xp);
        xp[j] = x[j] - h;
        let fm = f(&xp);
        xp[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Finite-difference Jacobian of the prox of `λq_{μ,c}`.
pub fn prox_fd_jacobian(x: &[f64], spec: &ConstraintSpec, h: f64) -> DMatrix<f64> {
    fd_jacobian(|v| prox_affine_l1(v, spec).z, x, h)
}

const ADAPT_UNTIL: usize = 1000;

#[derive(Debug, Clone)]
pub struct AdmmOptions {
    pub rho: f64,
    /// relative primal/dual residual target
    pub tol: f64,
    pub max_iter: usize,
    /// rebalance `ρ` when the residuals drift apart by more than 10×; only
    /// during the first iterations so that convergence is not disturbed
    pub adaptive_rho: bool,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        Self {
            rho: 1.0,
            tol: 1e-8,
            max_iter: 20000,
            adaptive_rho: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdmmResult {
    /// loss block
    pub x: Vec<f64>,
    /// regularizer block; exactly feasible for the constraint
    pub z: Vec<f64>,
    /// `f(Az) + λ‖z‖₁`
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub seconds: f64,
}

/// Factorization of `ρI + D^{1/2}AAᵀD^{1/2}` for applying
/// `(ρI + AᵀDA)⁻¹` in `O(mn)`.
struct GramSolver {
    chol: Cholesky<f64, Dyn>,
    sqrt_d: DVector<f64>,
    rho: f64,
}

impl GramSolver {
    fn new(a: &DMatrix<f64>, d: &DVector<f64>, rho: f64) -> Result<Self> {
        let sqrt_d = d.map(|v| v.max(0.0).sqrt());
        let mut da = a.clone();
        for mut col in da.column_iter_mut() {
            col.component_mul_assign(&sqrt_d);
        }
        let mut g = &da * da.transpose();
        for i in 0..g.nrows() {
            g[(i, i)] += rho;
        }
        let chol = g.cholesky().ok_or(Error::Factorization)?;
        Ok(Self { chol, sqrt_d, rho })
    }

    /// `(ρI + AᵀDA)⁻¹ r = (r − AᵀD^{1/2}(ρI + D^{1/2}AAᵀD^{1/2})⁻¹D^{1/2}Ar)/ρ`
    fn solve(&self, a: &DMatrix<f64>, r: &DVector<f64>) -> DVector<f64> {
        let t = (a * r).component_mul(&self.sqrt_d);
        let t = self.chol.solve(&t).component_mul(&self.sqrt_d);
        (r - a.tr_mul(&t)) / self.rho
    }
}

/// Minimizes `f(Ax) + (ρ/2)‖x − v‖²` for the logistic loss by damped Newton.
fn logistic_x_update(
    a: &DMatrix<f64>,
    labels: &[f64],
    v: &DVector<f64>,
    rho: f64,
    x0: &DVector<f64>,
) -> Result<DVector<f64>> {
    let loss = |x: &DVector<f64>| -> f64 {
        let ax = a * x;
        LossKind::Logistic {
            labels: labels.to_vec(),
        }
        .value(ax.as_slice())
            + 0.5 * rho * (x - v).norm_squared()
    };
    let mut x = x0.clone();
    let mut fx = loss(&x);
    for _ in 0..50 {
        let ax = a * &x;
        let mut gz = DVector::zeros(labels.len());
        let mut d = DVector::zeros(labels.len());
        for i in 0..labels.len() {
            let s = sigmoid(-labels[i] * ax[i]);
            gz[i] = -labels[i] * s;
            d[i] = s * (1.0 - s);
        }
        let g = a.tr_mul(&gz) + (&x - v) * rho;
        if g.norm() <= 1e-13 * (1.0 + x.norm()) {
            break;
        }
        let step = GramSolver::new(a, &d, rho)?.solve(a, &g);
        let slope = g.dot(&step);
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let xn = &x - &step * t;
            let fn_ = loss(&xn);
            if fn_ <= fx - 1e-4 * t * slope {
                x = xn;
                fx = fn_;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok(x)
}

/// Two-block ADMM for `min f(Ax) + λq(z)` s.t. `x = z`.
pub fn admm_baseline(problem: &Problem, lambda: f64, opts: &AdmmOptions) -> Result<AdmmResult> {
    let start = Instant::now();
    let a = problem.a();
    let (m, n) = (problem.nrows(), problem.ncols());
    let mut rho = opts.rho;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    let base = problem.constraint(lambda)?;
    let mut x = DVector::zeros(n);
    let mut z = DVector::zeros(n);
    let mut u = DVector::zeros(n);
    let ls = match problem.loss() {
        LossKind::LeastSquares { b } => Some(a.tr_mul(&DVector::from_column_slice(b))),
        LossKind::Logistic { .. } => None,
    };
    let ones = DVector::from_element(m, 1.0);
    let mut gram = GramSolver::new(a, &ones, rho)?;
    let (mut rp, mut rd) = (f64::INFINITY, f64::INFINITY);
    let mut converged = false;
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        let v = &z - &u;
        x = match (&ls, problem.loss()) {
            (Some(atb), _) => gram.solve(a, &(atb + &v * rho)),
            (None, LossKind::Logistic { labels }) => logistic_x_update(a, labels, &v, rho, &x)?,
            _ => unreachable!(),
        };
        let spec = base.with_lambda(lambda / rho)?;
        let z_old = z.clone();
        let xu = &x + &u;
        z = DVector::from_vec(prox_affine_l1(xu.as_slice(), &spec).z);
        u += &x - &z;
        rp = (&x - &z).norm();
        rd = rho * (&z - &z_old).norm();
        let scale = 1.0 + x.norm().max(z.norm());
        if rp <= opts.tol * scale && rd <= opts.tol * (1.0 + rho * u.norm()) {
            converged = true;
            break;
        }
        if opts.adaptive_rho && it % 10 == 0 && it <= ADAPT_UNTIL {
            let new_rho = if rp > 10.0 * rd {
                rho * 2.0
            } else if rd > 10.0 * rp {
                rho / 2.0
            } else {
                rho
            };
            if new_rho != rho {
                u *= rho / new_rho;
                rho = new_rho;
                if ls.is_some() {
                    gram = GramSolver::new(a, &ones, rho)?;
                }
            }
        }
    }
    let z = z.as_slice().to_vec();
    Ok(AdmmResult {
        objective: problem.objective(&z, lambda),
        x: x.as_slice().to_vec(),
        z,
        iterations: it,
        converged,
        primal_residual: rp,
        dual_residual: rd,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// One checked property: worst observed error against its tolerance.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub name: String,
    pub instances: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            instances: 0,
            max_error: 0.0,
            tolerance,
        }
    }

    pub fn record(&mut self, err: f64) {
        self.instances += 1;
        // NaN must fail
        if !(err <= self.max_error) {
            self.max_error = if err.is_nan() { f64::INFINITY } else { err };
        }
    }

    pub fn passed(&self) -> bool {
        self.instances > 0 && self.max_error <= self.tolerance
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} over {} instances, max error {:.3e} (tol {:.1e})",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.instances,
            self.max_error,
            self.tolerance
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssn::{ppa_outer, SolveOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(mu: &[f64], c: f64, lambda: f64) -> ConstraintSpec {
        ConstraintSpec::new(mu.to_vec(), c, lambda).unwrap()
    }

    #[test]
    fn bruteforce_examples() {
        let z = prox_bruteforce(&[3.0, 1.0], &spec(&[1.0, 1.0], 1.0, 0.5)).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-15 && z[1].abs() < 1e-15);
        let z = prox_bruteforce(&[0.2, -0.1, 0.3], &spec(&[1.0; 3], 0.0, 1.0)).unwrap();
        assert_eq!(z, vec![0.0; 3]);
        let z = prox_bruteforce(&[5.0], &spec(&[2.0], 3.0, 1.0)).unwrap();
        assert!((z[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn bruteforce_rejects_large_inputs() {
        let x = vec![0.0; 13];
        assert!(prox_bruteforce(&x, &spec(&[1.0; 13], 1.0, 0.1)).is_err());
    }

    #[test]
    fn bruteforce_matches_fast_prox() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.random_range(1..=7);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mu: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let c = rng.random_range(-2.0..2.0);
            let s = spec(&mu, c, rng.random_range(0.0..1.5));
            let bf = prox_bruteforce(&x, &s).unwrap();
            let fast = prox_affine_l1(&x, &s).z;
            let err = bf.iter().zip(&fast).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "x={x:?} mu={mu:?} c={c}: {bf:?} vs {fast:?}");
        }
    }

    #[test]
    fn fd_jacobian_of_linear_map() {
        let jac = fd_jacobian(|v| vec![2.0 * v[0] + v[1], -v[1]], &[0.3, 0.4], 1e-6);
        let expect = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, -1.0]);
        assert!((jac - expect).norm() < 1e-9);
    }

    fn random_problem(m: usize, n: usize, logistic: bool, seed: u64) -> Problem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let loss = if logistic {
            LossKind::logistic((0..m).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect())
                .unwrap()
        } else {
            LossKind::least_squares((0..m).map(|_| rng.random_range(-1.0..1.0)).collect())
        };
        Problem::new(a, loss, vec![1.0; n], 1.0).unwrap()
    }

    #[test]
    fn admm_agrees_with_newton_solver() {
        for (seed, logistic) in [(1, false), (2, true)] {
            let p = random_problem(15, 30, logistic, seed);
            let admm = admm_baseline(&p, 0.05, &AdmmOptions::default()).unwrap();
            let ssn = ppa_outer(&p, 0.05, &SolveOptions::default()).unwrap();
            assert!(admm.converged);
            assert!(p.feasibility(&admm.z) < 1e-10);
            let rel = (admm.objective - ssn.objective).abs() / (1.0 + ssn.objective.abs());
            assert!(rel < 1e-6, "{} vs {}", admm.objective, ssn.objective);
        }
    }

    #[test]
    fn report_tracks_worst_case() {
        let mut r = OracleReport::new("x", 1e-3);
        r.record(1e-5);
        r.record(1e-4);
        assert!(r.passed());
        r.record(f64::NAN);
        assert!(!r.passed());
        assert!(r.to_string().contains("FAIL"));
    }
}
