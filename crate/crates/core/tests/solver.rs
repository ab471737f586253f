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

//! End-to-end solver checks against the ADMM oracle and across Newton
//! strategies.

mod common;

use affine_l1::oracles::{admm_baseline, AdmmOptions};
use affine_l1::problems::{
    lambda_grid, log_contrast_preprocess, solve_path, ssc_column_problem, ssc_solve, Dataset,
    PathConfig, SscOptions,
};
use affine_l1::ssn::{ppa_outer, NewtonStrategy, SolveOptions};
use affine_l1::{kkt_residual, LossKind, Problem};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

fn lambda_for(p: &Problem, rho: f64) -> f64 {
    p.a().tr_mul(&DVector::from_column_slice(p.loss().anchor())).amax() * rho
}

#[test]
fn strategies_reach_the_same_solution() {
    let mut rng = common::rng(11);
    for logistic in [false, true] {
        let p = if logistic {
            common::logistic_problem(&mut rng, 40, 120, 1.0)
        } else {
            common::least_squares_problem(&mut rng, 30, 120, 1.0)
        };
        let lambda = lambda_for(&p, 0.1);
        let solve = |strategy| {
            ppa_outer(&p, lambda, &SolveOptions { strategy, ..Default::default() }).unwrap()
        };
        let dense = solve(NewtonStrategy::Dense);
        assert!(dense.converged);
        for s in [NewtonStrategy::Smw, NewtonStrategy::Cg, NewtonStrategy::Auto] {
            let other = solve(s);
            assert!(other.converged, "{s:?}");
            let rel = (other.objective - dense.objective).abs() / (1.0 + dense.objective.abs());
            assert!(rel < 1e-9, "{s:?}: {rel}");
        }
    }
}

#[test]
fn general_mu_matches_admm() {
    let mut rng = common::rng(12);
    let (m, n) = (25, 60);
    let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
    let b: Vec<f64> = common::gaussian(&mut rng, m);
    let mu = common::signed_mu(&mut rng, n);
    let p = Problem::new(a, LossKind::least_squares(b), mu, -0.7).unwrap();
    let lambda = lambda_for(&p, 0.05);
    let ssn = ppa_outer(&p, lambda, &SolveOptions::default()).unwrap();
    let admm = admm_baseline(&p, lambda, &AdmmOptions { tol: 1e-10, max_iter: 100_000, ..Default::default() }).unwrap();
    assert!(ssn.converged && admm.converged);
    assert!((ssn.objective - admm.objective).abs() <= 1e-6 * (1.0 + admm.objective.abs()));
    assert!(ssn.feasibility <= p.feasibility(&admm.z).max(1e-12 * (1.0 + p.c().abs())));
}

#[test]
fn newton_counts_stay_small() {
    let mut rng = common::rng(13);
    let mut within = 0;
    for k in 0..20 {
        let p = common::least_squares_problem(&mut rng, 40, 150, (k % 2) as f64);
        let res = ppa_outer(&p, lambda_for(&p, 0.1), &SolveOptions::default()).unwrap();
        assert!(res.converged);
        within += (res.newton_iters_total <= 30) as usize;
    }
    assert!(within >= 19, "{within}/20");
}

#[test]
fn outer_cap_reports_non_convergence() {
    let mut rng = common::rng(14);
    let p = common::least_squares_problem(&mut rng, 20, 50, 1.0);
    let opts = SolveOptions { max_outer: 1, tol: 1e-14, ..Default::default() };
    let res = ppa_outer(&p, lambda_for(&p, 0.01), &opts).unwrap();
    assert!(!res.converged);
    assert_eq!(res.outer_iters, 1);
    assert!(res.feasibility <= 1e-10 * (2.0 + common::norm(&res.x)));
}

#[test]
fn lambda_zero_is_constrained_least_squares() {
    // overdetermined: unique minimizer of ½‖Ax − b‖² on eᵀx = 1
    let mut rng = common::rng(15);
    let (m, n) = (30, 6);
    let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
    let b = DVector::from_vec(common::gaussian(&mut rng, m));
    let p = Problem::least_squares(a.clone(), b.as_slice().to_vec(), 1.0).unwrap();
    let res = ppa_outer(&p, 0.0, &SolveOptions::default()).unwrap();
    assert!(res.converged);
    // KKT system [AᵀA e; eᵀ 0][x; ν] = [Aᵀb; 1]
    let mut k = DMatrix::zeros(n + 1, n + 1);
    k.view_mut((0, 0), (n, n)).copy_from(&(a.transpose() * &a));
    for i in 0..n {
        k[(i, n)] = 1.0;
        k[(n, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs.rows_mut(0, n).copy_from(&(a.transpose() * &b));
    rhs[n] = 1.0;
    let sol = k.lu().solve(&rhs).unwrap();
    let err = common::max_abs_diff(&res.x, sol.rows(0, n).as_slice());
    assert!(err < 1e-6, "{err}");
}

#[test]
fn warm_path_keeps_kkt_within_tolerance() {
    let mut rng = common::rng(16);
    let p = common::logistic_problem(&mut rng, 60, 150, 0.0);
    let grid = lambda_grid(&p, &PathConfig { npoints: 8, rho_min: 1e-3, ..Default::default() }).unwrap();
    let opts = SolveOptions::default();
    let path = solve_path(&p, &grid, &opts, true).unwrap();
    for (r, x) in path.records.iter().zip(&path.solutions) {
        assert!(r.converged);
        assert!(kkt_residual(&p, r.lambda, x) <= opts.tol);
    }
}

#[test]
fn log_contrast_regression_end_to_end() {
    let mut rng = common::rng(17);
    let (m, n) = (40, 30);
    let counts = DMatrix::from_fn(m, n, |_, _| {
        if rng.random_bool(0.3) { 0.0 } else { rng.random_range(1.0..100.0f64).floor() }
    });
    let z = log_contrast_preprocess(&counts).unwrap();
    let mut truth = vec![0.0; n];
    truth[0] = 1.0;
    truth[1] = -1.0;
    let resp = &z * DVector::from_vec(truth);
    let data = Dataset::new(z, resp.as_slice().to_vec(), None).unwrap();
    let p = data.regression(vec![1.0; n], 0.0).unwrap();
    let res = ppa_outer(&p, lambda_for(&p, 0.05), &SolveOptions::default()).unwrap();
    assert!(res.converged);
    assert!(res.x.iter().sum::<f64>().abs() < 1e-10);
    assert!(res.x[0] > 0.5 && res.x[1] < -0.5);
}

#[test]
fn ssc_columns_match_admm_and_constraints() {
    let mut rng = common::rng(18);
    let a = common::union_of_subspaces(&mut rng, 8, 40, 4, 2);
    let lambda = 1e-3;
    let res = ssc_solve(&a, lambda, &SscOptions::default()).unwrap();
    assert!(res.all_converged());
    for j in 0..40 {
        assert_eq!(res.x[(j, j)], 0.0);
        assert!((res.x.column(j).sum() - 1.0).abs() <= 1e-10);
    }
    let opts = AdmmOptions { tol: 1e-9, max_iter: 100_000, ..Default::default() };
    for j in [0, 13, 39] {
        let p = ssc_column_problem(&a, j).unwrap();
        let admm = admm_baseline(&p, lambda, &opts).unwrap();
        assert!(res.objectives[j] <= admm.objective + 1e-6 * (1.0 + admm.objective.abs()));
    }
}

#[test]
fn ssc_is_deterministic() {
    let mut rng = common::rng(19);
    let a = common::union_of_subspaces(&mut rng, 6, 30, 3, 2);
    let r1 = ssc_solve(&a, 1e-2, &SscOptions::default()).unwrap();
    let r2 = ssc_solve(&a, 1e-2, &SscOptions::default()).unwrap();
    assert_eq!(r1.x, r2.x);
}
