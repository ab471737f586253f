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

use std::time::Instant;

use nalgebra::DVector;

use super::{NormChoice, PathConfig};
use crate::error::{Error, Result};
use crate::ssn::{estimate_tau, ppa_outer_from, Problem, SolveOptions, WarmStart};

/// `λ_j = ρ_j‖Aᵀb‖` with `log₁₀ ρ_j` equispaced from `rho_max` to `rho_min`.
pub fn lambda_grid(problem: &Problem, cfg: &PathConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let b = DVector::from_column_slice(problem.loss().anchor());
    let atb = problem.a().tr_mul(&b);
    let scale = match cfg.norm {
        NormChoice::Euclidean => atb.norm(),
        NormChoice::Max => atb.amax(),
    };
    let (hi, lo) = (cfg.rho_max.log10(), cfg.rho_min.log10());
    let last = (cfg.npoints - 1) as f64;
    Ok((0..cfg.npoints)
        .map(|j| {
            let t = j as f64 / last;
            10f64.powf(hi + t * (lo - hi)) * scale
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct PathRecord {
    pub lambda: f64,
    pub nnz: usize,
    pub objective: f64,
    pub kkt_residual: f64,
    pub feasibility: f64,
    pub converged: bool,
    pub outer_iters: usize,
    pub newton_iters: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct PathResult {
    pub records: Vec<PathRecord>,
    pub solutions: Vec<Vec<f64>>,
    pub seconds: f64,
}

impl PathResult {
    pub fn all_converged(&self) -> bool {
        self.records.iter().all(|r| r.converged)
    }
}

/// Solves along a descending grid, optionally warm-starting each point
/// from the previous primal/dual pair. Non-convergence at a point is
/// recorded and the path continues.
pub fn solve_path(
    problem: &Problem,
    grid: &[f64],
    opts: &SolveOptions,
    warm_start: bool,
) -> Result<PathResult> {
    let start = Instant::now();
    if grid.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidParameter("lambda grid must be descending".into()));
    }
    let mut opts = opts.clone();
    if opts.tau.is_none() {
        opts.tau = Some(estimate_tau(problem.a(), opts.seed)?);
    }
    let mut warm = WarmStart::default();
    let mut records = Vec::with_capacity(grid.len());
    let mut solutions = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let res = ppa_outer_from(problem, lambda, &opts, &warm)?;
        records.push(PathRecord {
            lambda,
            nnz: res.nnz(),
            objective: res.objective,
            kkt_residual: res.kkt_residual,
            feasibility: res.feasibility,
            converged: res.converged,
            outer_iters: res.outer_iters,
            newton_iters: res.newton_iters_total,
            seconds: res.seconds,
        });
        if warm_start {
            warm = WarmStart {
                x: Some(res.x.clone()),
                y: Some(res.y.clone()),
            };
        }
        solutions.push(res.x);
    }
    Ok(PathResult {
        records,
        solutions,
        seconds: start.elapsed().as_secs_f64(),
    })
}
