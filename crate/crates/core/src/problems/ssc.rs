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

//! Sparse subspace clustering: each column is coded by the others,
//! `min ½‖A_{−j}x − a_j‖² + λ‖x‖₁` s.t. `eᵀx = 1`, and the codes are
//! assembled into `X` with `Diag(X) = 0`.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ssn::{ppa_outer, Problem, SolveOptions};

#[derive(Debug, Clone, Default)]
pub struct SscOptions {
    pub solve: SolveOptions,
    /// scale every data column to unit Euclidean norm first
    pub normalize_columns: bool,
}

#[derive(Debug, Clone)]
pub struct SscResult {
    /// `n × n`, exact zero diagonal
    pub x: DMatrix<f64>,
    pub objectives: Vec<f64>,
    pub total_objective: f64,
    /// `‖Xᵀe − e‖`
    pub feasibility: f64,
    pub converged: Vec<bool>,
    pub kkt_residuals: Vec<f64>,
    pub newton_iters: Vec<usize>,
    pub seconds: f64,
}

impl SscResult {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// Column-`j` subproblem: dictionary `A` without column `j`, target `a_j`,
/// `μ = e`, `c = 1`.
pub fn ssc_column_problem(a: &DMatrix<f64>, j: usize) -> Result<Problem> {
    let b = a.column(j).iter().copied().collect();
    Problem::least_squares(a.clone().remove_column(j), b, 1.0)
}

fn normalized(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = a.clone();
    for mut col in out.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= n;
        }
    }
    out
}

/// Solves all `n` column problems in parallel; the assembly order does not
/// depend on scheduling.
pub fn ssc_solve(a: &DMatrix<f64>, lambda: f64, opts: &SscOptions) -> Result<SscResult> {
    let start = Instant::now();
    let n = a.ncols();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "clustering needs at least 2 points, got {n}"
        )));
    }
    let data = if opts.normalize_columns {
        normalized(a)
    } else {
        a.clone()
    };
    let cols: Vec<_> = (0..n)
        .into_par_iter()
        .map(|j| {
            let p = ssc_column_problem(&data, j)?;
            ppa_outer(&p, lambda, &opts.solve)
        })
        .collect::<Result<_>>()?;
    let mut x = DMatrix::zeros(n, n);
    for (j, res) in cols.iter().enumerate() {
        for (k, &v) in res.x.iter().enumerate() {
            let row = if k < j { k } else { k + 1 };
            x[(row, j)] = v;
        }
    }
    let colsum = x.row_sum().transpose();
    let feasibility = (colsum - DVector::from_element(n, 1.0)).norm();
    let objectives: Vec<f64> = cols.iter().map(|r| r.objective).collect();
    Ok(SscResult {
        total_objective: objectives.iter().sum(),
        objectives,
        feasibility,
        converged: cols.iter().map(|r| r.converged).collect(),
        kkt_residuals: cols.iter().map(|r| r.kkt_residual).collect(),
        newton_iters: cols.iter().map(|r| r.newton_iters_total).collect(),
        seconds: start.elapsed().as_secs_f64(),
        x,
    })
}
