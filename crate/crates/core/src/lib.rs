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

//! Proximal mapping of the affine-constrained ℓ1 regularizer
//!
//! `q(x) = ‖x‖₁ + δ{μᵀx = c}`
//!
//! together with elements of its B-subdifferential, and a double-loop solver
//! (preconditioned proximal point outer loop, semismooth Newton inner loop)
//! for problems of the form
//!
//! `min_x f(Ax) + λ q(x)`
//!
//! with least-squares or logistic loss `f`. Application drivers cover
//! log-contrast regression/classification paths and sparse subspace
//! clustering.

pub mod cli;
pub mod error;
pub mod loss;
pub mod oracles;
pub mod problems;
pub mod prox;
pub mod ssn;

pub use error::{Error, Result};
pub use loss::{LossKind, ProxJacobianRep};
pub use prox::{
    apply_bsub, bsub_element, classify_indices, endpoints, eval_f, prox_affine_l1,
    soft_threshold, solve_multiplier, BsubElement, ConstraintSpec, IndexPartition,
    MultiplierSolution, ProxResult,
};
pub use ssn::{ppa_outer, kkt_residual, Problem, SolveOptions, SolveResult};
