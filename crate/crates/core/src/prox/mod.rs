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

//! Proximal mapping of `λ q_{μ,c}(x) = λ‖x‖₁ + δ{μᵀx = c}`.
//!
//! The prox is `soft(x − wμ, λ)` for a scalar multiplier `w` solving
//! `μᵀ soft(x − wμ, λ) = c`. The left-hand side is continuous, piecewise
//! affine and non-increasing in `w`, with breakpoints `(x_i ± λ)/μ_i`, so
//! the root is located by sorting the breakpoints and bisecting over the
//! linear regions, then solving the affine equation inside the bracketing
//! region. Coordinates with `μ_i = 0` do not see the constraint and are plain
//! soft-thresholded.
//!
//! The generalized Jacobian side lives in [`jacobian`]: index classification
//! and the structured B-subdifferential elements `Diag(u) − μ̃μ̃ᵀ/s`.

mod jacobian;
mod multiplier;

pub use jacobian::{apply_bsub, bsub_element, canonical_bsub, classify_indices, BsubElement};
pub use multiplier::{endpoints, solve_multiplier, MultiplierSolution};

use crate::error::{Error, Result};

/// Relative tolerance used to place an index in the β (kink) sets.
pub const BETA_TOL: f64 = 1e-12;

/// The data `(μ, c, λ)` defining `λ q_{μ,c}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    mu: Vec<f64>,
    c: f64,
    lambda: f64,
}

impl ConstraintSpec {
    pub fn new(mu: Vec<f64>, c: f64, lambda: f64) -> Result<Self> {
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter("mu must be finite".into()));
        }
        if mu.iter().all(|&m| m == 0.0) {
            return Err(Error::ZeroConstraintNormal);
        }
        if !c.is_finite() {
            return Err(Error::InvalidParameter("c must be finite".into()));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and nonnegative, got {lambda}"
            )));
        }
        Ok(Self { mu, c, lambda })
    }

    /// `μ = e` (all ones), the constraint used by log-contrast models and
    /// subspace clustering.
    pub fn ones(n: usize, c: f64, lambda: f64) -> Result<Self> {
        Self::new(vec![1.0; n], c, lambda)
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Same constraint, different regularization weight.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.mu.clone(), self.c, lambda)
    }

    /// `|μᵀz − c|`.
    pub fn violation(&self, z: &[f64]) -> f64 {
        (dot(&self.mu, z) - self.c).abs()
    }
}

/// Disjoint index sets over `[n]` (0-based) classifying `r_i = x_i − wμ_i`
/// against `λ`: `α₊: r > λ`, `α₋: r < −λ`, `β₊: r = λ`, `β₋: r = −λ`,
/// `γ: |r| < λ`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexPartition {
    pub alpha_plus: Vec<usize>,
    pub alpha_minus: Vec<usize>,
    pub beta_plus: Vec<usize>,
    pub beta_minus: Vec<usize>,
    pub gamma: Vec<usize>,
}

impl IndexPartition {
    /// `α = α₊ ∪ α₋`, sorted.
    pub fn alpha(&self) -> Vec<usize> {
        merge_sorted(&self.alpha_plus, &self.alpha_minus)
    }

    /// `β = β₊ ∪ β₋`, sorted.
    pub fn beta(&self) -> Vec<usize> {
        merge_sorted(&self.beta_plus, &self.beta_minus)
    }

    /// The prox is differentiable at the classified point iff `β = ∅`
    /// (for `c ≠ 0`, or `c = 0` off the degenerate branch).
    pub fn is_smooth(&self) -> bool {
        self.beta_plus.is_empty() && self.beta_minus.is_empty()
    }

    pub fn len(&self) -> usize {
        self.alpha_plus.len()
            + self.alpha_minus.len()
            + self.beta_plus.len()
            + self.beta_minus.len()
            + self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Output of [`prox_affine_l1`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult {
    pub z: Vec<f64>,
    pub w: f64,
    pub partition: IndexPartition,
    /// `c = 0` and the intervals `[x_i/μ_i − λ/|μ_i|, x_i/μ_i + λ/|μ_i|]`
    /// intersect, so the constrained block of the prox is zero.
    pub degenerate_zero: bool,
}

impl ProxResult {
    pub fn nnz(&self) -> usize {
        self.z.iter().filter(|&&v| v != 0.0).count()
    }
}

#[inline]
pub(crate) fn soft(t: f64, lambda: f64) -> f64 {
    if t > lambda {
        t - lambda
    } else if t < -lambda {
        t + lambda
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out.sort_unstable();
    out
}

/// Elementwise `sign(v_i)(|v_i| − λ)₊`.
pub fn soft_threshold(v: &[f64], lambda: f64) -> Vec<f64> {
    assert!(lambda >= 0.0, "soft_threshold: lambda must be nonnegative");
    v.iter().map(|&t| soft(t, lambda)).collect()
}

/// `f(x, w) = μᵀ soft(x − wμ, λ)`; non-increasing in `w`.
pub fn eval_f(x: &[f64], w: f64, spec: &ConstraintSpec) -> f64 {
    assert_eq!(x.len(), spec.len(), "eval_f: x and mu lengths differ");
    let lambda = spec.lambda;
    x.iter()
        .zip(&spec.mu)
        .filter(|(_, &m)| m != 0.0)
        .map(|(&xi, &m)| m * soft(xi - w * m, lambda))
        .sum()
}

/// `Prox_{λ q_{μ,c}}(x)` together with its multiplier and index partition.
///
/// `λ = 0` yields the Euclidean projection onto the hyperplane `μᵀz = c`.
pub fn prox_affine_l1(x: &[f64], spec: &ConstraintSpec) -> ProxResult {
    assert_eq!(x.len(), spec.len(), "prox_affine_l1: x and mu lengths differ");
    let lambda = spec.lambda;
    let mu = &spec.mu;

    if lambda == 0.0 {
        let w = (dot(mu, x) - spec.c) / dot(mu, mu);
        let z: Vec<f64> = x.iter().zip(mu).map(|(&xi, &m)| xi - w * m).collect();
        let partition = classify_indices(x, w, spec, BETA_TOL);
        return ProxResult {
            z,
            w,
            partition,
            degenerate_zero: false,
        };
    }

    let (w, degenerate_zero) = if spec.c == 0.0 {
        let (el, er) = endpoints(x, spec);
        if el <= er {
            // Any w in [E_L, E_R] thresholds every constrained coordinate to zero.
            (0.5 * (el + er), true)
        } else {
            (solve_multiplier(x, spec).w, false)
        }
    } else {
        (solve_multiplier(x, spec).w, false)
    };

    let z: Vec<f64> = if degenerate_zero {
        x.iter()
            .zip(mu)
            .map(|(&xi, &m)| if m == 0.0 { soft(xi, lambda) } else { 0.0 })
            .collect()
    } else {
        x.iter()
            .zip(mu)
            .map(|(&xi, &m)| soft(xi - w * m, lambda))
            .collect()
    };
    let partition = classify_indices(x, w, spec, BETA_TOL);
    ProxResult {
        z,
        w,
        partition,
        degenerate_zero,
    }
}
