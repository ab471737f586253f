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

//! Smooth losses `f : Rᵐ → R` with their scaled proximal mappings, Moreau
//! envelopes and prox Jacobians.
//!
//! For a weight `α > 0`, `Prox_{αf}(v) = argmin_u αf(u) + ½‖u − v‖²` and the
//! envelope `E_{αf}(v)` is the optimal value; `∇E_{αf}(v) = v − Prox_{αf}(v)`.

use crate::error::{Error, Result};

/// Loss selector together with its anchor data (response `b` or ±1 labels).
#[derive(Debug, Clone, PartialEq)]
pub enum LossKind {
    /// `½‖z − b‖²`
    LeastSquares { b: Vec<f64> },
    /// `Σ log(1 + exp(−b_i z_i))`, `b_i ∈ {−1, +1}`
    Logistic { labels: Vec<f64> },
}

/// Element of `∂Prox_{αf}`: always diagonal for the supported losses.
#[derive(Debug, Clone, PartialEq)]
pub enum ProxJacobianRep {
    ScaledIdentity(f64),
    Diagonal(Vec<f64>),
}

impl ProxJacobianRep {
    pub fn entry(&self, i: usize) -> f64 {
        match self {
            ProxJacobianRep::ScaledIdentity(s) => *s,
            ProxJacobianRep::Diagonal(d) => d[i],
        }
    }

    /// Multiplies every entry by `k`.
    pub fn scaled(&self, k: f64) -> ProxJacobianRep {
        match self {
            ProxJacobianRep::ScaledIdentity(s) => ProxJacobianRep::ScaledIdentity(k * s),
            ProxJacobianRep::Diagonal(d) => {
                ProxJacobianRep::Diagonal(d.iter().map(|v| k * v).collect())
            }
        }
    }
}

#[inline]
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

#[inline]
pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl LossKind {
    pub fn least_squares(b: Vec<f64>) -> Self {
        LossKind::LeastSquares { b }
    }

    pub fn logistic(labels: Vec<f64>) -> Result<Self> {
        if let Some(bad) = labels.iter().find(|&&l| l != 1.0 && l != -1.0) {
            return Err(Error::InvalidData(format!(
                "logistic labels must be -1 or +1, found {bad}"
            )));
        }
        Ok(LossKind::Logistic { labels })
    }

    pub fn anchor(&self) -> &[f64] {
        match self {
            LossKind::LeastSquares { b } => b,
            LossKind::Logistic { labels } => labels,
        }
    }

    pub fn len(&self) -> usize {
        self.anchor().len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchor().is_empty()
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossKind::LeastSquares { .. } => "least_squares",
            LossKind::Logistic { .. } => "logistic",
        }
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        loss_value(self, z)
    }

    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.len(), "loss gradient: dimension mismatch");
        match self {
            LossKind::LeastSquares { b } => z.iter().zip(b).map(|(zi, bi)| zi - bi).collect(),
            LossKind::Logistic { labels } => z
                .iter()
                .zip(labels)
                .map(|(&zi, &l)| -l * sigmoid(-l * zi))
                .collect(),
        }
    }

    /// Bregman divergence `f(z) − f(p) − ⟨∇f(p), z − p⟩`, evaluated without
    /// forming the two loss values, so it stays accurate as `z → p`.
    pub fn bregman(&self, z: &[f64], p: &[f64]) -> f64 {
        assert_eq!(z.len(), p.len(), "bregman: dimension mismatch");
        match self {
            LossKind::LeastSquares { .. } => {
                0.5 * z.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            }
            LossKind::Logistic { labels } => z
                .iter()
                .zip(p)
                .zip(labels)
                .map(|((&zi, &pi), &l)| softplus_bregman(-l * zi, -l * pi))
                .sum(),
        }
    }
}

/// `softplus(t1) − softplus(t2) − σ(t2)(t1 − t2)`.
fn softplus_bregman(t1: f64, t2: f64) -> f64 {
    let d = t1 - t2;
    let s = sigmoid(t2);
    if d.abs() < 1e-3 {
        let g2 = s * (1.0 - s);
        let g3 = g2 * (1.0 - 2.0 * s);
        let g4 = g2 * (1.0 - 6.0 * s + 6.0 * s * s);
        let d2 = d * d;
        return d2 * (g2 / 2.0 + d * (g3 / 6.0 + d * g4 / 24.0));
    }
    let em = d.exp_m1();
    let out = if em.is_finite() {
        (s * em).ln_1p() - s * d
    } else {
        softplus(t1) - softplus(t2) - s * d
    };
    out.max(0.0)
}

pub fn loss_value(kind: &LossKind, z: &[f64]) -> f64 {
    assert_eq!(z.len(), kind.len(), "loss_value: dimension mismatch");
    match kind {
        LossKind::LeastSquares { b } => {
            0.5 * z.iter().zip(b).map(|(zi, bi)| (zi - bi) * (zi - bi)).sum::<f64>()
        }
        LossKind::Logistic { labels } => z
            .iter()
            .zip(labels)
            .map(|(&zi, &l)| softplus(-l * zi))
            .sum(),
    }
}

/// Scalar logistic prox: root of `p − v − αb/(1 + exp(bp))` on the bracket
/// `[v − α, v + α]`, safeguarded Newton with bisection fallback.
fn logistic_prox_scalar(v: f64, label: f64, alpha: f64) -> f64 {
    let g = |p: f64| p - v - alpha * label * sigmoid(-label * p);
    let (mut lo, mut hi) = (v - alpha, v + alpha);
    let mut p = v;
    let mut prev_step = hi - lo;
    for _ in 0..200 {
        let gp = g(p);
        if gp.abs() <= 1e-12 {
            return p;
        }
        if gp > 0.0 {
            hi = p;
        } else {
            lo = p;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        let s = sigmoid(-label * p);
        let dg = 1.0 + alpha * s * (1.0 - s);
        let newton = p - gp / dg;
        // Newton can cycle across the sigmoid's knee when alpha is large;
        // fall back to bisection unless the step at least halves
        let next = if newton > lo && newton < hi && (newton - p).abs() <= 0.5 * prev_step {
            newton
        } else {
            0.5 * (lo + hi)
        };
        prev_step = (next - p).abs();
        p = next;
    }
    p
}

/// `Prox_{αf}(v)`.
pub fn loss_prox(kind: &LossKind, v: &[f64], alpha: f64) -> Vec<f64> {
    assert!(alpha > 0.0, "loss_prox: alpha must be positive");
    assert_eq!(v.len(), kind.len(), "loss_prox: dimension mismatch");
    match kind {
        LossKind::LeastSquares { b } => v
            .iter()
            .zip(b)
            .map(|(&vi, &bi)| (vi + alpha * bi) / (1.0 + alpha))
            .collect(),
        LossKind::Logistic { labels } => v
            .iter()
            .zip(labels)
            .map(|(&vi, &l)| logistic_prox_scalar(vi, l, alpha))
            .collect(),
    }
}

/// Jacobian of `Prox_{αf}` at `v`: `I/(1+α)` for least squares, and
/// `1/(1 + α f''(p_i))` on the diagonal for logistic, with `p = Prox_{αf}(v)`.
pub fn loss_prox_jacobian(kind: &LossKind, v: &[f64], alpha: f64) -> ProxJacobianRep {
    match kind {
        LossKind::LeastSquares { .. } => ProxJacobianRep::ScaledIdentity(1.0 / (1.0 + alpha)),
        LossKind::Logistic { labels } => {
            let p = loss_prox(kind, v, alpha);
            ProxJacobianRep::Diagonal(jacobian_at_prox(&p, labels, alpha))
        }
    }
}

/// Logistic prox Jacobian given the prox point itself.
pub(crate) fn jacobian_at_prox(p: &[f64], labels: &[f64], alpha: f64) -> Vec<f64> {
    p.iter()
        .zip(labels)
        .map(|(&pi, &l)| {
            let s = sigmoid(-l * pi);
            1.0 / (1.0 + alpha * s * (1.0 - s))
        })
        .collect()
}

/// `E_{αf}(v) = αf(p) + ½‖p − v‖²` at `p = Prox_{αf}(v)`.
pub fn moreau_envelope(kind: &LossKind, v: &[f64], alpha: f64) -> f64 {
    let p = loss_prox(kind, v, alpha);
    alpha * loss_value(kind, &p) + 0.5 * p.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}
