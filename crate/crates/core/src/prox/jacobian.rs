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

use nalgebra::DMatrix;

use super::{ConstraintSpec, IndexPartition, ProxResult};
use crate::error::{Error, Result};

/// Classifies every index by `r_i = x_i − wμ_i` against `λ`.
///
/// `|r_i|` within `tol·(1 + |x_i| + |w||μ_i|)` of `λ` lands in `β₊`/`β₋`.
pub fn classify_indices(x: &[f64], w: f64, spec: &ConstraintSpec, tol: f64) -> IndexPartition {
    assert_eq!(x.len(), spec.len(), "classify_indices: x and mu lengths differ");
    let lambda = spec.lambda();
    let mut p = IndexPartition::default();
    for (i, (&xi, &m)) in x.iter().zip(spec.mu()).enumerate() {
        let r = xi - w * m;
        let band = tol * (1.0 + xi.abs() + (w * m).abs());
        if (r.abs() - lambda).abs() <= band {
            if r >= 0.0 {
                p.beta_plus.push(i);
            } else {
                p.beta_minus.push(i);
            }
        } else if r > lambda {
            p.alpha_plus.push(i);
        } else if r < -lambda {
            p.alpha_minus.push(i);
        } else {
            p.gamma.push(i);
        }
    }
    p
}

/// An element `N = Diag(u) − μ̃μ̃ᵀ/s` of the B-subdifferential of the prox,
/// stored structurally: the mask `u`, the masked normal `μ̃ = Diag(u)μ` and
/// `s = ‖μ̃‖²`. `s = 0` means there is no rank-one term.
///
/// `N` is an orthogonal projection and annihilates `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BsubElement {
    mask: Vec<bool>,
    mu_masked: Vec<f64>,
    s: f64,
}

impl BsubElement {
    pub fn zero(n: usize) -> Self {
        Self {
            mask: vec![false; n],
            mu_masked: vec![0.0; n],
            s: 0.0,
        }
    }

    fn from_mask(mask: Vec<bool>, mu: &[f64]) -> Self {
        let mu_masked: Vec<f64> = mask
            .iter()
            .zip(mu)
            .map(|(&u, &m)| if u { m } else { 0.0 })
            .collect();
        let s = mu_masked.iter().map(|m| m * m).sum();
        Self { mask, mu_masked, s }
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn mu_masked(&self) -> &[f64] {
        &self.mu_masked
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Indices with `u_i = 1` (the set `K` in the Newton system).
    pub fn support(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &u)| u.then_some(i))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        !self.mask.iter().any(|&u| u)
    }

    /// Dense `n × n` matrix; tests and small problems only.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            if self.mask[i] {
                out[(i, i)] = 1.0;
            }
        }
        if self.s > 0.0 {
            for j in 0..n {
                for i in 0..n {
                    out[(i, j)] -= self.mu_masked[i] * self.mu_masked[j] / self.s;
                }
            }
        }
        out
    }
}

/// Builds `Diag(u) − μ̃μ̃ᵀ/s` with `u` the indicator of
/// `α ∪ β₊′ ∪ β₋′`. Selections must be subsets of the partition's β sets.
///
/// On the degenerate `c = 0` branch the constrained block is the zero
/// operator and the partition is not consulted for it; coordinates with
/// `μ_i = 0` keep their soft-threshold derivative in every case.
pub fn bsub_element(
    result: &ProxResult,
    spec: &ConstraintSpec,
    beta_plus_sel: &[usize],
    beta_minus_sel: &[usize],
) -> Result<BsubElement> {
    let n = spec.len();
    assert_eq!(result.z.len(), n, "bsub_element: result and mu lengths differ");
    let part = &result.partition;
    for &i in beta_plus_sel {
        if part.beta_plus.binary_search(&i).is_err() {
            return Err(Error::InvalidSelection {
                index: i,
                set: "beta_plus",
            });
        }
    }
    for &i in beta_minus_sel {
        if part.beta_minus.binary_search(&i).is_err() {
            return Err(Error::InvalidSelection {
                index: i,
                set: "beta_minus",
            });
        }
    }

    // λ = 0: the prox is the (linear) hyperplane projection.
    if spec.lambda() == 0.0 {
        return Ok(BsubElement::from_mask(vec![true; n], spec.mu()));
    }

    let mu = spec.mu();
    let mut mask = vec![false; n];
    let selected = part
        .alpha_plus
        .iter()
        .chain(&part.alpha_minus)
        .chain(beta_plus_sel)
        .chain(beta_minus_sel);
    for &i in selected {
        if !result.degenerate_zero || mu[i] == 0.0 {
            mask[i] = true;
        }
    }
    Ok(BsubElement::from_mask(mask, mu))
}

/// The element with empty β selections (`S = α`): sparsest mask.
pub fn canonical_bsub(result: &ProxResult, spec: &ConstraintSpec) -> BsubElement {
    bsub_element(result, spec, &[], &[]).expect("empty selections are always valid")
}

/// `Diag(u)v − (μ̃ᵀv / s) μ̃` in `O(n)`.
pub fn apply_bsub(elem: &BsubElement, v: &[f64]) -> Vec<f64> {
    assert_eq!(elem.len(), v.len(), "apply_bsub: dimension mismatch");
    let coef = if elem.s > 0.0 {
        super::dot(&elem.mu_masked, v) / elem.s
    } else {
        0.0
    };
    elem.mask
        .iter()
        .zip(v)
        .zip(&elem.mu_masked)
        .map(|((&u, &vi), &m)| if u { vi - coef * m } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::prox_affine_l1;

    fn spec(mu: &[f64], c: f64, lambda: f64) -> ConstraintSpec {
        ConstraintSpec::new(mu.to_vec(), c, lambda).unwrap()
    }

    #[test]
    fn classify_examples() {
        let s = spec(&[1.0, 1.0, 1.0], 1.0, 0.1);
        let p = classify_indices(&[1.1, 0.1, 0.0], 0.0, &s, 1e-12);
        assert_eq!(p.alpha_plus, vec![0]);
        assert_eq!(p.beta_plus, vec![1]);
        assert_eq!(p.gamma, vec![2]);
        assert!(p.alpha_minus.is_empty() && p.beta_minus.is_empty());

        let s = spec(&[1.0, 1.0], 1.0, 0.1);
        let p = classify_indices(&[2.0, 0.0], 0.5, &s, 1e-12);
        assert_eq!(p.alpha_plus, vec![0]);
        assert_eq!(p.alpha_minus, vec![1]);
        assert!(p.beta().is_empty() && p.gamma.is_empty());

        let p = classify_indices(&[0.01, -0.02], 0.0, &s, 1e-12);
        assert_eq!(p.gamma, vec![0, 1]);
    }

    #[test]
    fn canonical_element_two_coordinates() {
        let s = spec(&[1.0, 1.0], 1.0, 0.1);
        let r = prox_affine_l1(&[2.0, 0.0], &s);
        let e = canonical_bsub(&r, &s);
        assert_eq!(e.mask(), &[true, true]);
        assert_eq!(e.s(), 2.0);
        let d = e.to_dense();
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!((d - expected).abs().max() < 1e-15);
    }

    #[test]
    fn beta_selection_element() {
        let s = spec(&[1.0, 1.0, 1.0], 1.0, 0.1);
        let r = prox_affine_l1(&[1.1, 0.1, 0.0], &s);
        assert_eq!(r.partition.beta_plus, vec![1]);
        let e = bsub_element(&r, &s, &[1], &[]).unwrap();
        assert_eq!(e.mask(), &[true, true, false]);
        assert_eq!(e.s(), 2.0);
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[0.5, -0.5, 0.0, -0.5, 0.5, 0.0, 0.0, 0.0, 0.0],
        );
        assert!((e.to_dense() - expected).abs().max() < 1e-15);
    }

    #[test]
    fn rejects_selection_outside_beta() {
        let s = spec(&[1.0, 1.0, 1.0], 1.0, 0.1);
        let r = prox_affine_l1(&[1.1, 0.1, 0.0], &s);
        assert!(matches!(
            bsub_element(&r, &s, &[2], &[]),
            Err(Error::InvalidSelection { index: 2, .. })
        ));
        assert!(bsub_element(&r, &s, &[], &[1]).is_err());
    }

    #[test]
    fn degenerate_branch_gives_zero_operator() {
        let s = spec(&[1.0, 1.0], 0.0, 1.0);
        let r = prox_affine_l1(&[0.5, -0.5], &s);
        let e = canonical_bsub(&r, &s);
        assert!(e.is_zero());
        assert_eq!(apply_bsub(&e, &[3.0, -1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn apply_matches_projection_examples() {
        let s = spec(&[1.0, 1.0], 1.0, 0.1);
        let e = canonical_bsub(&prox_affine_l1(&[2.0, 0.0], &s), &s);
        assert_eq!(apply_bsub(&e, &[1.0, 1.0]), vec![0.0, 0.0]);
        assert_eq!(apply_bsub(&e, &[1.0, -1.0]), vec![1.0, -1.0]);
        assert_eq!(
            apply_bsub(&BsubElement::zero(3), &[1.0, 2.0, 3.0]),
            vec![0.0; 3]
        );
    }

    #[test]
    fn lambda_zero_element_is_full_projection() {
        let s = spec(&[1.0, 2.0], 0.5, 0.0);
        let e = canonical_bsub(&prox_affine_l1(&[0.3, 0.4], &s), &s);
        assert_eq!(e.support(), vec![0, 1]);
        assert_eq!(e.s(), 5.0);
    }
}
