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

#![allow(dead_code)]

use affine_l1::{ConstraintSpec, IndexPartition, LossKind, Problem};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// entries ±U[0.5, 2]
pub fn signed_mu(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let v = rng.random_range(0.5..2.0);
            if rng.random_bool(0.5) {
                v
            } else {
                -v
            }
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A point whose index partition has a nonempty β, built from exactly
/// representable values so that `x_i − wμ_i` hits `±λ` with no rounding.
#[derive(Debug, Clone)]
pub struct BetaInstance {
    pub x: Vec<f64>,
    pub spec: ConstraintSpec,
    pub w: f64,
    pub partition: IndexPartition,
}

pub fn beta_instance(rng: &mut ChaCha8Rng) -> BetaInstance {
    const MUS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];
    const WS: [f64; 4] = [-1.0, -0.5, 0.5, 1.0];
    loop {
        let n = rng.random_range(3..=8);
        let lambda = if rng.random_bool(0.5) { 0.5 } else { 1.0 };
        let w = WS[rng.random_range(0..4)];
        let mut kinds: Vec<u8> = vec![0, 1];
        kinds.extend((2..n).map(|_| rng.random_range(0..3u8)));
        kinds.shuffle(rng);
        let mut mu = Vec::with_capacity(n);
        let mut x = Vec::with_capacity(n);
        let mut part = IndexPartition::default();
        let mut c = 0.0;
        for (i, &k) in kinds.iter().enumerate() {
            let m = MUS[rng.random_range(0..4)] * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let r = match k {
                0 => sign * (lambda + [0.25, 0.5, 1.0][rng.random_range(0..3)]),
                1 => sign * lambda,
                _ => sign * lambda * [0.0, 0.25, 0.5][rng.random_range(0..3)],
            };
            match (k, sign > 0.0) {
                (0, true) => part.alpha_plus.push(i),
                (0, false) => part.alpha_minus.push(i),
                (1, true) => part.beta_plus.push(i),
                (1, false) => part.beta_minus.push(i),
                _ => part.gamma.push(i),
            }
            if k == 0 {
                c += m * (r - sign * lambda);
            }
            mu.push(m);
            x.push(w * m + r);
        }
        if c == 0.0 {
            continue;
        }
        let spec = ConstraintSpec::new(mu, c, lambda).unwrap();
        return BetaInstance {
            x,
            spec,
            w,
            partition: part,
        };
    }
}

/// Direction along which the chosen β indices enter α (selected) or γ
/// (unselected) while the multiplier stays fixed.
pub fn beta_direction(
    inst: &BetaInstance,
    beta_plus_sel: &[usize],
    beta_minus_sel: &[usize],
) -> Vec<f64> {
    let mu = inst.spec.mu();
    let lambda = inst.spec.lambda();
    let p = &inst.partition;
    let alpha = p.alpha();
    let sgn = |i: usize| mu[i].signum();
    let shift = lambda
        * (beta_minus_sel.iter().map(|&i| sgn(i)).sum::<f64>()
            - beta_plus_sel.iter().map(|&i| sgn(i)).sum::<f64>());
    let mut d = vec![0.0; mu.len()];
    for &i in &alpha {
        d[i] = shift / (alpha.len() as f64 * mu[i]);
    }
    for &i in &p.beta_plus {
        let sel = beta_plus_sel.contains(&i);
        d[i] = if sel { lambda / mu[i].abs() } else { -lambda / mu[i].abs() };
    }
    for &i in &p.beta_minus {
        let sel = beta_minus_sel.contains(&i);
        d[i] = if sel { -lambda / mu[i].abs() } else { lambda / mu[i].abs() };
    }
    d
}

/// Least squares with `μ = e`: Gaussian design, sparse truth with
/// `eᵀx = c`, small noise.
pub fn least_squares_problem(rng: &mut ChaCha8Rng, m: usize, n: usize, c: f64) -> Problem {
    let a = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let truth = sparse_truth(rng, n, c);
    let ax = &a * nalgebra::DVector::from_vec(truth);
    let b = ax.iter().map(|v| v + 0.1 * rng.sample::<f64, _>(StandardNormal)).collect();
    Problem::new(a, LossKind::least_squares(b), vec![1.0; n], c).unwrap()
}

pub fn logistic_problem(rng: &mut ChaCha8Rng, m: usize, n: usize, c: f64) -> Problem {
    let a = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let truth = sparse_truth(rng, n, c);
    let ax = &a * nalgebra::DVector::from_vec(truth);
    let labels = ax
        .iter()
        .map(|v| {
            let noisy = v + 0.5 * rng.sample::<f64, _>(StandardNormal);
            if noisy >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    Problem::new(a, LossKind::logistic(labels).unwrap(), vec![1.0; n], c).unwrap()
}

fn sparse_truth(rng: &mut ChaCha8Rng, n: usize, c: f64) -> Vec<f64> {
    let k = (n / 10).max(2);
    let mut x = vec![0.0; n];
    let idx: Vec<usize> = rand::seq::index::sample(rng, n, k).into_vec();
    for &i in &idx {
        x[i] = rng.sample::<f64, _>(StandardNormal);
    }
    let shift = (c - x.iter().sum::<f64>()) / k as f64;
    for &i in &idx {
        x[i] += shift;
    }
    x
}

/// `k` random subspaces of dimension `d` in `R^m`, `n` points in total,
/// unit-norm columns with a little noise.
pub fn union_of_subspaces(rng: &mut ChaCha8Rng, m: usize, n: usize, k: usize, d: usize) -> DMatrix<f64> {
    let bases: Vec<DMatrix<f64>> = (0..k)
        .map(|_| {
            let g = DMatrix::from_fn(m, d, |_, _| rng.sample::<f64, _>(StandardNormal));
            g.qr().q()
        })
        .collect();
    let mut a = DMatrix::zeros(m, n);
    for j in 0..n {
        let coef = nalgebra::DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut col = &bases[j % k] * coef;
        for v in col.iter_mut() {
            *v += 0.01 * rng.sample::<f64, _>(StandardNormal);
        }
        let nrm = col.norm();
        a.set_column(j, &(col / nrm));
    }
    a
}
