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

use super::{eval_f, soft, ConstraintSpec};

/// Multiplier `w` with `f(x, w) = c` and the breakpoint region `(lo, hi)`
/// it was found in. Region ends may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierSolution {
    pub w: f64,
    pub region: (f64, f64),
}

/// `E_L = max_i (x_i/μ_i − λ/|μ_i|)`, `E_R = min_i (x_i/μ_i + λ/|μ_i|)` over
/// the coordinates with `μ_i ≠ 0`.
pub fn endpoints(x: &[f64], spec: &ConstraintSpec) -> (f64, f64) {
    assert_eq!(x.len(), spec.len(), "endpoints: x and mu lengths differ");
    let lambda = spec.lambda();
    let mut el = f64::NEG_INFINITY;
    let mut er = f64::INFINITY;
    for (&xi, &m) in x.iter().zip(spec.mu()) {
        if m == 0.0 {
            continue;
        }
        let center = xi / m;
        let half = lambda / m.abs();
        el = el.max(center - half);
        er = er.min(center + half);
    }
    (el, er)
}

/// Root of `w ↦ μᵀ soft(x − wμ, λ) − c`.
///
/// Sorts the `2n` breakpoints `(x_i ± λ)/μ_i`, bisects over them to find the
/// linear region holding the root, then solves the affine equation there:
///
/// `w = (Σ_S μ_i x_i − λ Σ_S μ_i sign(z_i) − c) / Σ_S μ_i²`
///
/// with `S` the active set inside the region. The result is checked against
/// the defining equation and refined by bisection on the region when
/// rounding puts it off. `O(n log n)` overall.
///
/// When `c = 0` and the root is not unique, any root is returned.
pub fn solve_multiplier(x: &[f64], spec: &ConstraintSpec) -> MultiplierSolution {
    assert_eq!(x.len(), spec.len(), "solve_multiplier: x and mu lengths differ");
    let lambda = spec.lambda();
    let c = spec.c();

    let mut breakpoints: Vec<f64> = Vec::with_capacity(2 * x.len());
    for (&xi, &m) in x.iter().zip(spec.mu()) {
        if m != 0.0 {
            breakpoints.push((xi - lambda) / m);
            breakpoints.push((xi + lambda) / m);
        }
    }
    breakpoints.sort_by(f64::total_cmp);

    // Positions 0 and k+1 stand for -inf and +inf; position j maps to
    // breakpoints[j - 1]. Invariant: f(lo) > c >= f(hi).
    let k = breakpoints.len();
    let (mut lo, mut hi) = (0usize, k + 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if eval_f(x, breakpoints[mid - 1], spec) > c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let left = if lo == 0 {
        f64::NEG_INFINITY
    } else {
        breakpoints[lo - 1]
    };
    let right = if hi == k + 1 {
        f64::INFINITY
    } else {
        breakpoints[hi - 1]
    };

    let w = root_in_region(x, spec, left, right);
    MultiplierSolution {
        w,
        region: (left, right),
    }
}

fn interior_point(left: f64, right: f64) -> f64 {
    match (left.is_finite(), right.is_finite()) {
        (true, true) => 0.5 * (left + right),
        (false, true) => right - 1.0,
        (true, false) => left + 1.0,
        (false, false) => 0.0,
    }
}

/// Affine solve using the active set at `probe`; `None` when nothing is
/// active there (f is identically zero around `probe`).
fn affine_solve(x: &[f64], spec: &ConstraintSpec, probe: f64) -> Option<f64> {
    let lambda = spec.lambda();
    let mut num = 0.0;
    let mut den = 0.0;
    for (&xi, &m) in x.iter().zip(spec.mu()) {
        if m == 0.0 {
            continue;
        }
        let z = soft(xi - probe * m, lambda);
        if z != 0.0 {
            num += m * (xi - lambda * z.signum());
            den += m * m;
        }
    }
    (den > 0.0).then(|| (num - spec.c()) / den)
}

fn residual_scale(x: &[f64], spec: &ConstraintSpec, w: f64) -> f64 {
    let lambda = spec.lambda();
    let terms: f64 = x
        .iter()
        .zip(spec.mu())
        .map(|(&xi, &m)| m.abs() * (xi.abs() + (w * m).abs() + lambda))
        .sum();
    64.0 * f64::EPSILON * (1.0 + spec.c().abs() + terms)
}

fn root_in_region(x: &[f64], spec: &ConstraintSpec, left: f64, right: f64) -> f64 {
    let c = spec.c();
    let probe = interior_point(left, right);
    let Some(w) = affine_solve(x, spec, probe) else {
        return probe;
    };
    let res = (eval_f(x, w, spec) - c).abs();
    if res <= residual_scale(x, spec, w) {
        return w;
    }

    // Fallback: plain bisection on a finite bracket f(a) >= c >= f(b).
    let (mut a, mut b) = (left, right);
    let anchor = if w.is_finite() { w } else { probe };
    let mut step = 1.0;
    if !a.is_finite() {
        a = b.min(anchor) - step;
        while eval_f(x, a, spec) < c {
            step *= 2.0;
            a -= step;
        }
    }
    step = 1.0;
    if !b.is_finite() {
        b = a.max(anchor) + step;
        while eval_f(x, b, spec) > c {
            step *= 2.0;
            b += step;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if eval_f(x, mid, spec) > c {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (res, w);
    for cand in [Some(mid), affine_solve(x, spec, mid)].into_iter().flatten() {
        let r = (eval_f(x, cand, spec) - c).abs();
        if r < best.0 {
            best = (r, cand);
        }
    }
    best.1
}
