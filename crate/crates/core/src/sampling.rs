//! Deterministic low-discrepancy point sets on spheres.
//!
//! Points come from the additive recurrence `frac(0.5 + k * alpha)` with the
//! generalized golden-ratio vector `alpha_j = phi_d^{-(j+1)}`, where `phi_d` is
//! the positive root of `x^{d+1} = x + 1`. Pairs of coordinates are pushed
//! through Box-Muller and the resulting Gaussian vector is normalized, which
//! keeps the set well spread on `S^{d-1}` without rejection.

use nalgebra::DVector;
use std::f64::consts::PI;

fn generalized_golden_ratio(d: usize) -> f64 {
    let mut x: f64 = 2.0;
    for _ in 0..64 {
        x = (1.0 + x).powf(1.0 / (d as f64 + 1.0));
    }
    x
}

/// `count` points of the recurrence in `[0, 1)^dim`.
pub fn unit_cube_points(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let g = generalized_golden_ratio(dim);
    let alpha: Vec<f64> = (0..dim).map(|j| g.powi(-(j as i32 + 1))).collect();
    (1..=count)
        .map(|k| {
            alpha
                .iter()
                .map(|a| (0.5 + k as f64 * a).fract())
                .collect()
        })
        .collect()
}

/// `count` unit vectors in R^{2m}.
pub fn sphere_points(m: usize, count: usize) -> Vec<DVector<f64>> {
    let dim = 2 * m;
    unit_cube_points(dim, count)
        .into_iter()
        .map(|u| {
            let mut v = DVector::zeros(dim);
            for k in 0..m {
                // 1 - u lies in (0, 1], so the log is finite.
                let r = (-2.0 * (1.0 - u[2 * k]).ln()).sqrt();
                let th = 2.0 * PI * u[2 * k + 1];
                v[2 * k] = r * th.cos();
                v[2 * k + 1] = r * th.sin();
            }
            let norm = v.norm();
            if norm > 0.0 {
                v / norm
            } else {
                let mut e = DVector::zeros(dim);
                e[0] = 1.0;
                e
            }
        })
        .collect()
}

/// Like [`sphere_points`] but closed under `q -> -q`: the first half of the
/// output is the base set, the second half its negation in the same order.
pub fn antipodal_sphere_points(m: usize, half_count: usize) -> Vec<DVector<f64>> {
    let base = sphere_points(m, half_count);
    let neg: Vec<_> = base.iter().map(|q| -q).collect();
    base.into_iter().chain(neg).collect()
}
