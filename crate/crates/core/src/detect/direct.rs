//! Newton on `e^{-2 pi i t} Phi(q) = q`, `|q| = 1`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::f64::consts::PI;

use super::classify::classify_linearization;
use super::{dedup_records, starting_translations, unrotate, wrap_t, DetectionConfig, Route, TranslatedPointRecord};
use crate::contact::{flow_point, flow_with_jacobian, ContactHamiltonianSpec};
use crate::error::Result;
use crate::linsymp::{mul_i, ComplexVector2n};
use crate::sampling::antipodal_sphere_points;

/// Largest Newton step accepted in `q` and in `t`.
pub(crate) const MAX_STEP_Q: f64 = 0.3;
pub(crate) const MAX_STEP_T: f64 = 0.05;

/// Multistart Newton over antipodally closed sphere seeds and the t grid.
/// Starts that do not converge are dropped.
pub fn direct_translated_points(
    spec: &ContactHamiltonianSpec,
    cfg: &DetectionConfig,
) -> Result<Vec<TranslatedPointRecord>> {
    spec.validate()?;
    cfg.validate()?;
    let seeds = antipodal_sphere_points(spec.n, cfg.seeds / 2);
    let per_seed: Vec<Vec<TranslatedPointRecord>> = seeds
        .par_iter()
        .map(|q| {
            let Ok(image) = flow_point(spec, q, 0.0, 1.0, &cfg.integrator) else {
                return Vec::new();
            };
            starting_translations(q, &image, cfg)
                .into_iter()
                .filter_map(|t| refine(spec, q, t, cfg))
                .collect()
        })
        .collect();
    Ok(dedup_records(per_seed.into_iter().flatten().collect(), cfg))
}

fn refine(
    spec: &ContactHamiltonianSpec,
    q0: &DVector<f64>,
    t0: f64,
    cfg: &DetectionConfig,
) -> Option<TranslatedPointRecord> {
    let dim = q0.len();
    let mut q = q0.clone();
    let mut t = t0;
    for _ in 0..cfg.max_newton_iter {
        let (image, jac) = flow_with_jacobian(spec, &q, 0.0, 1.0, &cfg.integrator).ok()?;
        let rotated = unrotate(&image, t);
        let g = &rotated - &q;
        if g.norm() <= cfg.newton_tol {
            return record_at(spec, &q, t, cfg, Route::Direct).ok();
        }
        // Bordered system in (dq, dt) with the tangency row q . dq = 0.
        let mut a = DMatrix::zeros(dim + 1, dim + 1);
        let rjac = crate::linsymp::phase_matrix(dim / 2, -2.0 * PI * t) * &jac;
        a.view_mut((0, 0), (dim, dim))
            .copy_from(&(rjac - DMatrix::<f64>::identity(dim, dim)));
        a.view_mut((0, dim), (dim, 1)).copy_from(&(mul_i(&rotated) * (-2.0 * PI)));
        a.view_mut((dim, 0), (1, dim)).copy_from(&q.transpose());
        let mut rhs = DVector::zeros(dim + 1);
        rhs.rows_mut(0, dim).copy_from(&g);
        let step = pseudo_solve(a, &rhs)?;
        let mut dq = step.rows(0, dim).into_owned();
        let mut dt = step[dim];
        let scale = (dq.norm() / MAX_STEP_Q).max(dt.abs() / MAX_STEP_T).max(1.0);
        dq /= scale;
        dt /= scale;
        q -= dq;
        q /= q.norm();
        t -= dt;
    }
    None
}

/// Minimum-norm least-squares solution; copes with the rank drop at
/// degenerate solutions.
pub(crate) fn pseudo_solve(a: DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = a.svd(true, true);
    let cutoff = 1e-12 * svd.singular_values.max();
    svd.solve(rhs, cutoff).ok()
}

/// Builds a record for a solution `(q, t)`, recomputing both residuals and
/// the classification from a fresh integration.
pub(crate) fn record_at(
    spec: &ContactHamiltonianSpec,
    q: &DVector<f64>,
    t: f64,
    cfg: &DetectionConfig,
    route: Route,
) -> Result<TranslatedPointRecord> {
    let q = q / q.norm();
    let t = wrap_t(t);
    let (image, jac) = flow_with_jacobian(spec, &q, 0.0, 1.0, &cfg.integrator)?;
    let residual_fixed = (unrotate(&image, t) - &q).norm();
    let g_norm = -2.0 * image.norm().ln();
    let pairing = mul_i(&image).dot(&(&jac * mul_i(&q)));
    let g_pullback = (pairing / image.norm_squared()).ln();
    let nondegeneracy = classify_linearization(&jac, &q, t, cfg.nondegeneracy_tol)?;
    Ok(TranslatedPointRecord {
        q: ComplexVector2n::new(q)?,
        t,
        residual_fixed,
        residual_g: g_norm.abs().max(g_pullback.abs()),
        nondegeneracy,
        route,
        critical_value: None,
        inconsistent: false,
    })
}
