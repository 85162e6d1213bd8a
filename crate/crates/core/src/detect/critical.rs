//! Critical rays of the generating family of `a_t o Phi`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::sync::Arc;

use super::direct::{pseudo_solve, record_at, MAX_STEP_T};
use super::{dedup_records, starting_translations, DetectionConfig, Route, TranslatedPointRecord};
use crate::contact::{subdivide_c1_small, ContactHamiltonianSpec, FlowMap};
use crate::error::{Error, Result};
use crate::genfun::{gf_compose, gf_compose_all, rotation_family_raw, GenFun, Layout};
use crate::sampling::antipodal_sphere_points;

const MAX_STEP_X: f64 = 0.3;

/// `t -> F_t = F # A_t`, where `F` generates the time-1 lifted map `Phi` and
/// `A_t` generates `a_t`, so `F_t` generates `a_t o Phi`. Critical rays of
/// `F_t` lie over base points `q` with `Phi(q) = e^{2 pi i t} q`.
#[derive(Clone, Debug)]
pub struct TranslationFamily {
    spec: Arc<ContactHamiltonianSpec>,
    inner: GenFun,
    k: usize,
    schedule: Vec<(f64, f64)>,
}

impl TranslationFamily {
    /// Subdivides `[0, 1]` into C^1-small pieces and composes their leaves.
    pub fn new(spec: Arc<ContactHamiltonianSpec>, cfg: &DetectionConfig) -> Result<Self> {
        cfg.validate()?;
        let schedule = subdivide_c1_small(&spec, 0.0, 1.0, cfg.delta, &cfg.integrator)?;
        let leaves = schedule
            .iter()
            .map(|&(a, b)| FlowMap::new(spec.clone(), a, b, cfg.integrator).map(GenFun::leaf))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            inner: gf_compose_all(&leaves)?,
            spec,
            k: cfg.rotation_pieces,
            schedule,
        })
    }

    pub fn spec(&self) -> &Arc<ContactHamiltonianSpec> {
        &self.spec
    }

    /// Generating function of the time-1 map.
    pub fn inner(&self) -> &GenFun {
        &self.inner
    }

    pub fn schedule(&self) -> &[(f64, f64)] {
        &self.schedule
    }

    pub fn n(&self) -> usize {
        self.inner.n()
    }

    pub fn total_dim(&self) -> usize {
        self.inner.total_dim() + 4 * self.n() + 4 * self.n() * (self.k - 1)
    }

    /// `F_t`. Accepts `t` slightly outside `[0, 1]`.
    pub fn at(&self, t: f64) -> Result<GenFun> {
        let a = rotation_family_raw(t, self.n(), self.k)?;
        gf_compose(&self.inner, &a.composed)
    }

    fn layout(&self) -> Layout {
        let n = self.n();
        Layout::new(n, self.inner.fiber_dim(), 4 * n * (self.k - 1))
    }

    /// `d/dt grad F_t(x)`. Only the `A_t` factor depends on `t`.
    pub fn grad_t_derivative(&self, x: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        let lay = self.layout();
        let (_, y) = lay.split(x);
        let da: DMatrix<f64> = rotation_family_raw(t, self.n(), self.k)?.t_derivative()?;
        let dy = da * y * 2.0;
        let m = 2 * self.n();
        let mut out = DVector::zeros(x.len());
        for a in 0..m {
            out[lay.v + a] += dy[a];
            out[lay.w + a] += dy[a];
        }
        out.rows_mut(lay.eta, lay.g_fib).copy_from(&dy.rows(m, lay.g_fib));
        Ok(out)
    }

    /// A point on the fiber-critical set of `F_t` over `tau(q, a_t Phi q)`.
    pub fn lift(&self, q: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        Ok(self.at(t)?.lift(q)?.0)
    }

    /// Joint Newton for `grad F_t(x) = 0` on the unit sphere of the total
    /// space, with the bordered system
    /// `[Hess F_t, d/dt grad F_t; x^T, 0] (dx, dt) = (grad F_t, 0)`.
    fn refine(&self, x0: DVector<f64>, t0: f64, cfg: &DetectionConfig) -> Option<(DVector<f64>, f64, f64)> {
        let dim = x0.len();
        let mut x = &x0 / x0.norm();
        let mut t = t0;
        for _ in 0..cfg.max_newton_iter {
            let jet = self.at(t).ok()?.jet(&x, true).ok()?;
            if jet.grad.norm() <= cfg.newton_tol {
                return Some((x, t, jet.value.abs()));
            }
            let mut a = DMatrix::zeros(dim + 1, dim + 1);
            a.view_mut((0, 0), (dim, dim)).copy_from(jet.hess.as_ref()?);
            a.view_mut((0, dim), (dim, 1))
                .copy_from(&self.grad_t_derivative(&x, t).ok()?);
            a.view_mut((dim, 0), (1, dim)).copy_from(&x.transpose());
            let mut rhs = DVector::zeros(dim + 1);
            rhs.rows_mut(0, dim).copy_from(&jet.grad);
            let step = pseudo_solve(a, &rhs)?;
            let mut dx = step.rows(0, dim).into_owned();
            let mut dt = step[dim];
            let scale = (dx.norm() / MAX_STEP_X).max(dt.abs() / MAX_STEP_T).max(1.0);
            dx /= scale;
            dt /= scale;
            x -= dx;
            x /= x.norm();
            t -= dt;
            if !(t.abs() < 0.45 * self.k as f64) {
                return None;
            }
        }
        None
    }
}

/// Critical rays of the family, seeded from lifts of sphere seeds at the best
/// translations of the t grid. Each ray is reduced to its base point and
/// checked against the fixed-point residual; failures are kept and flagged.
pub fn find_critical_rays(
    fam: &TranslationFamily,
    cfg: &DetectionConfig,
) -> Result<Vec<TranslatedPointRecord>> {
    cfg.validate()?;
    let m = 2 * fam.n();
    let seeds = antipodal_sphere_points(fam.n(), cfg.seeds / 2);
    let per_seed: Vec<Result<Vec<TranslatedPointRecord>>> = seeds
        .par_iter()
        .map(|q| {
            let Ok(image) = fam.inner.apply_map(q) else {
                return Ok(Vec::new());
            };
            let mut out = Vec::new();
            for t0 in starting_translations(q, &image, cfg) {
                let Ok(x0) = fam.lift(q, t0) else { continue };
                let Some((x, t, value)) = fam.refine(x0, t0, cfg) else { continue };
                let u = x.rows(0, m).into_owned();
                if u.norm() == 0.0 {
                    continue;
                }
                let mut rec = record_at(&fam.spec, &u, t, cfg, Route::Genfun)?;
                rec.critical_value = Some(value);
                rec.inconsistent = rec.residual_fixed > cfg.residual_tol
                    || rec.residual_g > cfg.residual_tol;
                out.push(rec);
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_seed {
        all.extend(r?);
    }
    if all.iter().any(|r| r.critical_value.is_none_or(|v| !v.is_finite())) {
        return Err(Error::NonFinite("critical value"));
    }
    Ok(dedup_records(all, cfg))
}
