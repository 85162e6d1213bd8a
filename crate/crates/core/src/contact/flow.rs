//! Lifted Hamiltonian flows on R^{2n} with their Jacobians.
//!
//! The vector field is `X_t(z) = pi * beta(t) * i * grad H(z)`. The factor `pi`
//! is the time calibration: with `h = 1` the lift is `H = |z|^2`, so
//! `X(z) = 2 pi i z` and the time-`t` map is `z -> e^{2 pi i t} z`. Time is
//! therefore measured in Hopf circles. Because `H` is homogeneous of degree 2,
//! `X` is homogeneous of degree 1 and every RK4 stage commutes with positive
//! scaling, so the discrete flow is exactly R+-equivariant.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use super::hamiltonian::{ContactHamiltonianSpec, JetScratch};
use crate::error::{Error, Result};
use crate::linsymp::{mul_i, ComplexVector2n};
use crate::sampling::sphere_points;

/// Multiplies `i grad H` so that `h = 1` integrates to `e^{2 pi i t}`.
pub const TIME_CALIBRATION: f64 = PI;

const MAX_STEPS_PER_UNIT: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSettings {
    /// RK4 steps per unit of time; a window `[t0, t1]` uses
    /// `ceil(steps_per_unit * (t1 - t0))` steps.
    pub steps_per_unit: usize,
    /// Relative floor on `|z(t)| / |z(t0)|`.
    pub norm_floor: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            steps_per_unit: 2048,
            norm_floor: 1e-8,
        }
    }
}

impl IntegratorSettings {
    /// Halves the step until two successive resolutions agree to `tol` on a
    /// fixed sample of sphere points over `[0, 1]`, and returns the finer one.
    pub fn calibrate(spec: &ContactHamiltonianSpec, tol: f64) -> Result<Self> {
        spec.validate()?;
        let samples = sphere_points(spec.n, 8);
        let mut steps = 64;
        loop {
            let coarse = Self {
                steps_per_unit: steps,
                ..Self::default()
            };
            let fine = Self {
                steps_per_unit: 2 * steps,
                ..Self::default()
            };
            let mut diff: f64 = 0.0;
            for q in &samples {
                let a = flow_point(spec, q, 0.0, 1.0, &coarse)?;
                let b = flow_point(spec, q, 0.0, 1.0, &fine)?;
                diff = diff.max((a - b).amax());
            }
            if diff <= tol {
                return Ok(fine);
            }
            steps *= 2;
            if steps > MAX_STEPS_PER_UNIT {
                return Err(Error::StepUnderflow(format!(
                    "no agreement to {tol:e} with {steps} steps per unit time (last difference {diff:e})"
                )));
            }
        }
    }
}

/// End point and Jacobian of the lifted flow over `[t0, t1]`.
#[derive(Clone, Debug)]
pub struct FlowResult {
    pub point: DVector<f64>,
    pub jacobian: DMatrix<f64>,
}

/// Integrates `z' = X_t(z)` together with the variational equation.
pub fn integrate_flow(
    spec: &ContactHamiltonianSpec,
    z0: &ComplexVector2n,
    t0: f64,
    t1: f64,
    settings: &IntegratorSettings,
) -> Result<FlowResult> {
    if z0.coords().len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: z0.coords().len(),
        });
    }
    let (point, jacobian) = flow_with_jacobian(spec, z0.coords(), t0, t1, settings)?;
    Ok(FlowResult { point, jacobian })
}

pub(crate) fn flow_point(
    spec: &ContactHamiltonianSpec,
    z0: &DVector<f64>,
    t0: f64,
    t1: f64,
    settings: &IntegratorSettings,
) -> Result<DVector<f64>> {
    Rk4::new(spec, false).run(z0, t0, t1, settings).map(|(z, _)| z)
}

pub(crate) fn flow_with_jacobian(
    spec: &ContactHamiltonianSpec,
    z0: &DVector<f64>,
    t0: f64,
    t1: f64,
    settings: &IntegratorSettings,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    Rk4::new(spec, true)
        .run(z0, t0, t1, settings)
        .map(|(z, y)| (z, y.expect("jacobian requested")))
}

/// Fixed-step RK4 with preallocated stage buffers.
struct Rk4<'a> {
    spec: &'a ContactHamiltonianSpec,
    with_jac: bool,
    dim: usize,
    scratch: JetScratch,
    grad: Vec<f64>,
    hess: Vec<f64>,
    a: Vec<f64>,
    kz: [Vec<f64>; 4],
    ky: [Vec<f64>; 4],
    tz: Vec<f64>,
    ty: Vec<f64>,
}

impl<'a> Rk4<'a> {
    fn new(spec: &'a ContactHamiltonianSpec, with_jac: bool) -> Self {
        let dim = spec.dim();
        let yl = if with_jac { dim * dim } else { 0 };
        Self {
            spec,
            with_jac,
            dim,
            scratch: JetScratch::new(spec),
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
            a: vec![0.0; dim * dim],
            kz: std::array::from_fn(|_| vec![0.0; dim]),
            ky: std::array::from_fn(|_| vec![0.0; yl]),
            tz: vec![0.0; dim],
            ty: vec![0.0; yl],
        }
    }

    /// Stage `k`: derivative at `(tz, ty)` and time `t`.
    fn stage(&mut self, k: usize, t: f64) {
        let dim = self.dim;
        let n = dim / 2;
        let scale = TIME_CALIBRATION * self.spec.time_profile.factor(t);
        let hess = if self.with_jac {
            Some(self.hess.as_mut_slice())
        } else {
            None
        };
        self.spec.jet_into(&self.tz, &mut self.scratch, &mut self.grad, hess);
        let kz = &mut self.kz[k];
        for r in 0..n {
            kz[r] = -scale * self.grad[n + r];
            kz[n + r] = scale * self.grad[r];
        }
        if !self.with_jac {
            return;
        }
        // A = scale * i * Hess, stored row-major.
        for c in 0..dim {
            for r in 0..n {
                self.a[r * dim + c] = -scale * self.hess[(n + r) * dim + c];
                self.a[(n + r) * dim + c] = scale * self.hess[r * dim + c];
            }
        }
        // ky = A * ty, both dim x dim, ty column-major.
        let ky = &mut self.ky[k];
        for col in 0..dim {
            let ycol = &self.ty[col * dim..(col + 1) * dim];
            for r in 0..dim {
                let arow = &self.a[r * dim..(r + 1) * dim];
                let mut acc = 0.0;
                for m in 0..dim {
                    acc += arow[m] * ycol[m];
                }
                ky[col * dim + r] = acc;
            }
        }
    }

    fn run(
        mut self,
        z0: &DVector<f64>,
        t0: f64,
        t1: f64,
        settings: &IntegratorSettings,
    ) -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
        let dim = self.dim;
        if z0.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: z0.len(),
            });
        }
        if !(t0 <= t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidArgument(format!("need t0 <= t1, got [{t0}, {t1}]")));
        }
        let norm0 = z0.norm();
        if norm0 == 0.0 {
            return Err(Error::ConeTip);
        }
        if !norm0.is_finite() {
            return Err(Error::NonFinite("flow start point"));
        }
        if settings.steps_per_unit == 0 || settings.steps_per_unit > MAX_STEPS_PER_UNIT {
            return Err(Error::StepUnderflow(format!(
                "steps_per_unit = {} outside (0, {MAX_STEPS_PER_UNIT}]",
                settings.steps_per_unit
            )));
        }
        let mut z: Vec<f64> = z0.iter().copied().collect();
        let mut y: Vec<f64> = if self.with_jac {
            DMatrix::<f64>::identity(dim, dim).as_slice().to_vec()
        } else {
            Vec::new()
        };
        let span = t1 - t0;
        let steps = if span == 0.0 {
            0
        } else {
            ((settings.steps_per_unit as f64 * span).ceil() as usize).max(1)
        };
        if steps > 0 && span / steps as f64 == 0.0 {
            return Err(Error::StepUnderflow(format!("step of window [{t0}, {t1}] underflows")));
        }
        let h = if steps > 0 { span / steps as f64 } else { 0.0 };
        let floor = settings.norm_floor * norm0;

        for s in 0..steps {
            let t = t0 + s as f64 * h;
            let offsets = [0.0, 0.5 * h, 0.5 * h, h];
            for k in 0..4 {
                if k == 0 {
                    self.tz.copy_from_slice(&z);
                    if self.with_jac {
                        self.ty.copy_from_slice(&y);
                    }
                } else {
                    let c = offsets[k];
                    for i in 0..dim {
                        self.tz[i] = z[i] + c * self.kz[k - 1][i];
                    }
                    if self.with_jac {
                        for i in 0..dim * dim {
                            self.ty[i] = y[i] + c * self.ky[k - 1][i];
                        }
                    }
                }
                self.stage(k, t + offsets[k]);
            }
            for i in 0..dim {
                z[i] += h / 6.0
                    * (self.kz[0][i] + 2.0 * self.kz[1][i] + 2.0 * self.kz[2][i] + self.kz[3][i]);
            }
            if self.with_jac {
                for i in 0..dim * dim {
                    y[i] += h / 6.0
                        * (self.ky[0][i] + 2.0 * self.ky[1][i] + 2.0 * self.ky[2][i] + self.ky[3][i]);
                }
            }
            let norm: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() {
                return Err(Error::NonFinite("flow trajectory"));
            }
            if norm < floor {
                return Err(Error::NormCollapse { norm, floor });
            }
        }
        let jac = self.with_jac.then(|| DMatrix::from_vec(dim, dim, y));
        Ok((DVector::from_vec(z), jac))
    }
}

/// The lifted time-`[t_start, t_end]` map of a contact Hamiltonian.
#[derive(Clone, Debug)]
pub struct FlowMap {
    spec: Arc<ContactHamiltonianSpec>,
    t_start: f64,
    t_end: f64,
    settings: IntegratorSettings,
}

impl FlowMap {
    pub fn new(
        spec: Arc<ContactHamiltonianSpec>,
        t_start: f64,
        t_end: f64,
        settings: IntegratorSettings,
    ) -> Result<Self> {
        spec.validate()?;
        if !(t_start <= t_end) {
            return Err(Error::InvalidArgument(format!(
                "need t_start <= t_end, got [{t_start}, {t_end}]"
            )));
        }
        Ok(Self {
            spec,
            t_start,
            t_end,
            settings,
        })
    }

    pub fn spec(&self) -> &Arc<ContactHamiltonianSpec> {
        &self.spec
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    pub fn settings(&self) -> &IntegratorSettings {
        &self.settings
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn is_identity(&self) -> bool {
        self.t_start == self.t_end
    }

    pub fn apply(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        if self.is_identity() {
            return Ok(z.clone());
        }
        flow_point(&self.spec, z, self.t_start, self.t_end, &self.settings)
    }

    pub fn apply_with_jacobian(&self, z: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        if self.is_identity() {
            return Ok((z.clone(), DMatrix::identity(z.len(), z.len())));
        }
        flow_with_jacobian(&self.spec, z, self.t_start, self.t_end, &self.settings)
    }
}

/// `g(q) = -2 log |Phi_{t1}(q)|`, from `phi^* alpha = e^g alpha` and the lift
/// `Phi(z) = |z| e^{-g/2} phi(z/|z|)`.
pub fn conformal_factor(
    spec: &ContactHamiltonianSpec,
    q: &ComplexVector2n,
    t1: f64,
    settings: &IntegratorSettings,
) -> Result<f64> {
    check_unit(q)?;
    let z = flow_point(spec, q.coords(), 0.0, t1, settings)?;
    Ok(-2.0 * z.norm().ln())
}

/// Conformal factor read off the pullback of `alpha` on the Reeb direction:
/// `g(q) = log alpha_{phi(q)}(D phi(q) iq)`, computed from the lifted map as
/// `log(<i Phi(q), D Phi(q) iq> / |Phi(q)|^2)`.
pub fn conformal_factor_pullback(
    spec: &ContactHamiltonianSpec,
    q: &ComplexVector2n,
    t1: f64,
    settings: &IntegratorSettings,
) -> Result<f64> {
    check_unit(q)?;
    let (z, jac) = flow_with_jacobian(spec, q.coords(), 0.0, t1, settings)?;
    let push = jac * mul_i(q.coords());
    let pairing = mul_i(&z).dot(&push);
    Ok((pairing / z.norm_squared()).ln())
}

fn check_unit(q: &ComplexVector2n) -> Result<()> {
    let norm = q.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("expected a unit vector, |q| = {norm}")));
    }
    Ok(())
}
