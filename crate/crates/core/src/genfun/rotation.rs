//! Generating quadratic forms of the negative Reeb rotations
//! `a_t(z) = e^{-2 pi i t} z`.

use nalgebra::DMatrix;
use std::f64::consts::PI;

use super::{gf_compose_all, GenFun};
use crate::error::{Error, Result};
use crate::linsymp::QuadraticForm;

/// `Q_t(u) = -tan(pi t) |u|^2`, which generates `a_t` for `|t| < 1/2`.
pub fn quadratic_form_for_rotation(t: f64, n: usize) -> Result<QuadraticForm> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if !(t.abs() < 0.5) {
        return Err(Error::RotationSingular(t.abs()));
    }
    Ok(QuadraticForm::scaled_identity(2 * n, -(PI * t).tan()))
}

/// `A_t`: `k` copies of `Q_{t/k}` composed, generating `a_t` for all
/// `t in [0, 1]` with one fixed total-space dimension `2n + 4n(k-1)`.
#[derive(Clone, Debug)]
pub struct RotationFamily {
    pub t: f64,
    pub n: usize,
    pub k: usize,
    pub composed: GenFun,
    pub form: QuadraticForm,
}

pub fn build_rotation_family(t: f64, n: usize, k: usize) -> Result<RotationFamily> {
    if k < 3 {
        return Err(Error::TooFewPieces(k));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("t must lie in [0, 1], got {t}")));
    }
    rotation_family_raw(t, n, k)
}

/// [`build_rotation_family`] without the range check on `t`, for Newton
/// iterates that step slightly outside `[0, 1]`. Still needs `|t / k| < 1/2`.
pub(crate) fn rotation_family_raw(t: f64, n: usize, k: usize) -> Result<RotationFamily> {
    let piece = GenFun::quadratic(quadratic_form_for_rotation(t / k as f64, n)?)?;
    let composed = gf_compose_all(&vec![piece; k])?;
    let form = composed.flatten_quadratic()?;
    Ok(RotationFamily {
        t,
        n,
        k,
        composed,
        form,
    })
}

impl RotationFamily {
    pub fn total_dim(&self) -> usize {
        self.form.dim()
    }

    /// `d/dt` of the flattened matrix. Only the pieces depend on `t`; the
    /// coupling terms do not.
    pub fn t_derivative(&self) -> Result<DMatrix<f64>> {
        let k = self.k as f64;
        let c = (PI * self.t / k).cos();
        let slope = -(PI / k) / (c * c);
        self.composed
            .flatten_with(&|q: &QuadraticForm| Ok(DMatrix::identity(q.dim(), q.dim()) * slope), 0.0)
    }

    /// The block of the flattened matrix on the fiber coordinates.
    pub fn fiber_block(&self) -> QuadraticForm {
        let m = 2 * self.n;
        let f = self.total_dim() - m;
        QuadraticForm::new(self.form.matrix().view((m, m), (f, f)).into_owned())
            .expect("principal block of a symmetric matrix")
    }
}
