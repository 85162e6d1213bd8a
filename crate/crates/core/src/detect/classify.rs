use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::contact::{flow_with_jacobian, ContactHamiltonianSpec, IntegratorSettings};
use crate::error::{Error, Result};
use crate::linsymp::{phase_matrix, ComplexVector2n};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Degeneracy {
    NonDegenerate,
    Degenerate,
    /// A singular value sits within a factor 10 of the threshold.
    Indeterminate,
}

impl Degeneracy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Degeneracy::NonDegenerate => "true",
            Degeneracy::Degenerate => "false",
            Degeneracy::Indeterminate => "indeterminate",
        }
    }
}

/// Classifies the kernel of `D(e^{-2 pi i t} Phi)(q) - I`: non-degenerate iff
/// it is exactly the radial line through `q`.
pub fn nondegeneracy_check(
    spec: &ContactHamiltonianSpec,
    q: &ComplexVector2n,
    t: f64,
    tol: f64,
    settings: &IntegratorSettings,
) -> Result<Degeneracy> {
    let (_, jac) = flow_with_jacobian(spec, q.coords(), 0.0, 1.0, settings)?;
    classify_linearization(&jac, q.coords(), t, tol)
}

pub(crate) fn classify_linearization(
    jac: &DMatrix<f64>,
    q: &DVector<f64>,
    t: f64,
    tol: f64,
) -> Result<Degeneracy> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let dim = q.len();
    let lin = phase_matrix(dim / 2, -2.0 * PI * t) * jac - DMatrix::<f64>::identity(dim, dim);
    let svd = lin.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut kernel = Vec::new();
    for (j, &s) in svd.singular_values.iter().enumerate() {
        if s >= tol / 10.0 && s <= tol * 10.0 {
            return Ok(Degeneracy::Indeterminate);
        }
        if s < tol {
            kernel.push(j);
        }
    }
    if kernel.len() != 1 {
        return Ok(Degeneracy::Degenerate);
    }
    let v = v_t.row(kernel[0]).transpose();
    let alignment = v.dot(q).abs() / q.norm();
    Ok(if alignment > 1.0 - 1e-6 {
        Degeneracy::NonDegenerate
    } else {
        Degeneracy::Degenerate
    })
}
