//! Generating functions of single C^1-small pieces.

use nalgebra::{DMatrix, DVector};

use crate::contact::FlowMap;
use crate::error::{Error, Result};
use crate::linsymp::{complex_structure, tau_raw};

const MAX_ITERATIONS: usize = 60;
/// Converged when `|residual| <= TARGET * |b|`.
const TARGET: f64 = 1e-14;
/// Residual accepted once Newton stops making progress.
const ACCEPT: f64 = 1e-11;

/// Solution of the midpoint equation `(z + Phi(z)) / 2 = b`.
#[derive(Clone, Debug)]
pub(crate) struct LeafSolution {
    pub z: DVector<f64>,
    pub image: DVector<f64>,
    pub jacobian: DMatrix<f64>,
}

pub(crate) fn solve_leaf(map: &FlowMap, b: &DVector<f64>) -> Result<LeafSolution> {
    let dim = map.dim();
    if b.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: b.len(),
        });
    }
    let scale = b.norm();
    if scale == 0.0 {
        return Err(Error::ConeTip);
    }
    let eye = DMatrix::<f64>::identity(dim, dim);
    let mut z = b.clone();
    let (mut image, mut jac) = map.apply_with_jacobian(&z)?;
    let mut r = (&z + &image) * 0.5 - b;
    let mut rn = r.norm();
    for _ in 0..MAX_ITERATIONS {
        if rn <= TARGET * scale {
            break;
        }
        let step = ((&eye + &jac) * 0.5).lu().solve(&r).unwrap_or_else(|| r.clone());
        // Backtracking on the residual norm.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = &z - &step * lambda;
            if cand.norm() > 0.0 {
                let (ci, cj) = map.apply_with_jacobian(&cand)?;
                let cr = (&cand + &ci) * 0.5 - b;
                let crn = cr.norm();
                if crn < rn {
                    z = cand;
                    image = ci;
                    jac = cj;
                    r = cr;
                    rn = crn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if !(rn <= ACCEPT * scale) {
        return Err(Error::LeafNewton {
            residual: rn / scale,
            iterations: MAX_ITERATIONS,
        });
    }
    Ok(LeafSolution {
        z,
        image,
        jacobian: jac,
    })
}

/// Value and gradient of the generating function of one piece at `b`.
///
/// The gradient is the covector of `tau(z, Phi(z))` at the solution of the
/// midpoint equation, and the value follows from Euler's identity for
/// degree-2 homogeneous functions, `F(b) = <grad F(b), b> / 2`.
pub fn gf_leaf_eval(piece: &FlowMap, b: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
    let jet = leaf_jet(piece, b, false)?;
    Ok((jet.0, jet.1))
}

pub(crate) fn leaf_jet(
    piece: &FlowMap,
    b: &DVector<f64>,
    with_hess: bool,
) -> Result<(f64, DVector<f64>, Option<DMatrix<f64>>)> {
    let dim = piece.dim();
    if piece.is_identity() {
        if b.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: b.len(),
            });
        }
        let hess = with_hess.then(|| DMatrix::zeros(dim, dim));
        return Ok((0.0, DVector::zeros(dim), hess));
    }
    let sol = solve_leaf(piece, b)?;
    let p = tau_raw(&sol.z, &sol.image).covector;
    let value = 0.5 * p.dot(b);
    let hess = if with_hess {
        // p = -i (Phi(z) - z) and b = (z + Phi(z)) / 2, so
        // dp/db = -2 i (D Phi - I)(I + D Phi)^{-1}.
        let eye = DMatrix::<f64>::identity(dim, dim);
        let num = -(complex_structure(dim / 2) * (&sol.jacobian - &eye)) * 2.0;
        let den = (&eye + &sol.jacobian).transpose();
        // (N D^{-1})^T = D^{-T} N^T
        let h = den
            .lu()
            .solve(&num.transpose())
            .ok_or(Error::LeafNewton {
                residual: f64::INFINITY,
                iterations: 0,
            })?
            .transpose();
        Some((&h + h.transpose()) * 0.5)
    } else {
        None
    };
    Ok((value, p, hess))
}

/// Lift of `z` to the generating set of one piece: the base point
/// `(z + Phi(z)) / 2` together with `Phi(z)`.
pub(crate) fn leaf_lift(piece: &FlowMap, z: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let image = piece.apply(z)?;
    Ok(((z + &image) * 0.5, image))
}
