//! Splitting an isotopy into C^1-small pieces.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::flow::{flow_with_jacobian, IntegratorSettings};
use super::hamiltonian::ContactHamiltonianSpec;
use crate::error::{Error, Result};
use crate::sampling::sphere_points;

/// Hard limit on the number of pieces a subdivision may produce.
pub const MAX_PIECES: usize = 4096;

/// Sample points per complex dimension used by the smallness test.
pub const SAMPLES_PER_COMPLEX_DIM: usize = 64;

/// `max_q |Phi(q) - q| + ||D Phi(q) - I||_2` over the sample, for the flow
/// over `[t0, t1]`.
pub fn c1_distance(
    spec: &ContactHamiltonianSpec,
    t0: f64,
    t1: f64,
    samples: &[DVector<f64>],
    settings: &IntegratorSettings,
) -> Result<f64> {
    if t0 == t1 {
        return Ok(0.0);
    }
    let dim = spec.dim();
    let per_point: Vec<f64> = samples
        .par_iter()
        .map(|q| {
            let (z, jac) = flow_with_jacobian(spec, q, t0, t1, settings)?;
            let shift = jac - DMatrix::<f64>::identity(dim, dim);
            Ok((z - q).norm() + shift.singular_values().max())
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().fold(0.0, f64::max))
}

/// Partitions `[t0, t1]` by repeated bisection until every piece has
/// [`c1_distance`] below `delta`. Pieces are returned in time order.
///
/// A piece is accepted only if its first half passes as well: a window can
/// close up (a full Hopf turn is the identity) while the maps in between are
/// far from the identity.
pub fn subdivide_c1_small(
    spec: &ContactHamiltonianSpec,
    t0: f64,
    t1: f64,
    delta: f64,
    settings: &IntegratorSettings,
) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if !(t0 <= t1) {
        return Err(Error::InvalidArgument(format!("need t0 <= t1, got [{t0}, {t1}]")));
    }
    let samples = sphere_points(spec.n, SAMPLES_PER_COMPLEX_DIM * spec.n);
    let mut done = Vec::new();
    // Stack of pending pieces, later pieces below earlier ones.
    let mut pending = vec![(t0, t1)];
    while let Some((a, b)) = pending.pop() {
        let mid = 0.5 * (a + b);
        if c1_distance(spec, a, b, &samples, settings)? < delta
            && c1_distance(spec, a, mid, &samples, settings)? < delta
        {
            done.push((a, b));
            continue;
        }
        if done.len() + pending.len() + 2 > MAX_PIECES {
            return Err(Error::PieceCap { cap: MAX_PIECES });
        }
        if mid <= a || mid >= b {
            return Err(Error::StepUnderflow(format!("cannot bisect [{a}, {b}]")));
        }
        pending.push((mid, b));
        pending.push((a, mid));
    }
    Ok(done)
}
