//! Sign of `d/dt F_t` for generating families of isotopies.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::{build_rotation_family, gf_compose_all, GenFun};
use crate::contact::{subdivide_c1_small, ContactHamiltonianSpec, FlowMap, IntegratorSettings};
use crate::error::{Error, Result};
use crate::sampling::sphere_points;

/// Half-width of the centered difference in `t`.
const DT: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl ProbeSummary {
    fn push(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
        self.count += 1;
    }

    fn empty() -> Self {
        Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            count: 0,
        }
    }
}

/// Generating function of `Phi_t` built on a fixed schedule of pieces: piece
/// `j` covers `[a_j, clamp(t, a_j, b_j)]`, so pieces not yet reached are the
/// identity and the total-space dimension does not depend on `t`.
pub fn shared_schedule_family(
    spec: &Arc<ContactHamiltonianSpec>,
    schedule: &[(f64, f64)],
    t: f64,
    settings: &IntegratorSettings,
) -> Result<GenFun> {
    let leaves = schedule
        .iter()
        .map(|&(a, b)| {
            FlowMap::new(spec.clone(), a, t.clamp(a, b), *settings).map(GenFun::leaf)
        })
        .collect::<Result<Vec<_>>>()?;
    gf_compose_all(&leaves)
}

fn check_grid(t_values: &[f64]) -> Result<()> {
    if t_values.is_empty() {
        return Err(Error::InvalidArgument("empty t grid".into()));
    }
    for &t in t_values {
        if !(DT..=1.0 - DT).contains(&t) {
            return Err(Error::InvalidArgument(format!(
                "probe times must lie in [{DT}, {}], got {t}",
                1.0 - DT
            )));
        }
    }
    Ok(())
}

/// Centered differences of `t -> F_t(x)` over sample points `x` of the unit
/// sphere of the total space and the given times, for the shared-schedule
/// family of `spec` on `[0, 1]`.
///
/// The Hamiltonian must be sign-definite on the sphere; probes then carry its
/// sign.
pub fn monotonicity_probe(
    spec: &ContactHamiltonianSpec,
    delta: f64,
    settings: &IntegratorSettings,
    samples: usize,
    t_values: &[f64],
) -> Result<ProbeSummary> {
    spec.validate()?;
    check_grid(t_values)?;
    let (min, max) = spec.sampled_range(&sphere_points(spec.n, 256));
    if min <= 0.0 && max >= 0.0 {
        return Err(Error::IndefiniteHamiltonian { min, max });
    }
    let spec = Arc::new(spec.clone());
    let schedule = subdivide_c1_small(&spec, 0.0, 1.0, delta, settings)?;
    let total = shared_schedule_family(&spec, &schedule, 0.0, settings)?.total_dim();
    let points = sphere_points(total / 2, samples);
    let mut out = ProbeSummary::empty();
    for &t in t_values {
        let up = shared_schedule_family(&spec, &schedule, t + DT, settings)?;
        let dn = shared_schedule_family(&spec, &schedule, t - DT, settings)?;
        for x in &points {
            out.push((up.eval(x)? - dn.eval(x)?) / (2.0 * DT));
        }
    }
    Ok(out)
}

/// The same probe for the rotation family `A_t`, which generates the
/// negative isotopy `a_t`.
pub fn rotation_family_probe(
    n: usize,
    k: usize,
    samples: usize,
    t_values: &[f64],
) -> Result<ProbeSummary> {
    check_grid(t_values)?;
    let total = build_rotation_family(0.0, n, k)?.total_dim();
    let points: Vec<DVector<f64>> = sphere_points(total / 2, samples);
    let mut out = ProbeSummary::empty();
    for &t in t_values {
        let up = build_rotation_family(t + DT, n, k)?.form;
        let dn = build_rotation_family(t - DT, n, k)?.form;
        for x in &points {
            out.push((up.eval(x)? - dn.eval(x)?) / (2.0 * DT));
        }
    }
    Ok(out)
}
