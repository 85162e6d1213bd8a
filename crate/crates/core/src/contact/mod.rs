//! Contact Hamiltonians on the sphere and their lifted flows.

mod flow;
mod hamiltonian;
mod subdivide;

pub use flow::{
    conformal_factor, conformal_factor_pullback, integrate_flow, FlowMap, FlowResult,
    IntegratorSettings, TIME_CALIBRATION,
};
#[allow(unused_imports)]
pub(crate) use flow::{flow_point, flow_with_jacobian};
pub use hamiltonian::{
    lift_hamiltonian, ContactHamiltonianSpec, HamiltonianJet, PerturbationTerm, TimeProfile,
};
pub use subdivide::{c1_distance, subdivide_c1_small, MAX_PIECES, SAMPLES_PER_COMPLEX_DIM};
