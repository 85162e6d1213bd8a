//! Named example Hamiltonians on `S^3`.

use crate::contact::{ContactHamiltonianSpec, PerturbationTerm};
use crate::detect::Mode;

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub mode: Mode,
    pub spec: ContactHamiltonianSpec,
}

fn diagonal(eps: f64) -> ContactHamiltonianSpec {
    ContactHamiltonianSpec::new(vec![0.3, 0.7])
        .with_term(PerturbationTerm::new(eps, vec![2, 0], vec![0, 0]))
        .with_term(PerturbationTerm::new(eps, vec![0, 2], vec![0, 0]))
}

pub const CORPUS_NAMES: [&str; 5] = [
    "diag-0.3-0.7-eps0.05",
    "rp3-sym-eps0.05",
    "rp3-quadratic-eps0.05",
    "diag-0.3-0.7-unitary",
    "constant-0.5",
];

pub fn corpus_entry(name: &str) -> Option<CorpusEntry> {
    let (mode, spec) = match name {
        // Even quadratic splitting plus an odd cubic term: no antipodal symmetry.
        "diag-0.3-0.7-eps0.05" => (
            Mode::Sphere,
            diagonal(0.05).with_term(PerturbationTerm::new(0.03, vec![2, 0], vec![0, 1])),
        ),
        // Even quadratic splitting plus an even quartic coupling.
        "rp3-sym-eps0.05" => (
            Mode::Projective,
            diagonal(0.05).with_term(PerturbationTerm::new(0.03, vec![3, 0], vec![0, 1])),
        ),
        // Linear, symplectic but not unitary.
        "rp3-quadratic-eps0.05" => (Mode::Projective, diagonal(0.05)),
        "diag-0.3-0.7-unitary" => (Mode::Sphere, ContactHamiltonianSpec::new(vec![0.3, 0.7])),
        "constant-0.5" => (Mode::Sphere, ContactHamiltonianSpec::constant(2, 0.5)),
        _ => return None,
    };
    let name = CORPUS_NAMES.iter().find(|n| **n == name)?;
    Some(CorpusEntry { name, mode, spec })
}

pub fn corpus() -> Vec<CorpusEntry> {
    CORPUS_NAMES.iter().filter_map(|n| corpus_entry(n)).collect()
}
