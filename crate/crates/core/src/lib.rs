//! Translated points of contactomorphisms of the standard contact sphere and
//! of real projective space.
//!
//! A contact isotopy of `S^{2n-1}` is lifted to an R+-equivariant Hamiltonian
//! isotopy of `R^{2n}`. Translated points are found twice: as zeros of
//! `e^{-2 pi i t} Phi(q) - q` and as critical rays of homogeneous generating
//! functions built by composition.

pub mod contact;
pub mod corpus;
pub mod detect;
pub mod error;
pub mod genfun;
pub mod linsymp;
pub mod projective;
pub mod sampling;

pub use error::{Error, Result};
