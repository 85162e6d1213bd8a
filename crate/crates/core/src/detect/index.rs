use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genfun::build_rotation_family;
use crate::linsymp::{inertia_relative, Inertia};

/// Inertia of the endpoint rotation forms `A_0` and `A_1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexData {
    pub n: usize,
    pub k: usize,
    pub a0: Inertia,
    pub a1: Inertia,
    /// `i(A_1) - i(A_0)`.
    pub jump: i64,
}

/// Builds `A_0` and `A_1` with `k` pieces and compares their negative
/// indices. Both endpoints generate the identity, so the full forms are null
/// exactly on the base; the fiber blocks must be non-degenerate.
pub fn index_data(n: usize, k: usize) -> Result<IndexData> {
    let mut ends = Vec::with_capacity(2);
    for t in [0.0, 1.0] {
        let fam = build_rotation_family(t, n, k)?;
        let fiber = inertia_relative(&fam.fiber_block(), Inertia::DEFAULT_RELATIVE_TOL)?;
        if fiber.nullity != 0 {
            return Err(Error::EndpointNullity {
                t,
                nullity: fiber.nullity,
            });
        }
        ends.push(inertia_relative(&fam.form, Inertia::DEFAULT_RELATIVE_TOL)?);
    }
    Ok(IndexData {
        n,
        k,
        a0: ends[0],
        a1: ends[1],
        jump: ends[1].index as i64 - ends[0].index as i64,
    })
}

/// `i(A_1) - i(A_0)`.
pub fn index_jump(n: usize, k: usize) -> Result<i64> {
    index_data(n, k).map(|d| d.jump)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jump_examples() {
        assert_eq!(index_jump(1, 4).unwrap(), 2);
        assert_eq!(index_jump(2, 4).unwrap(), 4);
        assert_eq!(index_jump(3, 5).unwrap(), 6);
    }

    #[test]
    fn endpoint_forms_are_null_on_the_base_only() {
        let d = index_data(1, 4).unwrap();
        assert_eq!(d.a0.nullity, 2);
        assert_eq!(d.a1.nullity, 2);
        assert_eq!(d.a0, Inertia { index: 6, nullity: 2, coindex: 6 });
        assert_eq!(d.a1, Inertia { index: 8, nullity: 2, coindex: 4 });
    }

    #[test]
    fn too_few_pieces() {
        assert_eq!(index_jump(1, 2), Err(Error::TooFewPieces(2)));
    }
}
