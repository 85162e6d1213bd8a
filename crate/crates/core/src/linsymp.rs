//! Linear algebra on R^{2n} = C^n.
//!
//! Coordinates are laid out as `(x_1..x_n, y_1..y_n)` with `z_j = x_j + i y_j`.
//! Multiplication by `i` maps `(x, y)` to `(-y, x)`. The Euclidean pairing is
//! written `<u, v>`; the standard symplectic form is `omega(u, v) = <iu, v>`
//! and the contact form on the sphere is `alpha_q(v) = <iq, v>`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of R^{2n} read as a point of C^n.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector2n {
    coords: DVector<f64>,
}

impl ComplexVector2n {
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        if coords.is_empty() || !coords.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "a point of R^2n needs an even, positive number of coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("ComplexVector2n"));
        }
        Ok(Self { coords })
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    pub fn from_complex(z: &[Complex64]) -> Result<Self> {
        let n = z.len();
        let mut coords = DVector::zeros(2 * n);
        for (j, c) in z.iter().enumerate() {
            coords[j] = c.re;
            coords[n + j] = c.im;
        }
        Self::new(coords)
    }

    /// The unit vector along the real axis of the `j`-th complex coordinate.
    pub fn basis(n: usize, j: usize) -> Self {
        let mut coords = DVector::zeros(2 * n);
        coords[j] = 1.0;
        Self { coords }
    }

    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    pub fn complex(&self, j: usize) -> Complex64 {
        let n = self.n();
        Complex64::new(self.coords[j], self.coords[n + j])
    }

    pub fn mul_i(&self) -> Self {
        Self {
            coords: mul_i(&self.coords),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }
}

/// Multiplication by `i`, blockwise per complex coordinate.
pub fn mul_i(v: &DVector<f64>) -> DVector<f64> {
    let n = v.len() / 2;
    DVector::from_fn(2 * n, |r, _| if r < n { -v[n + r] } else { v[r - n] })
}

/// Matrix of multiplication by `i`.
pub fn complex_structure(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = -1.0;
        j[(n + k, k)] = 1.0;
    }
    j
}

/// Matrix `J_omega` with `omega(u, v) = u^T J_omega v`.
pub fn symplectic_matrix(n: usize) -> DMatrix<f64> {
    complex_structure(n).transpose()
}

/// Multiplication by the unit complex number `e^{i angle}`.
pub fn phase_rotate(v: &DVector<f64>, angle: f64) -> DVector<f64> {
    let n = v.len() / 2;
    let (s, c) = angle.sin_cos();
    DVector::from_fn(2 * n, |r, _| {
        if r < n {
            c * v[r] - s * v[n + r]
        } else {
            s * v[r - n] + c * v[r]
        }
    })
}

/// Matrix of multiplication by `e^{i angle}`.
pub fn phase_matrix(n: usize, angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    DMatrix::identity(2 * n, 2 * n) * c + complex_structure(n) * s
}

/// Value of `alpha = x dy - y dx` at `q` on the tangent vector `v`.
pub fn contact_form_eval(q: &ComplexVector2n, v: &ComplexVector2n) -> Result<f64> {
    check_same(q.coords.len(), v.coords.len())?;
    let n = q.n();
    Ok((0..n)
        .map(|j| q.coords[j] * v.coords[n + j] - q.coords[n + j] * v.coords[j])
        .sum())
}

/// A point of the cotangent bundle `T*R^{2n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentPoint {
    pub base: DVector<f64>,
    pub covector: DVector<f64>,
}

impl CotangentPoint {
    pub fn new(base: DVector<f64>, covector: DVector<f64>) -> Result<Self> {
        check_same(base.len(), covector.len())?;
        Ok(Self { base, covector })
    }

    /// Inverse of [`tau_embed`]: the pair `(z, Z)` mapped to this point.
    pub fn graph_preimage(&self) -> (DVector<f64>, DVector<f64>) {
        let half_ip = mul_i(&self.covector) * 0.5;
        (&self.base - &half_ip, &self.base + &half_ip)
    }
}

/// Identification of `(R^{2n}, -omega) x (R^{2n}, omega)` with `T*R^{2n}`:
/// `(x, y, X, Y) -> ((x+X)/2, (y+Y)/2, Y-y, x-X)`.
pub fn tau_embed(z: &ComplexVector2n, image: &ComplexVector2n) -> Result<CotangentPoint> {
    check_same(z.coords.len(), image.coords.len())?;
    Ok(tau_raw(&z.coords, &image.coords))
}

pub(crate) fn tau_raw(z: &DVector<f64>, image: &DVector<f64>) -> CotangentPoint {
    let n = z.len() / 2;
    let base = (z + image) * 0.5;
    let covector = DVector::from_fn(2 * n, |r, _| {
        if r < n {
            image[n + r] - z[n + r]
        } else {
            z[r - n] - image[r - n]
        }
    });
    CotangentPoint { base, covector }
}

/// A quadratic form `Q(u) = u^T M u` with `M` symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    matrix: DMatrix<f64>,
}

impl QuadraticForm {
    /// Wraps a square matrix, replacing it by its symmetric part.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument(format!(
                "quadratic form needs a square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("QuadraticForm"));
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self { matrix: sym })
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim) * c,
        }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        Self {
            matrix: DMatrix::from_diagonal(&DVector::from_column_slice(entries)),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eval(&self, u: &DVector<f64>) -> Result<f64> {
        check_same(self.dim(), u.len())?;
        Ok(u.dot(&(&self.matrix * u)))
    }

    pub fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_same(self.dim(), u.len())?;
        Ok(&self.matrix * u * 2.0)
    }

    /// Block-diagonal direct sum `Q ⊕ Q'`.
    pub fn direct_sum(&self, other: &QuadraticForm) -> QuadraticForm {
        let (a, b) = (self.dim(), other.dim());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.matrix);
        m.view_mut((a, a), (b, b)).copy_from(&other.matrix);
        QuadraticForm { matrix: m }
    }

    /// `O^T M O`.
    pub fn conjugate(&self, o: &DMatrix<f64>) -> Result<QuadraticForm> {
        check_same(self.dim(), o.nrows())?;
        QuadraticForm::new(o.transpose() * &self.matrix * o)
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        SymmetricEigen::new(self.matrix.clone()).eigenvalues
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    /// Number of negative eigenvalues.
    pub index: usize,
    pub nullity: usize,
    pub coindex: usize,
}

impl Inertia {
    /// Relative nullity threshold used when no explicit tolerance is given.
    pub const DEFAULT_RELATIVE_TOL: f64 = 1e-9;

    pub fn dim(&self) -> usize {
        self.index + self.nullity + self.coindex
    }

    /// Cohomological index of the sublevel set `{Q <= 0}` in projective space.
    pub fn fr_index(&self) -> usize {
        self.index + self.nullity
    }

    fn from_eigenvalues(eigs: &DVector<f64>, tol: f64) -> Self {
        let mut out = Inertia {
            index: 0,
            nullity: 0,
            coindex: 0,
        };
        for &l in eigs.iter() {
            if l <= -tol {
                out.index += 1;
            } else if l >= tol {
                out.coindex += 1;
            } else {
                out.nullity += 1;
            }
        }
        out
    }
}

/// Inertia with an absolute threshold: eigenvalues in `(-tol, tol)` are null.
pub fn inertia(q: &QuadraticForm, tol: f64) -> Result<Inertia> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    if q.matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("QuadraticForm"));
    }
    Ok(Inertia::from_eigenvalues(&q.eigenvalues(), tol))
}

/// Inertia with the threshold `rel * max |eigenvalue|`.
pub fn inertia_relative(q: &QuadraticForm, rel: f64) -> Result<Inertia> {
    if !(rel > 0.0) {
        return Err(Error::InvalidArgument(format!("rel must be positive, got {rel}")));
    }
    if q.matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("QuadraticForm"));
    }
    let eigs = q.eigenvalues();
    let scale = eigs.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    if scale == 0.0 {
        return Ok(Inertia {
            index: 0,
            nullity: q.dim(),
            coindex: 0,
        });
    }
    Ok(Inertia::from_eigenvalues(&eigs, rel * scale))
}

/// `ind(Q) = i(Q) + dim ker(Q)`.
pub fn fr_index_quadratic(q: &QuadraticForm, tol: f64) -> Result<usize> {
    inertia(q, tol).map(|i| i.fr_index())
}

pub(crate) fn check_same(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}
