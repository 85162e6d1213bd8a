//! Homogeneous generating functions and their composition.
//!
//! A generating function `F: R^{2n} x R^N -> R` for a map `Phi` has the
//! property that over each base point `u` the fiber-critical points `x = (u, f)`
//! with `d_f F(x) = 0` give covectors `p = d_u F(x)` with `tau(z, Phi z) = (u, p)`.
//!
//! Composition follows
//!
//! ```text
//! (F # G)(u; v, w, mu, eta) = F(u + w; mu) + G(v + w; eta) + 2 <u - v, i w>
//! ```
//!
//! which generates `G o F` (F is applied first). Total-space coordinates of a
//! composite are laid out as `[u | v | w | mu | eta]`.

mod leaf;
mod monotone;
mod rotation;

use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

use crate::contact::FlowMap;
use crate::error::{Error, Result};
use crate::linsymp::{complex_structure, mul_i, CotangentPoint, QuadraticForm};

pub use leaf::gf_leaf_eval;
pub use monotone::{monotonicity_probe, rotation_family_probe, shared_schedule_family, ProbeSummary};
pub use rotation::{build_rotation_family, quadratic_form_for_rotation, RotationFamily};
pub(crate) use rotation::rotation_family_raw;

#[derive(Clone, Debug)]
pub enum GenFunNode {
    /// A C^1-small piece of a lifted flow.
    Leaf(FlowMap),
    /// A quadratic form on the base, generating a linear map.
    Quadratic(QuadraticForm),
    /// `first # second`, generating `second o first`.
    Compose(Arc<GenFun>, Arc<GenFun>),
}

#[derive(Clone, Debug)]
pub struct GenFun {
    node: GenFunNode,
    n: usize,
    fiber_dim: usize,
}

/// Value, gradient and optionally Hessian at a total-space point.
#[derive(Clone, Debug)]
pub struct GenFunJet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: Option<DMatrix<f64>>,
}

/// A fiber-critical point over a base point and its base covector.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub point: DVector<f64>,
    pub covector: DVector<f64>,
}

impl Reduction {
    pub fn cotangent(&self, n: usize) -> CotangentPoint {
        CotangentPoint {
            base: self.point.rows(0, 2 * n).into_owned(),
            covector: self.covector.clone(),
        }
    }
}

const REDUCE_TARGET: f64 = 1e-14;
const REDUCE_ACCEPT: f64 = 1e-10;

impl GenFun {
    pub fn leaf(piece: FlowMap) -> Self {
        let n = piece.dim() / 2;
        Self {
            node: GenFunNode::Leaf(piece),
            n,
            fiber_dim: 0,
        }
    }

    pub fn quadratic(form: QuadraticForm) -> Result<Self> {
        let dim = form.dim();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "base quadratic form needs even positive dimension, got {dim}"
            )));
        }
        Ok(Self {
            node: GenFunNode::Quadratic(form),
            n: dim / 2,
            fiber_dim: 0,
        })
    }

    pub fn node(&self) -> &GenFunNode {
        &self.node
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base_dim(&self) -> usize {
        2 * self.n
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn total_dim(&self) -> usize {
        2 * self.n + self.fiber_dim
    }

    /// True when every node is a quadratic form or a composition of such.
    pub fn is_quadratic(&self) -> bool {
        match &self.node {
            GenFunNode::Leaf(_) => false,
            GenFunNode::Quadratic(_) => true,
            GenFunNode::Compose(f, g) => f.is_quadratic() && g.is_quadratic(),
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.jet(x, false)?.value)
    }

    pub fn grad(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.jet(x, false)?.grad)
    }

    pub fn jet(&self, x: &DVector<f64>, with_hess: bool) -> Result<GenFunJet> {
        if x.len() != self.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.total_dim(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("generating function argument"));
        }
        match &self.node {
            GenFunNode::Leaf(piece) => {
                let (value, grad, hess) = leaf::leaf_jet(piece, x, with_hess)?;
                Ok(GenFunJet { value, grad, hess })
            }
            GenFunNode::Quadratic(q) => {
                let grad = q.matrix() * x * 2.0;
                Ok(GenFunJet {
                    value: 0.5 * grad.dot(x),
                    grad,
                    hess: with_hess.then(|| q.matrix() * 2.0),
                })
            }
            GenFunNode::Compose(f, g) => {
                let lay = Layout::new(self.n, f.fiber_dim, g.fiber_dim);
                let (xf, xg) = lay.split(x);
                let jf = f.jet(&xf, with_hess)?;
                let jg = g.jet(&xg, with_hess)?;
                let m = 2 * self.n;
                let u = x.rows(lay.u, m);
                let v = x.rows(lay.v, m);
                let w = x.rows(lay.w, m).into_owned();
                let diff = (u - v).into_owned();
                let iw = mul_i(&w);
                let idiff = mul_i(&diff);
                let fb = jf.grad.rows(0, m);
                let gb = jg.grad.rows(0, m);

                let mut grad = DVector::zeros(x.len());
                grad.rows_mut(lay.u, m).copy_from(&(fb + &iw * 2.0));
                grad.rows_mut(lay.v, m).copy_from(&(gb - &iw * 2.0));
                grad.rows_mut(lay.w, m).copy_from(&(fb + gb - &idiff * 2.0));
                grad.rows_mut(lay.mu, lay.f_fib)
                    .copy_from(&jf.grad.rows(m, lay.f_fib));
                grad.rows_mut(lay.eta, lay.g_fib)
                    .copy_from(&jg.grad.rows(m, lay.g_fib));

                let hess = match (jf.hess, jg.hess) {
                    (Some(hf), Some(hg)) => Some(lay.assemble(&hf, &hg, 2.0)),
                    _ => None,
                };
                Ok(GenFunJet {
                    value: jf.value + jg.value + 2.0 * diff.dot(&iw),
                    grad,
                    hess,
                })
            }
        }
    }

    /// The generated map applied to `z`.
    pub fn apply_map(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.lift(z)?.1)
    }

    /// The fiber-critical point whose base covector is `tau(z, Psi z)`, with
    /// `Psi` the generated map, together with `Psi z`.
    pub fn lift(&self, z: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        if z.len() != self.base_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.base_dim(),
                found: z.len(),
            });
        }
        match &self.node {
            GenFunNode::Leaf(piece) => leaf::leaf_lift(piece, z),
            GenFunNode::Quadratic(q) => {
                // p = 2 S b and z = b - i p / 2, so z = (I - i S) b.
                let js = complex_structure(self.n) * q.matrix();
                let eye = DMatrix::<f64>::identity(z.len(), z.len());
                let b = (&eye - &js)
                    .lu()
                    .solve(z)
                    .ok_or_else(|| Error::InvalidArgument("quadratic form does not generate a map".into()))?;
                let image = (&eye + &js) * &b;
                Ok((b, image))
            }
            GenFunNode::Compose(f, g) => {
                let lay = Layout::new(self.n, f.fiber_dim, g.fiber_dim);
                let m = 2 * self.n;
                let (xf, z1) = f.lift(z)?;
                let (xg, z2) = g.lift(&z1)?;
                let mut x = DVector::zeros(self.total_dim());
                x.rows_mut(lay.u, m).copy_from(&((z + &z2) * 0.5));
                x.rows_mut(lay.v, m).copy_from(&z2);
                x.rows_mut(lay.w, m).copy_from(&((&z1 - &z2) * 0.5));
                x.rows_mut(lay.mu, lay.f_fib).copy_from(&xf.rows(m, lay.f_fib));
                x.rows_mut(lay.eta, lay.g_fib).copy_from(&xg.rows(m, lay.g_fib));
                Ok((x, z2))
            }
        }
    }

    /// Solves `d_f F(u; f) = 0` for the fiber variables by Newton's method,
    /// starting from the lift of `u`.
    pub fn reduce(&self, u: &DVector<f64>) -> Result<Reduction> {
        let m = self.base_dim();
        if u.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: u.len(),
            });
        }
        let scale = u.norm();
        if scale == 0.0 {
            return Err(Error::ConeTip);
        }
        let mut x = self.lift(u)?.0;
        x.rows_mut(0, m).copy_from(u);
        let nf = self.fiber_dim;
        let mut jet = self.jet(&x, nf > 0)?;
        if nf == 0 {
            return Ok(Reduction {
                covector: jet.grad,
                point: x,
            });
        }
        let mut res = jet.grad.rows(m, nf).norm();
        for _ in 0..60 {
            if res <= REDUCE_TARGET * scale {
                break;
            }
            let hess = jet.hess.as_ref().expect("hessian requested");
            let hff = hess.view((m, m), (nf, nf)).into_owned();
            let rhs = jet.grad.rows(m, nf).into_owned();
            let step = match hff.clone().lu().solve(&rhs) {
                Some(s) => s,
                None => hff.svd(true, true).solve(&rhs, 1e-14).map_err(|e| Error::InvalidArgument(e.to_string()))?,
            };
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let mut cand = x.clone();
                let mut fib = cand.rows_mut(m, nf);
                fib -= &step * lambda;
                let cj = self.jet(&cand, true)?;
                let cres = cj.grad.rows(m, nf).norm();
                if cres < res {
                    x = cand;
                    jet = cj;
                    res = cres;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if !(res <= REDUCE_ACCEPT * scale) {
            return Err(Error::Inconsistent(format!(
                "fiber-critical solve stalled at relative residual {:e}",
                res / scale
            )));
        }
        Ok(Reduction {
            covector: jet.grad.rows(0, m).into_owned(),
            point: x,
        })
    }

    /// The single symmetric matrix of an all-quadratic composition.
    pub fn flatten_quadratic(&self) -> Result<QuadraticForm> {
        QuadraticForm::new(self.flatten_with(&|q: &QuadraticForm| Ok(q.matrix().clone()), 1.0)?)
    }

    /// Flattens with each quadratic node replaced by `node_matrix(q)` and the
    /// coupling term scaled by `coupling`.
    pub(crate) fn flatten_with(
        &self,
        node_matrix: &dyn Fn(&QuadraticForm) -> Result<DMatrix<f64>>,
        coupling: f64,
    ) -> Result<DMatrix<f64>> {
        match &self.node {
            GenFunNode::Leaf(_) => Err(Error::InvalidArgument(
                "only all-quadratic compositions can be flattened".into(),
            )),
            GenFunNode::Quadratic(q) => node_matrix(q),
            GenFunNode::Compose(f, g) => {
                let mf = f.flatten_with(node_matrix, coupling)?;
                let mg = g.flatten_with(node_matrix, coupling)?;
                Ok(Layout::new(self.n, f.fiber_dim, g.fiber_dim).assemble(&mf, &mg, coupling))
            }
        }
    }

    /// Number of leaf and quadratic nodes.
    pub fn piece_count(&self) -> usize {
        match &self.node {
            GenFunNode::Compose(f, g) => f.piece_count() + g.piece_count(),
            _ => 1,
        }
    }
}

/// `F # G`, the generating function of `G o F`.
pub fn gf_compose(first: &GenFun, second: &GenFun) -> Result<GenFun> {
    if first.n != second.n {
        return Err(Error::DimensionMismatch {
            expected: first.base_dim(),
            found: second.base_dim(),
        });
    }
    let n = first.n;
    Ok(GenFun {
        fiber_dim: 4 * n + first.fiber_dim + second.fiber_dim,
        node: GenFunNode::Compose(Arc::new(first.clone()), Arc::new(second.clone())),
        n,
    })
}

/// Left-associated composition `((F_1 # F_2) # F_3) # ...`, generating
/// `... o F_3 o F_2 o F_1`.
pub fn gf_compose_all(parts: &[GenFun]) -> Result<GenFun> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("nothing to compose".into()))?;
    rest.iter().try_fold(first.clone(), |acc, g| gf_compose(&acc, g))
}

pub fn gf_eval(f: &GenFun, x: &DVector<f64>) -> Result<f64> {
    f.eval(x)
}

pub fn gf_grad(f: &GenFun, x: &DVector<f64>) -> Result<DVector<f64>> {
    f.grad(x)
}

/// Offsets of `[u | v | w | mu | eta]` in a composite's total space.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Layout {
    pub m: usize,
    pub u: usize,
    pub v: usize,
    pub w: usize,
    pub mu: usize,
    pub eta: usize,
    pub f_fib: usize,
    pub g_fib: usize,
}

impl Layout {
    pub fn new(n: usize, f_fib: usize, g_fib: usize) -> Self {
        let m = 2 * n;
        Self {
            m,
            u: 0,
            v: m,
            w: 2 * m,
            mu: 3 * m,
            eta: 3 * m + f_fib,
            f_fib,
            g_fib,
        }
    }

    pub fn total(&self) -> usize {
        3 * self.m + self.f_fib + self.g_fib
    }

    /// The arguments `(u + w; mu)` and `(v + w; eta)` of the two factors.
    pub fn split(&self, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let m = self.m;
        let w = x.rows(self.w, m);
        let mut xf = DVector::zeros(m + self.f_fib);
        xf.rows_mut(0, m).copy_from(&(x.rows(self.u, m) + w));
        xf.rows_mut(m, self.f_fib).copy_from(&x.rows(self.mu, self.f_fib));
        let mut xg = DVector::zeros(m + self.g_fib);
        xg.rows_mut(0, m).copy_from(&(x.rows(self.v, m) + w));
        xg.rows_mut(m, self.g_fib).copy_from(&x.rows(self.eta, self.g_fib));
        (xf, xg)
    }

    /// Positions in the composite that the `a`-th coordinate of the first
    /// (`second = false`) or second factor feeds into.
    fn targets(&self, a: usize, second: bool) -> ([usize; 2], usize) {
        let m = self.m;
        match (a < m, second) {
            (true, false) => ([self.u + a, self.w + a], 2),
            (true, true) => ([self.v + a, self.w + a], 2),
            (false, false) => ([self.mu + a - m, 0], 1),
            (false, true) => ([self.eta + a - m, 0], 1),
        }
    }

    fn scatter(&self, out: &mut DMatrix<f64>, sub: &DMatrix<f64>, second: bool) {
        for a in 0..sub.nrows() {
            let (ta, na) = self.targets(a, second);
            for b in 0..sub.ncols() {
                let val = sub[(a, b)];
                if val == 0.0 {
                    continue;
                }
                let (tb, nb) = self.targets(b, second);
                for &p in &ta[..na] {
                    for &q in &tb[..nb] {
                        out[(p, q)] += val;
                    }
                }
            }
        }
    }

    /// Symmetric matrix of the composite built from the factors' matrices,
    /// with the coupling `2 <u - v, i w>` contributing `coupling` times its
    /// symmetric matrix.
    pub fn assemble(&self, mf: &DMatrix<f64>, mg: &DMatrix<f64>, coupling: f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.total(), self.total());
        self.scatter(&mut out, mf, false);
        self.scatter(&mut out, mg, true);
        if coupling != 0.0 {
            let n = self.m / 2;
            // <a, i w> = a^T J w with J the matrix of i.
            for k in 0..n {
                for (row, sign) in [(self.u, 1.0), (self.v, -1.0)] {
                    let c = coupling * sign;
                    // J[k, n + k] = -1, J[n + k, k] = 1
                    out[(row + k, self.w + n + k)] -= c;
                    out[(self.w + n + k, row + k)] -= c;
                    out[(row + n + k, self.w + k)] += c;
                    out[(self.w + k, row + n + k)] += c;
                }
            }
        }
        out
    }
}
