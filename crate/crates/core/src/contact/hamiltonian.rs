use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linsymp::ComplexVector2n;

/// Time dependence `h_t = beta(t) h`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeProfile {
    #[default]
    Constant,
    /// `beta(t) = 1 - cos(2 pi t)` on `[0, 1]`, zero outside. Integrates to 1.
    SmoothBump,
}

impl TimeProfile {
    pub fn factor(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Constant => 1.0,
            TimeProfile::SmoothBump => {
                if (0.0..=1.0).contains(&t) {
                    1.0 - (2.0 * PI * t).cos()
                } else {
                    0.0
                }
            }
        }
    }
}

/// `amplitude * Re(e^{i phase} z^a zbar^b)` restricted to the sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationTerm {
    pub amplitude: f64,
    /// Exponent of `z_j` for each complex coordinate.
    pub z: Vec<u32>,
    /// Exponent of `conj(z_j)` for each complex coordinate.
    pub zbar: Vec<u32>,
    #[serde(default)]
    pub phase: f64,
}

impl PerturbationTerm {
    pub fn new(amplitude: f64, z: Vec<u32>, zbar: Vec<u32>) -> Self {
        Self {
            amplitude,
            z,
            zbar,
            phase: 0.0,
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn degree(&self) -> u32 {
        self.z.iter().chain(&self.zbar).sum()
    }

    /// Exponents over the variables `(z_1..z_n, zbar_1..zbar_n)`.
    fn exponents(&self) -> Vec<i64> {
        self.z.iter().chain(&self.zbar).map(|&e| e as i64).collect()
    }
}

/// A contact Hamiltonian on `S^{2n-1}`:
/// `h(z) = sum_j c_j |z_j|^2 + sum_k a_k Re(e^{i phi_k} z^{a_k} zbar^{b_k})`,
/// scaled in time by a [`TimeProfile`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactHamiltonianSpec {
    pub n: usize,
    #[serde(rename = "quadratic")]
    pub quadratic_coeffs: Vec<f64>,
    #[serde(default, rename = "terms")]
    pub perturbation_terms: Vec<PerturbationTerm>,
    #[serde(default)]
    pub time_profile: TimeProfile,
}

/// Value, gradient and Hessian of the autonomous lifted Hamiltonian at a point.
#[derive(Clone, Debug)]
pub struct HamiltonianJet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl ContactHamiltonianSpec {
    pub fn new(quadratic_coeffs: Vec<f64>) -> Self {
        Self {
            n: quadratic_coeffs.len(),
            quadratic_coeffs,
            perturbation_terms: Vec::new(),
            time_profile: TimeProfile::Constant,
        }
    }

    /// `h = c` on the sphere.
    pub fn constant(n: usize, c: f64) -> Self {
        Self::new(vec![c; n])
    }

    pub fn with_term(mut self, term: PerturbationTerm) -> Self {
        self.perturbation_terms.push(term);
        self
    }

    pub fn with_profile(mut self, profile: TimeProfile) -> Self {
        self.time_profile = profile;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if self.quadratic_coeffs.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "quadratic needs {} coefficients, got {}",
                self.n,
                self.quadratic_coeffs.len()
            )));
        }
        if self.quadratic_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("quadratic coefficients"));
        }
        for (k, term) in self.perturbation_terms.iter().enumerate() {
            if term.z.len() != self.n || term.zbar.len() != self.n {
                return Err(Error::InvalidArgument(format!(
                    "term {k}: exponent lists must have length {}",
                    self.n
                )));
            }
            if !term.amplitude.is_finite() || !term.phase.is_finite() {
                return Err(Error::NonFinite("perturbation term"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// True when every perturbation monomial has degree 2; the lifted
    /// Hamiltonian is then a quadratic form and the flow is linear.
    pub fn is_quadratic(&self) -> bool {
        self.perturbation_terms.iter().all(|t| t.degree() == 2)
    }

    /// `H(z) = |z|^2 h(z/|z|)` without the time factor.
    pub fn lifted_value(&self, z: &DVector<f64>) -> f64 {
        let n = self.n;
        let r2 = z.norm_squared();
        let mut value: f64 = (0..n)
            .map(|j| self.quadratic_coeffs[j] * (z[j] * z[j] + z[n + j] * z[n + j]))
            .sum();
        if self.perturbation_terms.is_empty() {
            return value;
        }
        let w = wirtinger_vars(z, n);
        for term in &self.perturbation_terms {
            let m = monomial(&w, &term.exponents());
            let p = term.amplitude * (Complex64::from_polar(1.0, term.phase) * m).re;
            let s = (2.0 - term.degree() as f64) / 2.0;
            value += p * r2.powf(s);
        }
        value
    }

    /// Value, gradient and Hessian of the autonomous lifted Hamiltonian.
    pub fn lifted_jet(&self, z: &DVector<f64>) -> HamiltonianJet {
        let dim = self.dim();
        let mut scratch = JetScratch::new(self);
        let mut grad = vec![0.0; dim];
        let mut hess = vec![0.0; dim * dim];
        let value = self.jet_into(z.as_slice(), &mut scratch, &mut grad, Some(&mut hess));
        HamiltonianJet {
            value,
            grad: DVector::from_vec(grad),
            hess: DMatrix::from_vec(dim, dim, hess),
        }
    }

    /// Allocation-free jet evaluation used by the integrator. `hess` is a
    /// dense `dim x dim` buffer (symmetric, so the layout is irrelevant).
    pub(crate) fn jet_into(
        &self,
        z: &[f64],
        scratch: &mut JetScratch,
        grad: &mut [f64],
        mut hess: Option<&mut [f64]>,
    ) -> f64 {
        let n = self.n;
        let dim = 2 * n;
        grad.iter_mut().for_each(|g| *g = 0.0);
        if let Some(h) = hess.as_deref_mut() {
            h.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut value = 0.0;
        for j in 0..n {
            let c = self.quadratic_coeffs[j];
            value += c * (z[j] * z[j] + z[n + j] * z[n + j]);
            grad[j] = 2.0 * c * z[j];
            grad[n + j] = 2.0 * c * z[n + j];
            if let Some(h) = hess.as_deref_mut() {
                h[j * dim + j] = 2.0 * c;
                h[(n + j) * dim + n + j] = 2.0 * c;
            }
        }
        if self.perturbation_terms.is_empty() {
            return value;
        }

        let JetScratch { w, exps, e2, dm, d2m, gp, hp } = scratch;
        for j in 0..n {
            w[j] = Complex64::new(z[j], z[n + j]);
            w[n + j] = Complex64::new(z[j], -z[n + j]);
        }
        let r2: f64 = z.iter().map(|v| v * v).sum();
        let zero = Complex64::new(0.0, 0.0);
        let want_hess = hess.is_some();

        for (term, e) in self.perturbation_terms.iter().zip(exps.iter()) {
            let rot = Complex64::from_polar(term.amplitude, term.phase);
            for k in 0..dim {
                dm[k] = if e[k] == 0 {
                    zero
                } else {
                    e2.copy_from_slice(e);
                    e2[k] -= 1;
                    monomial(w, e2) * e[k] as f64
                };
            }
            if want_hess {
                d2m.iter_mut().for_each(|v| *v = zero);
                for k in 0..dim {
                    if e[k] == 0 {
                        continue;
                    }
                    for l in k..dim {
                        let coeff = e[k] * if k == l { e[l] - 1 } else { e[l] };
                        if coeff == 0 {
                            continue;
                        }
                        e2.copy_from_slice(e);
                        e2[k] -= 1;
                        e2[l] -= 1;
                        let val = monomial(w, e2) * coeff as f64;
                        d2m[k * dim + l] = val;
                        d2m[l * dim + k] = val;
                    }
                }
            }
            let p = (rot * monomial(w, e)).re;
            for r in 0..dim {
                let mut acc = zero;
                for (k, coef) in real_derivative_row(r, n) {
                    acc += coef * dm[k];
                }
                gp[r] = (rot * acc).re;
            }
            if want_hess {
                for r in 0..dim {
                    let row_r = real_derivative_row(r, n);
                    for s in r..dim {
                        let row_s = real_derivative_row(s, n);
                        let mut acc = zero;
                        for &(k, ck) in &row_r {
                            for &(l, cl) in &row_s {
                                acc += ck * cl * d2m[k * dim + l];
                            }
                        }
                        let v = (rot * acc).re;
                        hp[r * dim + s] = v;
                        hp[s * dim + r] = v;
                    }
                }
            }

            let d = term.degree();
            if d == 2 {
                value += p;
                for r in 0..dim {
                    grad[r] += gp[r];
                }
                if let Some(h) = hess.as_deref_mut() {
                    for (hv, pv) in h.iter_mut().zip(hp.iter()) {
                        *hv += pv;
                    }
                }
                continue;
            }
            // Multiply by S = r2^s with s = (2 - d) / 2.
            let s = (2.0 - d as f64) / 2.0;
            let sv = r2.powf(s);
            let s1 = s * r2.powf(s - 1.0);
            let s2 = 4.0 * s * (s - 1.0) * r2.powf(s - 2.0);
            value += p * sv;
            for r in 0..dim {
                grad[r] += gp[r] * sv + 2.0 * s1 * z[r] * p;
            }
            if let Some(h) = hess.as_deref_mut() {
                for r in 0..dim {
                    for c in 0..dim {
                        let gs_r = 2.0 * s1 * z[r];
                        let gs_c = 2.0 * s1 * z[c];
                        let mut hs = s2 * z[r] * z[c];
                        if r == c {
                            hs += 2.0 * s1;
                        }
                        h[r * dim + c] += hp[r * dim + c] * sv + gp[r] * gs_c + gs_r * gp[c] + hs * p;
                    }
                }
            }
        }
        value
    }

    /// `h_t(q)` at a point of the sphere (the argument is normalized).
    pub fn eval_sphere(&self, q: &DVector<f64>, t: f64) -> f64 {
        let u = q / q.norm();
        self.time_profile.factor(t) * self.lifted_value(&u)
    }

    /// `max |h(z) - h(-z)|` over the given sphere points.
    pub fn symmetry_defect(&self, samples: &[DVector<f64>]) -> f64 {
        samples
            .iter()
            .map(|q| (self.lifted_value(q) - self.lifted_value(&-q)).abs())
            .fold(0.0, f64::max)
    }

    /// Sampled `(min, max)` of the autonomous part of `h` on the sphere.
    pub fn sampled_range(&self, samples: &[DVector<f64>]) -> (f64, f64) {
        samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| {
            let v = self.lifted_value(&(q / q.norm()));
            (lo.min(v), hi.max(v))
        })
    }
}

/// `H_t(z) = |z|^2 h_t(z/|z|)`; homogeneous of degree 2, undefined at 0.
pub fn lift_hamiltonian(spec: &ContactHamiltonianSpec, z: &ComplexVector2n, t: f64) -> Result<f64> {
    if z.coords().len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: z.coords().len(),
        });
    }
    if z.norm() == 0.0 {
        return Err(Error::ConeTip);
    }
    Ok(spec.time_profile.factor(t) * spec.lifted_value(z.coords()))
}

/// Reusable buffers for [`ContactHamiltonianSpec::jet_into`].
pub(crate) struct JetScratch {
    w: Vec<Complex64>,
    exps: Vec<Vec<i64>>,
    e2: Vec<i64>,
    dm: Vec<Complex64>,
    d2m: Vec<Complex64>,
    gp: Vec<f64>,
    hp: Vec<f64>,
}

impl JetScratch {
    pub(crate) fn new(spec: &ContactHamiltonianSpec) -> Self {
        let dim = spec.dim();
        let zero = Complex64::new(0.0, 0.0);
        Self {
            w: vec![zero; dim],
            exps: spec.perturbation_terms.iter().map(|t| t.exponents()).collect(),
            e2: vec![0; dim],
            dm: vec![zero; dim],
            d2m: vec![zero; dim * dim],
            gp: vec![0.0; dim],
            hp: vec![0.0; dim * dim],
        }
    }
}

fn wirtinger_vars(z: &DVector<f64>, n: usize) -> Vec<Complex64> {
    let mut w = Vec::with_capacity(2 * n);
    for j in 0..n {
        w.push(Complex64::new(z[j], z[n + j]));
    }
    for j in 0..n {
        w.push(Complex64::new(z[j], -z[n + j]));
    }
    w
}

fn monomial(w: &[Complex64], e: &[i64]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (wk, &ek) in w.iter().zip(e) {
        if ek > 0 {
            acc *= wk.powu(ek as u32);
        }
    }
    acc
}

/// Real partial `d/dx_j = d/dz_j + d/dzbar_j`, `d/dy_j = i d/dz_j - i d/dzbar_j`.
fn real_derivative_row(r: usize, n: usize) -> [(usize, Complex64); 2] {
    if r < n {
        [(r, Complex64::new(1.0, 0.0)), (n + r, Complex64::new(1.0, 0.0))]
    } else {
        let j = r - n;
        [(j, Complex64::new(0.0, 1.0)), (n + j, Complex64::new(0.0, -1.0))]
    }
}
