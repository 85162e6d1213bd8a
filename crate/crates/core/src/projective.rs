//! The Z2 quotient `RP^{2n-1} = S^{2n-1} / {q ~ -q}`.
//!
//! Nothing is represented on projective space itself: Hamiltonians are even
//! functions on the sphere, their lifted flows are odd maps, and translated
//! points are paired with their antipodes when reporting.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::contact::{flow_point, ContactHamiltonianSpec, IntegratorSettings};
use crate::detect::{angular_distance, t_distance, TranslatedPointRecord};
use crate::error::{Error, Result};
use crate::genfun::GenFun;
use crate::linsymp::ComplexVector2n;
use crate::sampling::sphere_points;

/// Bound on `max |h(z) - h(-z)|` over the symmetry sample.
pub const SYMMETRY_TOL: f64 = 1e-12;
const SYMMETRY_SAMPLES: usize = 256;

/// A Hamiltonian on the sphere that descends to projective space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjectiveSpec {
    base: ContactHamiltonianSpec,
}

impl ProjectiveSpec {
    pub fn new(base: ContactHamiltonianSpec) -> Result<Self> {
        base.validate()?;
        let defect = symmetry_defect(&base);
        if !(defect <= SYMMETRY_TOL) {
            return Err(Error::NotSymmetric(defect));
        }
        Ok(Self { base })
    }

    pub fn base(&self) -> &ContactHamiltonianSpec {
        &self.base
    }

    pub fn into_base(self) -> ContactHamiltonianSpec {
        self.base
    }
}

/// `max |h(z) - h(-z)|` over a fixed sphere sample.
pub fn symmetry_defect(spec: &ContactHamiltonianSpec) -> f64 {
    spec.symmetry_defect(&sphere_points(spec.n, SYMMETRY_SAMPLES))
}

/// `max |Phi(-z) + Phi(z)|` over the samples, for the time-1 lifted map.
pub fn z2_equivariance_check(
    spec: &ContactHamiltonianSpec,
    samples: &[DVector<f64>],
    settings: &IntegratorSettings,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in samples {
        let plus = flow_point(spec, z, 0.0, 1.0, settings)?;
        let minus = flow_point(spec, &-z, 0.0, 1.0, settings)?;
        worst = worst.max((plus + minus).norm());
    }
    Ok(worst)
}

/// `max |F(-x) - F(x)| / |x|^2` over the samples.
pub fn gf_invariance_check(f: &GenFun, samples: &[DVector<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in samples {
        let d = (f.eval(&-x)? - f.eval(x)?).abs() / x.norm_squared();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// One point of projective space: a record and its antipode.
#[derive(Clone, Debug, PartialEq)]
pub struct AntipodalClass {
    /// Representative with the first significant complex coordinate having
    /// argument in `[0, pi)`.
    pub representative: TranslatedPointRecord,
    pub partner: TranslatedPointRecord,
}

/// Pairs every record with the record at `-q` and the same `t`.
pub fn antipodal_classes(
    records: &[TranslatedPointRecord],
    angle_tol: f64,
    t_tol: f64,
) -> Result<Vec<AntipodalClass>> {
    let mut used = vec![false; records.len()];
    let mut classes = Vec::new();
    for i in 0..records.len() {
        if used[i] {
            continue;
        }
        let neg = -records[i].q.coords();
        let partner = (0..records.len()).find(|&j| {
            j != i
                && !used[j]
                && t_distance(records[i].t, records[j].t) < t_tol
                && angular_distance(&neg, records[j].q.coords()) < angle_tol
        });
        let Some(j) = partner else {
            return Err(Error::UnpairedRecord { t: records[i].t });
        };
        used[i] = true;
        used[j] = true;
        let (a, b) = (&records[i], &records[j]);
        let (rep, other) = if canonical_sign(a.q.coords()) { (a, b) } else { (b, a) };
        classes.push(AntipodalClass {
            representative: rep.clone(),
            partner: other.clone(),
        });
    }
    Ok(classes)
}

/// True when the first complex coordinate of modulus above `1e-8` has
/// argument in `[0, pi)`.
fn canonical_sign(q: &DVector<f64>) -> bool {
    let v = ComplexVector2n::new(q.clone()).expect("record points are valid");
    for j in 0..v.n() {
        let c = v.complex(j);
        if c.norm() > 1e-8 {
            let arg = c.arg();
            return (0.0..std::f64::consts::PI).contains(&arg);
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::PerturbationTerm;
    use crate::detect::{Degeneracy, Route};

    fn record(q: &[f64], t: f64) -> TranslatedPointRecord {
        TranslatedPointRecord {
            q: ComplexVector2n::from_slice(q).unwrap(),
            t,
            residual_fixed: 0.0,
            residual_g: 0.0,
            nondegeneracy: Degeneracy::NonDegenerate,
            route: Route::Direct,
            critical_value: None,
            inconsistent: false,
        }
    }

    #[test]
    fn classes_examples() {
        assert!(antipodal_classes(&[], 1e-4, 1e-5).unwrap().is_empty());
        let recs = [record(&[-0.6, 0.0, 0.8, 0.0], 0.2), record(&[0.6, 0.0, -0.8, 0.0], 0.2)];
        let classes = antipodal_classes(&recs, 1e-4, 1e-5).unwrap();
        assert_eq!(classes.len(), 1);
        // z_1 = -0.6 + 0.8i has argument in (pi/2, pi)
        assert_eq!(classes[0].representative.q.coords()[0], -0.6);
    }

    #[test]
    fn unpaired_record_is_an_error() {
        let recs = [record(&[1.0, 0.0], 0.2), record(&[-1.0, 0.0], 0.3)];
        assert_eq!(
            antipodal_classes(&recs, 1e-4, 1e-5).unwrap_err(),
            Error::UnpairedRecord { t: 0.2 }
        );
    }

    #[test]
    fn odd_perturbation_is_rejected() {
        let even = ContactHamiltonianSpec::new(vec![0.3, 0.7])
            .with_term(PerturbationTerm::new(0.05, vec![1, 0], vec![0, 1]));
        assert!(ProjectiveSpec::new(even).is_ok());
        let odd = ContactHamiltonianSpec::new(vec![0.3, 0.7])
            .with_term(PerturbationTerm::new(0.05, vec![1, 0], vec![0, 0]));
        assert!(matches!(ProjectiveSpec::new(odd), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn flows_of_even_hamiltonians_are_odd() {
        let s = IntegratorSettings::default();
        let samples = sphere_points(2, 8);
        let quad = ContactHamiltonianSpec::new(vec![0.3, 0.7]);
        assert!(z2_equivariance_check(&quad, &samples, &s).unwrap() <= 1e-10);
        let herm = quad.clone().with_term(PerturbationTerm::new(0.05, vec![1, 0], vec![0, 1]));
        assert!(z2_equivariance_check(&herm, &samples, &s).unwrap() <= 1e-8);
        let odd = quad.with_term(PerturbationTerm::new(0.3, vec![1, 0], vec![0, 0]));
        assert!(z2_equivariance_check(&odd, &samples, &s).unwrap() > 1e-3);
    }
}
