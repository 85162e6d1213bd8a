use std::sync::Arc;

use transpoint::contact::{conformal_factor, conformal_factor_pullback, ContactHamiltonianSpec, FlowMap};
use transpoint::corpus::corpus_entry;
use transpoint::detect::{
    find_critical_rays, sweep_and_count, t_distance, BoundOutcome, DetectionConfig, Mode, Route,
    TranslationFamily,
};
use transpoint::linsymp::phase_rotate;
use transpoint::projective::antipodal_classes;
use transpoint::sampling::sphere_points;
use transpoint::Error;

fn cfg() -> DetectionConfig {
    DetectionConfig {
        seeds: 96,
        ..DetectionConfig::default()
    }
}

fn near(ts: &[f64], t: f64, tol: f64) -> bool {
    ts.iter().any(|&s| t_distance(s, t) <= tol)
}

#[test]
fn unitary_diagonal_events_sit_at_the_weights_on_both_routes() {
    let spec = corpus_entry("diag-0.3-0.7-unitary").unwrap().spec;
    for route in [Route::Direct, Route::Genfun] {
        let report = sweep_and_count(&spec, Mode::Sphere, route, &cfg()).unwrap();
        assert!(!report.records.is_empty(), "{route:?}");
        for t in [0.3, 0.7] {
            assert!(near(&report.event_ts, t, 1e-6), "{route:?}: no event at {t}: {:?}", report.event_ts);
        }
        for t in &report.event_ts {
            assert!(t_distance(*t, 0.3) <= 1e-6 || t_distance(*t, 0.7) <= 1e-6, "{route:?}: stray event {t}");
        }
        // each event is a whole circle of fixed points
        assert!(report.records.iter().all(|r| !r.is_nondegenerate()));
        assert!(matches!(report.bound, BoundOutcome::NotAsserted { .. }));
    }
}

#[test]
fn constant_hamiltonian_is_reported_as_a_continuum() {
    let spec = corpus_entry("constant-0.5").unwrap().spec;
    let report = sweep_and_count(&spec, Mode::Sphere, Route::Direct, &cfg()).unwrap();
    assert!(report.continuum());
    assert!(near(&report.continuum_ts, 0.5, 1e-6), "{:?}", report.continuum_ts);
    assert_eq!(report.counts.sphere_count, None);
    assert!(matches!(report.bound, BoundOutcome::NotAsserted { .. }));
}

#[test]
fn pure_rotation_fixes_everything_at_its_own_translation() {
    let c = 0.35;
    let spec = ContactHamiltonianSpec::constant(2, c);
    let report = sweep_and_count(&spec, Mode::Sphere, Route::Direct, &cfg()).unwrap();
    for r in &report.records {
        assert!(t_distance(r.t, c) <= 1e-6, "t = {}", r.t);
        assert!(r.residual_fixed <= 1e-8);
    }
    // the time-one map is the phase rotation by 2 pi c
    let map = FlowMap::new(Arc::new(spec), 0.0, 1.0, cfg().integrator).unwrap();
    for q in sphere_points(2, 8) {
        let expected = phase_rotate(&q, 2.0 * std::f64::consts::PI * c);
        assert!((map.apply(&q).unwrap() - expected).norm() <= 1e-10);
    }
    assert!(report.continuum());
}

#[test]
fn both_routes_agree_on_the_perturbed_example() {
    let spec = corpus_entry("diag-0.3-0.7-eps0.05").unwrap().spec;
    let report = sweep_and_count(&spec, Mode::Sphere, Route::Both, &cfg()).unwrap();
    assert_eq!(report.direct_count, report.genfun_count);
    assert!(report.records.len() >= 2);
    assert!(matches!(report.bound, BoundOutcome::Met { required: 2, .. }), "{:?}", report.bound);
    assert_eq!(report.pieces, Some(8));
}

#[test]
fn records_pass_both_residual_checks() {
    let spec = Arc::new(corpus_entry("diag-0.3-0.7-eps0.05").unwrap().spec);
    let c = cfg();
    let fam = TranslationFamily::new(spec.clone(), &c).unwrap();
    let records = find_critical_rays(&fam, &c).unwrap();
    assert!(!records.is_empty());
    for r in &records {
        assert!(!r.inconsistent);
        assert!(r.residual_fixed <= 1e-8, "{}", r.residual_fixed);
        assert!(r.critical_value.unwrap() <= 1e-8);
        // recompute the conformal factor both ways
        let g = conformal_factor(&spec, &r.q, 1.0, &c.integrator).unwrap();
        let g_pull = conformal_factor_pullback(&spec, &r.q, 1.0, &c.integrator).unwrap();
        assert!(g.abs() <= 1e-6 && g_pull.abs() <= 1e-6, "{g} {g_pull}");
    }
}

#[test]
fn projective_records_close_under_the_antipodal_map() {
    let spec = corpus_entry("rp3-sym-eps0.05").unwrap().spec;
    let c = cfg();
    let report = sweep_and_count(&spec, Mode::Projective, Route::Direct, &c).unwrap();
    let classes = antipodal_classes(&report.records, c.dedup_angle, c.dedup_t).unwrap();
    assert_eq!(2 * classes.len(), report.records.len());
    assert_eq!(report.counts.projective_count, Some(classes.len()));
    assert!(classes.len() >= 4);
    for class in &classes {
        let sum = class.representative.q.coords() + class.partner.q.coords();
        assert!(sum.norm() <= 1e-6);
    }
}

#[test]
fn projective_mode_rejects_asymmetric_hamiltonians() {
    let spec = corpus_entry("diag-0.3-0.7-eps0.05").unwrap().spec;
    let err = sweep_and_count(&spec, Mode::Projective, Route::Direct, &cfg()).unwrap_err();
    assert!(matches!(err, Error::NotSymmetric(_)), "{err}");
}
