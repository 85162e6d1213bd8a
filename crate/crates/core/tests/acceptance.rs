//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! non-zero status if any criterion fails.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use transpoint::contact::{
    integrate_flow, ContactHamiltonianSpec, FlowMap, IntegratorSettings, PerturbationTerm,
};
use transpoint::corpus::{corpus, corpus_entry};
use transpoint::detect::{
    angular_distance, direct_translated_points, find_critical_rays, index_jump,
    nondegeneracy_check, sweep_and_count, t_distance, Degeneracy, DetectionConfig, Mode, Route,
    TranslatedPointRecord, TranslationFamily,
};
use transpoint::genfun::{
    gf_compose, monotonicity_probe, quadratic_form_for_rotation, rotation_family_probe, GenFun,
};
use transpoint::linsymp::{mul_i, phase_rotate, ComplexVector2n};
use transpoint::projective::{antipodal_classes, gf_invariance_check, z2_equivariance_check};
use transpoint::sampling::sphere_points;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(
        elapsed <= limit,
        format!("{what} took {:.2} s, limit {:.0} s", elapsed.as_secs_f64(), limit.as_secs_f64()),
    )
}

/// Uniform points in the cube, pushed to the unit sphere.
fn random_unit_points(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
        if v.norm() > 0.1 {
            out.push(&v / v.norm());
        }
    }
    out
}

fn perturbed_spec() -> Arc<ContactHamiltonianSpec> {
    Arc::new(corpus_entry("diag-0.3-0.7-eps0.05").unwrap().spec)
}

fn leaf(spec: &Arc<ContactHamiltonianSpec>, t0: f64, t1: f64) -> GenFun {
    GenFun::leaf(FlowMap::new(spec.clone(), t0, t1, IntegratorSettings::default()).unwrap())
}

fn rotation(s: f64, n: usize) -> GenFun {
    GenFun::quadratic(quadratic_form_for_rotation(s, n).unwrap()).unwrap()
}

/// Largest `F(lambda x) - lambda^2 F(x)` relative to `lambda^2 |x|^2` over
/// the lifts of sphere samples, slightly moved off the fiber-critical set.
fn homogeneity_defect(f: &GenFun, samples: usize) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    let wiggles = sphere_points(f.total_dim() / 2, samples);
    for (z, w) in sphere_points(f.n(), samples).iter().zip(&wiggles) {
        let (x, _) = f.lift(z).map_err(fail)?;
        let x = x + w * 0.05;
        let base = f.eval(&x).map_err(fail)?;
        for lambda in [0.25, 0.5, 2.0, 3.0] {
            let scaled = f.eval(&(&x * lambda)).map_err(fail)?;
            let d = (scaled - lambda * lambda * base).abs() / (lambda * lambda * x.norm_squared());
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

fn criterion_1() -> Outcome {
    let mut cases = 0;
    for n in 1..=3 {
        for k in [3, 4, 5, 8] {
            let start = Instant::now();
            let jump = index_jump(n, k).map_err(fail)?;
            within(start.elapsed(), Duration::from_secs(1), &format!("n={n} k={k}"))?;
            ensure(jump == 2 * n as i64, format!("n={n} k={k}: jump {jump}, expected {}", 2 * n))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} cases, jump = 2n"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let spec = ContactHamiltonianSpec::constant(2, 1.0);
    let mut worst: f64 = 0.0;
    for z in sphere_points(2, 32) {
        let z = ComplexVector2n::new(z * 1.7).map_err(fail)?;
        let end = integrate_flow(&spec, &z, 0.0, 0.25, &IntegratorSettings::default())
            .map_err(fail)?
            .point;
        let expected = mul_i(z.coords());
        worst = worst.max((end - &expected).norm() / expected.norm());
    }
    within(start.elapsed(), Duration::from_secs(1), "quarter turn")?;
    ensure(worst <= 1e-8, format!("relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let spec = perturbed_spec();
    let settings = IntegratorSettings::default();
    let flow = |a: f64, b: f64| FlowMap::new(spec.clone(), a, b, settings).unwrap();
    let (s1, s2) = (0.11, 0.07);
    let cases: Vec<(&str, GenFun, Box<dyn Fn(&DVector<f64>) -> DVector<f64>>)> = vec![
        (
            "rotation after rotation",
            gf_compose(&rotation(s1, 2), &rotation(s2, 2)).map_err(fail)?,
            Box::new(move |z| phase_rotate(z, -2.0 * PI * (s1 + s2))),
        ),
        (
            "rotation after perturbed",
            gf_compose(&leaf(&spec, 0.0, 0.1), &rotation(s2, 2)).map_err(fail)?,
            {
                let f = flow(0.0, 0.1);
                Box::new(move |z| phase_rotate(&f.apply(z).unwrap(), -2.0 * PI * s2))
            },
        ),
        (
            "perturbed after perturbed",
            gf_compose(&leaf(&spec, 0.0, 0.1), &leaf(&spec, 0.1, 0.2)).map_err(fail)?,
            {
                let f = flow(0.0, 0.1);
                let g = flow(0.1, 0.2);
                Box::new(move |z| g.apply(&f.apply(z).unwrap()).unwrap())
            },
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut report = Vec::new();
    for (name, f, map) in &cases {
        let mut worst: f64 = 0.0;
        for u in random_unit_points(&mut rng, 4, 32) {
            let red = f.reduce(&u).map_err(|e| format!("{name}: {e}"))?;
            let (z, image) = red.cotangent(2).graph_preimage();
            worst = worst.max((map(&z) - image).amax());
        }
        ensure(worst <= 1e-7, format!("{name}: graph defect {worst:e}"))?;
        report.push(format!("{worst:.1e}"));
    }
    within(start.elapsed(), Duration::from_secs(30), "graph checks")?;
    Ok(format!("graph defects {}", report.join(", ")))
}

fn criterion_4() -> Outcome {
    let spec = perturbed_spec();
    let cfg = DetectionConfig::default();
    let fam = TranslationFamily::new(spec.clone(), &cfg).map_err(fail)?;
    let mut functions = vec![
        gf_compose(&rotation(0.11, 2), &rotation(0.07, 2)).map_err(fail)?,
        gf_compose(&leaf(&spec, 0.0, 0.1), &rotation(0.07, 2)).map_err(fail)?,
        gf_compose(&leaf(&spec, 0.0, 0.1), &leaf(&spec, 0.1, 0.2)).map_err(fail)?,
    ];
    for t in [0.0, 0.3, 0.7, 1.0] {
        functions.push(fam.at(t).map_err(fail)?);
    }
    let mut worst: f64 = 0.0;
    for f in &functions {
        worst = worst.max(homogeneity_defect(f, 8)?);
    }
    ensure(worst <= 1e-9, format!("homogeneity defect {worst:e}"))?;
    let records = find_critical_rays(&fam, &cfg).map_err(fail)?;
    ensure(!records.is_empty(), "no critical points detected")?;
    let mut worst_value: f64 = 0.0;
    for r in &records {
        let v = r.critical_value.ok_or("record without critical value")?;
        worst_value = worst_value.max(v);
    }
    ensure(worst_value <= 1e-8, format!("critical value {worst_value:e}"))?;
    Ok(format!(
        "{} functions, homogeneity {worst:.1e}; {} critical points, |F| <= {worst_value:.1e}",
        functions.len(),
        records.len()
    ))
}

/// Diagonal part drawn away from resonance plus splitting terms of degree
/// 2 to 4 with random phases.
fn random_spec(rng: &mut ChaCha8Rng) -> ContactHamiltonianSpec {
    let c1 = rng.gen_range(0.2..0.4);
    let c2 = rng.gen_range(0.55..0.8);
    let monomials: [(&[u32], &[u32]); 5] = [
        (&[2, 0], &[0, 0]),
        (&[0, 2], &[0, 0]),
        (&[2, 0], &[0, 1]),
        (&[1, 1], &[0, 1]),
        (&[3, 0], &[0, 1]),
    ];
    let mut spec = ContactHamiltonianSpec::new(vec![c1, c2]);
    for (z, zbar) in monomials {
        let amp = rng.gen_range(0.02..0.05);
        let phase = rng.gen_range(0.0..2.0 * PI);
        spec = spec.with_term(PerturbationTerm::new(amp, z.to_vec(), zbar.to_vec()).with_phase(phase));
    }
    spec
}

/// Greedy one-to-one matching by angle and translation.
fn bijection(a: &[TranslatedPointRecord], b: &[TranslatedPointRecord], tol: f64) -> Result<f64, String> {
    ensure(a.len() == b.len(), format!("{} direct vs {} critical-point records", a.len(), b.len()))?;
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for r in a {
        let best = (0..b.len())
            .filter(|&j| !used[j])
            .map(|j| {
                let d = angular_distance(r.q.coords(), b[j].q.coords()).max(t_distance(r.t, b[j].t));
                (j, d)
            })
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match best {
            Some((j, d)) if d <= tol => {
                used[j] = true;
                worst = worst.max(d);
            }
            _ => return Err(format!("record at t = {:.6} has no partner", r.t)),
        }
    }
    Ok(worst)
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = DetectionConfig::default();
    let mut summary = Vec::new();
    for case in 0..5 {
        let spec = random_spec(&mut rng);
        let start = Instant::now();
        let direct = direct_translated_points(&spec, &cfg).map_err(fail)?;
        let fam = TranslationFamily::new(Arc::new(spec), &cfg).map_err(fail)?;
        let critical = find_critical_rays(&fam, &cfg).map_err(fail)?;
        within(start.elapsed(), Duration::from_secs(300), &format!("hamiltonian {case}"))?;
        ensure(!direct.is_empty(), format!("hamiltonian {case}: no records"))?;
        let worst = bijection(&direct, &critical, 1e-6).map_err(|e| format!("hamiltonian {case}: {e}"))?;
        summary.push(format!("{}@{worst:.0e}", direct.len()));
    }
    Ok(format!("matched records per hamiltonian: {}", summary.join(", ")))
}

fn criterion_6() -> Outcome {
    let entry = corpus_entry("diag-0.3-0.7-eps0.05").unwrap();
    let report = sweep_and_count(&entry.spec, entry.mode, Route::Direct, &DetectionConfig::default())
        .map_err(fail)?;
    let good = report.records.iter().filter(|r| r.is_nondegenerate()).count();
    ensure(good >= 2, format!("{good} non-degenerate records"))?;
    Ok(format!("{good} non-degenerate records of {}", report.records.len()))
}

fn criterion_7() -> Outcome {
    let entry = corpus_entry("rp3-sym-eps0.05").unwrap();
    let report = sweep_and_count(&entry.spec, Mode::Projective, Route::Direct, &DetectionConfig::default())
        .map_err(fail)?;
    let classes = report.counts.projective_count.ok_or("no class count")?;
    ensure(classes >= 4, format!("{classes} antipodal classes"))?;
    Ok(format!("{classes} antipodal classes, bound {:?}", report.bound))
}

fn criterion_8() -> Outcome {
    let t_values: Vec<f64> = (0..16).map(|j| 0.03 + 0.94 * j as f64 / 15.0).collect();
    let spec = perturbed_spec();
    let cfg = DetectionConfig::default();
    let up = monotonicity_probe(&spec, cfg.delta, &cfg.integrator, 64, &t_values).map_err(fail)?;
    ensure(up.count == 64 * 16, format!("{} probes", up.count))?;
    ensure(up.min > 0.0, format!("positive family probe minimum {:e}", up.min))?;
    let down = rotation_family_probe(2, cfg.rotation_pieces, 64, &t_values).map_err(fail)?;
    ensure(down.max < 0.0, format!("rotation family probe maximum {:e}", down.max))?;
    Ok(format!(
        "positive family min {:.2e}, rotation family max {:.2e}",
        up.min, down.max
    ))
}

fn criterion_9() -> Outcome {
    let cfg = DetectionConfig::default();
    let tols = [1e-8, 3e-8, 1e-7, 3e-7, 1e-6];
    let mut counts = Vec::new();
    for (name, expected) in [
        ("diag-0.3-0.7-unitary", Degeneracy::Degenerate),
        ("diag-0.3-0.7-eps0.05", Degeneracy::NonDegenerate),
    ] {
        let spec = corpus_entry(name).unwrap().spec;
        let records = direct_translated_points(&spec, &cfg).map_err(fail)?;
        ensure(!records.is_empty(), format!("{name}: no records"))?;
        let sample: Vec<_> = records.iter().step_by((records.len() / 16).max(1)).collect();
        for r in &sample {
            for tol in tols {
                let class = nondegeneracy_check(&spec, &r.q, r.t, tol, &cfg.integrator).map_err(fail)?;
                ensure(
                    class == expected,
                    format!("{name}: record at t = {:.6} is {} at tol {tol:e}", r.t, class.as_str()),
                )?;
            }
        }
        counts.push(format!("{name}: {} records", sample.len()));
    }
    Ok(counts.join("; "))
}

fn criterion_10() -> Outcome {
    let cfg = DetectionConfig::default();
    let mut lines = Vec::new();
    for entry in corpus().into_iter().filter(|e| e.mode == Mode::Projective) {
        let name = entry.name;
        let samples: Vec<_> = sphere_points(2, 64).into_iter().map(|z| z * 1.3).collect();
        let eq = z2_equivariance_check(&entry.spec, &samples, &cfg.integrator).map_err(fail)?;
        ensure(eq <= 1e-8, format!("{name}: equivariance defect {eq:e}"))?;
        let fam = TranslationFamily::new(Arc::new(entry.spec.clone()), &cfg).map_err(fail)?;
        let mut inv: f64 = 0.0;
        for t in [0.0, 0.25, 0.6] {
            let f = fam.at(t).map_err(fail)?;
            let mut points = Vec::new();
            for z in sphere_points(2, 16) {
                points.push(fam.lift(&z, t).map_err(fail)?);
            }
            points.extend(sphere_points(f.total_dim() / 2, 16).into_iter().map(|x| x * 0.2));
            inv = inv.max(gf_invariance_check(&f, &points).map_err(fail)?);
        }
        ensure(inv <= 1e-8, format!("{name}: invariance defect {inv:e}"))?;
        let records = direct_translated_points(&entry.spec, &cfg).map_err(fail)?;
        let classes = antipodal_classes(&records, cfg.dedup_angle, cfg.dedup_t).map_err(fail)?;
        ensure(
            2 * classes.len() == records.len(),
            format!("{name}: {} classes for {} records", classes.len(), records.len()),
        )?;
        for c in &classes {
            ensure(
                c.partner.t == c.representative.t || t_distance(c.partner.t, c.representative.t) <= cfg.dedup_t,
                format!("{name}: partner translation differs"),
            )?;
        }
        lines.push(format!("{name}: eq {eq:.1e} inv {inv:.1e} {} classes", classes.len()));
    }
    ensure(!lines.is_empty(), "no projective corpus entries")?;
    Ok(lines.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("index jump equals 2n", criterion_1),
        ("Reeb quarter turn", criterion_2),
        ("composition reduces to the composed graph", criterion_3),
        ("homogeneity and zero critical value", criterion_4),
        ("route equivalence on random hamiltonians", criterion_5),
        ("at least 2 translated points on the sphere", criterion_6),
        ("at least 2n classes in projective space", criterion_7),
        ("monotone families", criterion_8),
        ("non-degeneracy classifier stability", criterion_9),
        ("antipodal symmetry layer", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name} ({detail}; {secs:.1} s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name} ({why}; {secs:.1} s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
