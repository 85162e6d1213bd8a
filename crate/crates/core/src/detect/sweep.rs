//! Both routes, merged and counted.

use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

use super::critical::{find_critical_rays, TranslationFamily};
use super::direct::direct_translated_points;
use super::index::{index_data, IndexData};
use super::{angular_distance, sort_records, t_distance, Degeneracy, DetectionConfig, Route, TranslatedPointRecord};
use crate::contact::ContactHamiltonianSpec;
use crate::error::{Error, Result};
use crate::projective::{antipodal_classes, ProjectiveSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sphere,
    Projective,
}

/// Which detection routes to run.
pub type Routes = Route;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    /// Distinct records on the sphere; absent when a continuum was found.
    pub sphere_count: Option<usize>,
    /// Antipodal classes, in projective mode.
    pub projective_count: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum BoundOutcome {
    Met { required: usize, found: usize },
    NotAsserted { reason: String },
    Failed { required: usize, found: usize },
}

/// Wall-clock seconds spent in each stage; `None` for stages that did not run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub direct: Option<f64>,
    /// Subdivision and generating-function construction.
    pub construction: Option<f64>,
    pub critical_rays: Option<f64>,
    pub merge_and_count: f64,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub mode: Mode,
    pub routes: Routes,
    pub records: Vec<TranslatedPointRecord>,
    /// Distinct translations at which records occur, sorted.
    pub event_ts: Vec<f64>,
    pub counts: Counts,
    /// Translations carrying a suspected continuum of degenerate records.
    pub continuum_ts: Vec<f64>,
    pub index_data: IndexData,
    pub bound: BoundOutcome,
    /// Pieces of the subdivided isotopy, when the critical-ray route ran.
    pub pieces: Option<usize>,
    pub direct_count: Option<usize>,
    pub genfun_count: Option<usize>,
    pub timings: StageTimings,
}

impl SweepReport {
    pub fn continuum(&self) -> bool {
        !self.continuum_ts.is_empty()
    }
}

/// Runs the selected routes, merges their records, counts and checks the
/// lower bounds (2 on the sphere, `2n` classes in projective space). Bounds
/// are asserted only when every record is non-degenerate.
pub fn sweep_and_count(
    spec: &ContactHamiltonianSpec,
    mode: Mode,
    routes: Routes,
    cfg: &DetectionConfig,
) -> Result<SweepReport> {
    spec.validate()?;
    cfg.validate()?;
    if mode == Mode::Projective {
        ProjectiveSpec::new(spec.clone())?;
    }
    let index = index_data(spec.n, cfg.rotation_pieces)?;

    let mut timings = StageTimings::default();
    let direct = match routes {
        Route::Direct | Route::Both => {
            let start = Instant::now();
            let recs = direct_translated_points(spec, cfg)?;
            timings.direct = Some(start.elapsed().as_secs_f64());
            Some(recs)
        }
        Route::Genfun => None,
    };
    let (genfun, pieces) = match routes {
        Route::Genfun | Route::Both => {
            let start = Instant::now();
            let fam = TranslationFamily::new(Arc::new(spec.clone()), cfg)?;
            timings.construction = Some(start.elapsed().as_secs_f64());
            let start = Instant::now();
            let recs = find_critical_rays(&fam, cfg)?;
            timings.critical_rays = Some(start.elapsed().as_secs_f64());
            (Some(recs), Some(fam.schedule().len()))
        }
        Route::Direct => (None, None),
    };
    let start = Instant::now();
    let direct_count = direct.as_ref().map(Vec::len);
    let genfun_count = genfun.as_ref().map(Vec::len);

    let mut continuum_ts = Vec::new();
    for recs in [&direct, &genfun].into_iter().flatten() {
        for t in continuum_slices(recs, cfg) {
            if !continuum_ts.iter().any(|&s| t_distance(s, t) < cfg.dedup_t) {
                continuum_ts.push(t);
            }
        }
    }
    continuum_ts.sort_by(f64::total_cmp);

    let mut records = match (direct, genfun) {
        (Some(d), Some(g)) => merge(d, g, cfg, !continuum_ts.is_empty())?,
        (Some(r), None) | (None, Some(r)) => r,
        (None, None) => unreachable!("at least one route runs"),
    };
    sort_records(&mut records);

    let mut event_ts: Vec<f64> = Vec::new();
    for r in &records {
        if !event_ts.iter().any(|&s| t_distance(s, r.t) < cfg.dedup_t) {
            event_ts.push(r.t);
        }
    }
    event_ts.sort_by(f64::total_cmp);

    let continuum = !continuum_ts.is_empty();
    let counts = if continuum {
        Counts::default()
    } else {
        Counts {
            sphere_count: Some(records.len()),
            projective_count: match mode {
                Mode::Projective => Some(antipodal_classes(&records, cfg.dedup_angle, cfg.dedup_t)?.len()),
                Mode::Sphere => None,
            },
        }
    };

    let required = match mode {
        Mode::Sphere => 2,
        Mode::Projective => 2 * spec.n,
    };
    let found = match mode {
        Mode::Sphere => counts.sphere_count,
        Mode::Projective => counts.projective_count,
    };
    let bound = if continuum {
        BoundOutcome::NotAsserted {
            reason: "continuum of degenerate translated points".into(),
        }
    } else if let Some(r) = records.iter().find(|r| r.inconsistent) {
        BoundOutcome::NotAsserted {
            reason: format!("inconsistent critical ray at t = {}", r.t),
        }
    } else if records.iter().any(|r| r.nondegeneracy != Degeneracy::NonDegenerate) {
        BoundOutcome::NotAsserted {
            reason: "degenerate or indeterminate records present".into(),
        }
    } else {
        let found = found.expect("counts exist without a continuum");
        if found >= required {
            BoundOutcome::Met { required, found }
        } else {
            BoundOutcome::Failed { required, found }
        }
    };

    Ok(SweepReport {
        mode,
        routes,
        records,
        event_ts,
        counts,
        continuum_ts,
        index_data: index,
        bound,
        pieces,
        direct_count,
        genfun_count,
        timings: StageTimings {
            merge_and_count: start.elapsed().as_secs_f64(),
            ..timings
        },
    })
}

/// Translations at which degenerate records exceed the continuum threshold.
fn continuum_slices(records: &[TranslatedPointRecord], cfg: &DetectionConfig) -> Vec<f64> {
    let threshold = cfg.continuum_factor * cfg.expected_generic_count;
    let mut slices: Vec<(f64, usize)> = Vec::new();
    for r in records.iter().filter(|r| r.nondegeneracy != Degeneracy::NonDegenerate) {
        match slices.iter_mut().find(|(t, _)| t_distance(*t, r.t) < cfg.dedup_t) {
            Some(s) => s.1 += 1,
            None => slices.push((r.t, 1)),
        }
    }
    slices.into_iter().filter(|s| s.1 > threshold).map(|s| s.0).collect()
}

fn close(a: &TranslatedPointRecord, b: &TranslatedPointRecord, tol: f64) -> bool {
    t_distance(a.t, b.t) <= tol && angular_distance(a.q.coords(), b.q.coords()) <= tol
}

/// Pairs direct and critical-ray records. Every non-degenerate record must
/// find a partner unless a continuum was detected.
fn merge(
    direct: Vec<TranslatedPointRecord>,
    genfun: Vec<TranslatedPointRecord>,
    cfg: &DetectionConfig,
    continuum: bool,
) -> Result<Vec<TranslatedPointRecord>> {
    let mut taken = vec![false; genfun.len()];
    let mut out = Vec::new();
    let mut unmatched = Vec::new();
    for d in direct {
        let best = genfun
            .iter()
            .enumerate()
            .filter(|(j, g)| !taken[*j] && close(&d, g, cfg.match_tol))
            .min_by(|a, b| {
                let da = angular_distance(d.q.coords(), a.1.q.coords()) + t_distance(d.t, a.1.t);
                let db = angular_distance(d.q.coords(), b.1.q.coords()) + t_distance(d.t, b.1.t);
                da.total_cmp(&db)
            })
            .map(|(j, _)| j);
        match best {
            Some(j) => {
                taken[j] = true;
                let mut rec = d;
                rec.route = Route::Both;
                rec.critical_value = genfun[j].critical_value;
                out.push(rec);
            }
            None => {
                if d.is_nondegenerate() {
                    unmatched.push(describe(&d));
                }
                out.push(d);
            }
        }
    }
    for (j, g) in genfun.into_iter().enumerate() {
        if taken[j] {
            continue;
        }
        if g.is_nondegenerate() || g.inconsistent {
            unmatched.push(describe(&g));
        }
        out.push(g);
    }
    if !unmatched.is_empty() && !continuum {
        return Err(Error::RouteDisagreement(format!(
            "{} record(s) without a partner within {:e}: {}",
            unmatched.len(),
            cfg.match_tol,
            unmatched.join("; ")
        )));
    }
    Ok(out)
}

fn describe(r: &TranslatedPointRecord) -> String {
    let q: Vec<String> = r.q.coords().iter().map(|v| format!("{v:.9}")).collect();
    format!(
        "{} t={:.9} q=[{}] residual={:.2e}{}",
        r.route.as_str(),
        r.t,
        q.join(", "),
        r.residual_fixed,
        if r.inconsistent { " inconsistent" } else { "" }
    )
}
