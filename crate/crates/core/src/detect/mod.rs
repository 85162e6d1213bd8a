//! Detection, classification and counting of translated points.
//!
//! A unit vector `q` is a translated point of the time-1 map with translation
//! `t` when `e^{-2 pi i t} Phi(q) = q` for the lifted map `Phi`; the conformal
//! factor then vanishes automatically because `|Phi(q)| = |q|`. Two
//! independent routes find them: Newton on that equation directly, and
//! Newton for critical rays of the generating family of `a_t o Phi`.

mod classify;
mod critical;
mod direct;
mod index;
mod sweep;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::contact::IntegratorSettings;
use crate::error::{Error, Result};
use crate::linsymp::{phase_rotate, ComplexVector2n};

pub use classify::{nondegeneracy_check, Degeneracy};
pub use critical::{find_critical_rays, TranslationFamily};
pub use direct::direct_translated_points;
pub use index::{index_data, index_jump, IndexData};
pub use sweep::{sweep_and_count, BoundOutcome, Counts, Mode, Routes, StageTimings, SweepReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Genfun,
    Direct,
    Both,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::Genfun => "genfun",
            Route::Direct => "direct",
            Route::Both => "both",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslatedPointRecord {
    /// Unit vector on the sphere.
    pub q: ComplexVector2n,
    /// Translation in `[0, 1)`, as a fraction of a Hopf circle.
    pub t: f64,
    /// `|e^{-2 pi i t} Phi(q) - q|`.
    pub residual_fixed: f64,
    /// `|g(q)|`, the larger of the norm and pullback evaluations.
    pub residual_g: f64,
    pub nondegeneracy: Degeneracy,
    pub route: Route,
    /// `|F_t(x)| / |x|^2` at the critical point, for records found as
    /// critical rays.
    pub critical_value: Option<f64>,
    /// Set when a critical ray reduces to a base point that fails the direct
    /// residual check.
    pub inconsistent: bool,
}

impl TranslatedPointRecord {
    pub fn is_nondegenerate(&self) -> bool {
        self.nondegeneracy == Degeneracy::NonDegenerate
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionConfig {
    /// Sphere seeds, closed under `q -> -q`; must be even.
    pub seeds: usize,
    /// Uniform grid on `[0, 1)` used to pick starting translations.
    pub t_grid: usize,
    /// Local minima of the merit over the grid tried per seed.
    pub starts_per_seed: usize,
    /// Starts with merit `|e^{-2 pi i t} Phi(q) - q|` above this are skipped.
    pub merit_gate: f64,
    pub newton_tol: f64,
    pub max_newton_iter: usize,
    /// Acceptance bound on both residuals of a record.
    pub residual_tol: f64,
    /// Records closer than this in angle and `dedup_t` in `t` coincide.
    pub dedup_angle: f64,
    pub dedup_t: f64,
    /// Singular values below this count toward the kernel.
    pub nondegeneracy_tol: f64,
    pub expected_generic_count: usize,
    /// A t-slice with more than `continuum_factor * expected_generic_count`
    /// distinct degenerate records is reported as a continuum.
    pub continuum_factor: usize,
    /// Cross-route matching tolerance in angle and in `t`.
    pub match_tol: f64,
    /// Bound on `|F_t(x)| / |x|^2` at critical points.
    pub critical_value_tol: f64,
    /// Pieces of the rotation family `A_t`.
    pub rotation_pieces: usize,
    /// C^1-smallness threshold for the subdivision of the isotopy.
    pub delta: f64,
    pub integrator: IntegratorSettings,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            seeds: 256,
            t_grid: 64,
            starts_per_seed: 2,
            merit_gate: 0.5,
            newton_tol: 1e-11,
            max_newton_iter: 40,
            residual_tol: 1e-8,
            dedup_angle: 1e-4,
            dedup_t: 1e-5,
            nondegeneracy_tol: 1e-7,
            expected_generic_count: 2,
            continuum_factor: 10,
            match_tol: 1e-6,
            critical_value_tol: 1e-8,
            rotation_pieces: 4,
            delta: 2.0,
            integrator: IntegratorSettings::default(),
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("merit_gate", self.merit_gate),
            ("newton_tol", self.newton_tol),
            ("residual_tol", self.residual_tol),
            ("dedup_angle", self.dedup_angle),
            ("dedup_t", self.dedup_t),
            ("nondegeneracy_tol", self.nondegeneracy_tol),
            ("match_tol", self.match_tol),
            ("critical_value_tol", self.critical_value_tol),
            ("delta", self.delta),
            ("integrator.norm_floor", self.integrator.norm_floor),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.seeds < 8 || !self.seeds.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "seeds must be even and at least 8, got {}",
                self.seeds
            )));
        }
        if self.t_grid < 8 {
            return Err(Error::InvalidArgument(format!("t_grid must be at least 8, got {}", self.t_grid)));
        }
        if self.starts_per_seed == 0 || self.max_newton_iter == 0 {
            return Err(Error::InvalidArgument("starts_per_seed and max_newton_iter must be positive".into()));
        }
        if self.rotation_pieces < 3 {
            return Err(Error::TooFewPieces(self.rotation_pieces));
        }
        if self.integrator.steps_per_unit == 0 {
            return Err(Error::InvalidArgument("integrator.steps_per_unit must be positive".into()));
        }
        Ok(())
    }
}

/// `e^{-2 pi i t} w`.
pub(crate) fn unrotate(w: &DVector<f64>, t: f64) -> DVector<f64> {
    phase_rotate(w, -2.0 * PI * t)
}

/// `t` reduced to `[0, 1)`, with values within rounding of 1 sent to 0.
pub(crate) fn wrap_t(t: f64) -> f64 {
    let r = t.rem_euclid(1.0);
    if r >= 1.0 - 1e-12 {
        0.0
    } else {
        r
    }
}

/// Distance on the circle `R / Z`.
pub fn t_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Angle between two unit vectors.
pub fn angular_distance(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    // 2 asin(|a - b| / 2) is accurate for small angles, unlike acos.
    2.0 * (0.5 * (a - b).norm()).min(1.0).asin()
}

/// Start points: local minima of the merit over the t grid, best first.
pub(crate) fn starting_translations(
    q: &DVector<f64>,
    image: &DVector<f64>,
    cfg: &DetectionConfig,
) -> Vec<f64> {
    let m = cfg.t_grid;
    let merit: Vec<f64> = (0..m)
        .map(|j| (unrotate(image, j as f64 / m as f64) - q).norm())
        .collect();
    let mut minima: Vec<(f64, f64)> = (0..m)
        .filter(|&j| {
            let prev = merit[(j + m - 1) % m];
            let next = merit[(j + 1) % m];
            merit[j] <= prev && merit[j] <= next && merit[j] <= cfg.merit_gate
        })
        .map(|j| (merit[j], j as f64 / m as f64))
        .collect();
    minima.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    minima.into_iter().take(cfg.starts_per_seed).map(|(_, t)| t).collect()
}

/// Merges records that coincide, keeping the one with the smaller residual,
/// and returns them sorted by `(t, q)`.
pub(crate) fn dedup_records(
    records: Vec<TranslatedPointRecord>,
    cfg: &DetectionConfig,
) -> Vec<TranslatedPointRecord> {
    let mut kept: Vec<TranslatedPointRecord> = Vec::new();
    for r in records {
        match kept.iter_mut().find(|k| {
            t_distance(k.t, r.t) < cfg.dedup_t
                && angular_distance(k.q.coords(), r.q.coords()) < cfg.dedup_angle
        }) {
            Some(k) => {
                if r.residual_fixed < k.residual_fixed {
                    *k = r;
                }
            }
            None => kept.push(r),
        }
    }
    sort_records(&mut kept);
    kept
}

pub(crate) fn sort_records(records: &mut [TranslatedPointRecord]) {
    records.sort_by(|a, b| {
        a.t.total_cmp(&b.t).then_with(|| {
            a.q.coords()
                .iter()
                .zip(b.q.coords().iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
}
