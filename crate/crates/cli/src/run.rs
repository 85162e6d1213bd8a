//! Pipeline orchestration and report emission.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

use transpoint::contact::{integrate_flow, ContactHamiltonianSpec, IntegratorSettings};
use transpoint::detect::{
    sweep_and_count, BoundOutcome, Counts, IndexData, Mode, Route, StageTimings, SweepReport,
    TranslatedPointRecord,
};
use transpoint::linsymp::{mul_i, ComplexVector2n};
use transpoint::projective::antipodal_classes;
use transpoint::sampling::sphere_points;

use crate::config::{ConfigError, RunConfig};

/// Process exit statuses. Scripts depend on these values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitStatus {
    Success = 0,
    /// Any failure not listed below, including I/O.
    Error = 1,
    /// Degenerate, inconsistent or continuous records; the lower bound was not checked.
    BoundsNotAsserted = 2,
    RouteDisagreement = 3,
    InvalidConfig = 4,
    CalibrationFailed = 5,
    /// The isotopy needed more pieces than the subdivision cap allows.
    SubdivisionFailed = 6,
    /// All records were non-degenerate and fewer than the bound were found.
    BoundFailed = 7,
    /// A numerical stage failed (non-convergence, norm collapse, singular forms).
    NumericalFailure = 8,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error(transparent)]
    Core(#[from] transpoint::Error),
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl RunError {
    pub fn status(&self) -> ExitStatus {
        use transpoint::Error as E;
        match self {
            RunError::Config(_) => ExitStatus::InvalidConfig,
            RunError::Calibration(_) => ExitStatus::CalibrationFailed,
            RunError::Output { .. } => ExitStatus::Error,
            RunError::Core(e) => match e {
                E::RouteDisagreement(_) => ExitStatus::RouteDisagreement,
                E::PieceCap { .. } => ExitStatus::SubdivisionFailed,
                E::InvalidArgument(_)
                | E::DimensionMismatch { .. }
                | E::TooFewPieces(_)
                | E::NotSymmetric(_) => ExitStatus::InvalidConfig,
                _ => ExitStatus::NumericalFailure,
            },
        }
    }
}

/// Command-line overrides of scalar config fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub routes: Option<Route>,
    pub mode: Option<Mode>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), ConfigError> {
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if let Some(r) = self.routes {
            cfg.routes = r;
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        cfg.validate()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CalibrationReport {
    /// Max relative error of `h = 1` over a quarter period against `i z`.
    pub reeb_quarter_turn_error: f64,
    /// Max change of the time-one map when the step count is doubled.
    pub resolution_defect: f64,
    pub reeb_tol: f64,
    pub resolution_tol: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecordRow {
    pub q: Vec<f64>,
    pub t: f64,
    pub residual_fixed: f64,
    pub residual_g: f64,
    /// "true", "false" or "indeterminate".
    pub nondegenerate: &'static str,
    pub route: &'static str,
    pub critical_value: Option<f64>,
    pub inconsistent: bool,
}

impl From<&TranslatedPointRecord> for RecordRow {
    fn from(r: &TranslatedPointRecord) -> Self {
        Self {
            q: r.q.coords().iter().copied().collect(),
            t: r.t,
            residual_fixed: r.residual_fixed,
            residual_g: r.residual_g,
            nondegenerate: r.nondegeneracy.as_str(),
            route: r.route.as_str(),
            critical_value: r.critical_value,
            inconsistent: r.inconsistent,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassRow {
    pub representative: Vec<f64>,
    pub t: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub mode: Mode,
    pub routes: Route,
    pub record_count: usize,
    pub direct_count: Option<usize>,
    pub genfun_count: Option<usize>,
    pub pieces: Option<usize>,
    pub event_ts: Vec<f64>,
    pub counts: Counts,
    pub continuum: bool,
    pub continuum_ts: Vec<f64>,
    pub index_data: IndexData,
    pub bound: BoundOutcome,
    pub classes: Option<Vec<ClassRow>>,
    pub records: Vec<RecordRow>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub calibration: f64,
    pub stages: StageTimings,
    pub output: f64,
    pub total: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub tool_version: &'static str,
    /// SHA-256 of the effective configuration, serialized as JSON.
    pub config_sha256: String,
    pub config: RunConfig,
    pub calibration: Option<CalibrationReport>,
    pub sweep: Option<SweepSummary>,
    pub timings: Timings,
    pub exit_status: ExitStatus,
    pub exit_code: i32,
    pub error: Option<String>,
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let json = serde_json::to_vec(cfg).expect("config serializes");
    format!("{:x}", Sha256::digest(&json))
}

/// Checks the integrator against the exact Reeb flow and against a run with
/// twice the resolution on the configured Hamiltonian.
pub fn calibration_check(cfg: &RunConfig) -> Result<CalibrationReport, RunError> {
    let settings = cfg.detection.integrator;
    let reeb = ContactHamiltonianSpec::constant(cfg.n, 1.0);
    let spec = cfg.spec();
    let finer = IntegratorSettings {
        steps_per_unit: 2 * settings.steps_per_unit,
        ..settings
    };
    let mut reeb_err: f64 = 0.0;
    let mut resolution: f64 = 0.0;
    for z in sphere_points(cfg.n, cfg.calibration.samples) {
        let z = ComplexVector2n::new(z)?;
        let end = integrate_flow(&reeb, &z, 0.0, 0.25, &settings)?.point;
        let expected = mul_i(z.coords());
        reeb_err = reeb_err.max((end - &expected).norm() / expected.norm());
        let coarse = integrate_flow(&spec, &z, 0.0, 1.0, &settings)?.point;
        let fine = integrate_flow(&spec, &z, 0.0, 1.0, &finer)?.point;
        resolution = resolution.max((coarse - fine).norm());
    }
    Ok(CalibrationReport {
        reeb_quarter_turn_error: reeb_err,
        resolution_defect: resolution,
        reeb_tol: cfg.calibration.reeb_tol,
        resolution_tol: cfg.calibration.resolution_tol,
        passed: reeb_err <= cfg.calibration.reeb_tol && resolution <= cfg.calibration.resolution_tol,
    })
}

fn summarize(cfg: &RunConfig, sweep: &SweepReport) -> Result<SweepSummary, RunError> {
    let classes = match sweep.mode {
        Mode::Projective if !sweep.continuum() => Some(
            antipodal_classes(&sweep.records, cfg.detection.dedup_angle, cfg.detection.dedup_t)?
                .iter()
                .map(|c| ClassRow {
                    representative: c.representative.q.coords().iter().copied().collect(),
                    t: c.representative.t,
                })
                .collect(),
        ),
        _ => None,
    };
    Ok(SweepSummary {
        mode: sweep.mode,
        routes: sweep.routes,
        record_count: sweep.records.len(),
        direct_count: sweep.direct_count,
        genfun_count: sweep.genfun_count,
        pieces: sweep.pieces,
        event_ts: sweep.event_ts.clone(),
        counts: sweep.counts,
        continuum: sweep.continuum(),
        continuum_ts: sweep.continuum_ts.clone(),
        index_data: sweep.index_data,
        bound: sweep.bound.clone(),
        classes,
        records: sweep.records.iter().map(RecordRow::from).collect(),
    })
}

fn bound_status(bound: &BoundOutcome) -> ExitStatus {
    match bound {
        BoundOutcome::Met { .. } => ExitStatus::Success,
        BoundOutcome::NotAsserted { .. } => ExitStatus::BoundsNotAsserted,
        BoundOutcome::Failed { .. } => ExitStatus::BoundFailed,
    }
}

/// Writes the records table: `q_1..q_2n, t, residual_fixed, residual_g,
/// nondegenerate, route`, one row per record in report order.
pub fn write_records_csv(path: &Path, n: usize, records: &[RecordRow]) -> Result<(), RunError> {
    let out_err = |e: &dyn std::fmt::Display| RunError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| out_err(&e))?;
    let mut header: Vec<String> = (1..=2 * n).map(|j| format!("q{j}")).collect();
    header.extend(["t", "residual_fixed", "residual_g", "nondegenerate", "route"].map(String::from));
    w.write_record(&header).map_err(|e| out_err(&e))?;
    for r in records {
        // shortest round-trip formatting keeps reruns byte-identical
        let mut row: Vec<String> = r.q.iter().map(|v| format!("{v:e}")).collect();
        row.push(format!("{:e}", r.t));
        row.push(format!("{:e}", r.residual_fixed));
        row.push(format!("{:e}", r.residual_g));
        row.push(r.nondegenerate.to_string());
        row.push(r.route.to_string());
        w.write_record(&row).map_err(|e| out_err(&e))?;
    }
    w.flush().map_err(|e| out_err(&e))
}

fn write_report(path: &Path, report: &RunReport) -> Result<(), RunError> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(path, json + "\n").map_err(|e| RunError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Runs calibration, detection and counting, then writes the report and the
/// records table into the output directory. Failures after the output
/// directory exists are still written to the report.
pub fn run(cfg: &RunConfig) -> Result<RunReport, RunError> {
    cfg.validate()?;
    let total = Instant::now();
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| RunError::Output {
        path: dir.clone(),
        message: e.to_string(),
    })?;
    let mut report = RunReport {
        tool_version: env!("CARGO_PKG_VERSION"),
        config_sha256: config_hash(cfg),
        config: cfg.clone(),
        calibration: None,
        sweep: None,
        timings: Timings::default(),
        exit_status: ExitStatus::Success,
        exit_code: 0,
        error: None,
    };
    let outcome = pipeline(cfg, &mut report);
    let status = match &outcome {
        Ok(status) => *status,
        Err(e) => {
            report.error = Some(e.to_string());
            e.status()
        }
    };
    report.exit_status = status;
    report.exit_code = status.code();
    report.timings.total = total.elapsed().as_secs_f64();
    write_report(&dir.join(&cfg.output.report), &report)?;
    outcome.map(|_| report)
}

fn pipeline(cfg: &RunConfig, report: &mut RunReport) -> Result<ExitStatus, RunError> {
    let start = Instant::now();
    let calibration = calibration_check(cfg)?;
    report.timings.calibration = start.elapsed().as_secs_f64();
    let passed = calibration.passed;
    let detail = format!(
        "reeb error {:e} (tol {:e}), resolution defect {:e} (tol {:e})",
        calibration.reeb_quarter_turn_error,
        calibration.reeb_tol,
        calibration.resolution_defect,
        calibration.resolution_tol
    );
    report.calibration = Some(calibration);
    if !passed {
        return Err(RunError::Calibration(detail));
    }

    let sweep = sweep_and_count(&cfg.spec(), cfg.mode, cfg.routes, &cfg.detection)?;
    report.timings.stages = sweep.timings;
    let summary = summarize(cfg, &sweep)?;

    let start = Instant::now();
    write_records_csv(&cfg.output.dir.join(&cfg.output.records), cfg.n, &summary.records)?;
    report.timings.output = start.elapsed().as_secs_f64();
    let status = bound_status(&summary.bound);
    report.sweep = Some(summary);
    Ok(status)
}
