//! Run configuration: a versioned TOML document.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use transpoint::contact::{ContactHamiltonianSpec, PerturbationTerm, TimeProfile};
use transpoint::detect::{DetectionConfig, Mode, Route};
use transpoint::projective::ProjectiveSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// The message carries the line and column reported by the parser.
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

/// The Hamiltonian without its dimension, which lives at the top level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    pub quadratic: Vec<f64>,
    #[serde(default)]
    pub terms: Vec<PerturbationTerm>,
    #[serde(default)]
    pub time_profile: TimeProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub report: String,
    pub records: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            report: "report.json".into(),
            records: "records.csv".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    /// Bound on the relative error of the quarter Reeb turn.
    pub reeb_tol: f64,
    /// Bound on the change of the time-one map when the step count doubles.
    pub resolution_tol: f64,
    pub samples: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            reeb_tol: 1e-8,
            resolution_tol: 1e-9,
            samples: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub n: usize,
    pub mode: Mode,
    #[serde(default = "default_routes")]
    pub routes: Route,
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub detection: DetectionConfig,
    #[serde(default)]
    pub calibration: CalibrationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_routes() -> Route {
    Route::Both
}

impl RunConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn spec(&self) -> ContactHamiltonianSpec {
        ContactHamiltonianSpec {
            n: self.n,
            quadratic_coeffs: self.hamiltonian.quadratic.clone(),
            perturbation_terms: self.hamiltonian.terms.clone(),
            time_profile: self.hamiltonian.time_profile,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if self.n == 0 {
            return Err(invalid("n", "must be positive"));
        }
        if self.hamiltonian.quadratic.len() != self.n {
            return Err(invalid(
                "hamiltonian.quadratic",
                format!("needs {} coefficients, found {}", self.n, self.hamiltonian.quadratic.len()),
            ));
        }
        for (k, term) in self.hamiltonian.terms.iter().enumerate() {
            if term.z.len() != self.n || term.zbar.len() != self.n {
                return Err(invalid(
                    &format!("hamiltonian.terms[{k}]"),
                    format!("exponent vectors must have length {}", self.n),
                ));
            }
        }
        self.spec()
            .validate()
            .map_err(|e| invalid("hamiltonian", e.to_string()))?;
        if self.detection.rotation_pieces < 3 {
            return Err(invalid(
                "detection.rotation_pieces",
                format!("must be at least 3, got {}", self.detection.rotation_pieces),
            ));
        }
        self.detection
            .validate()
            .map_err(|e| invalid("detection", e.to_string()))?;
        for (field, v) in [
            ("calibration.reeb_tol", self.calibration.reeb_tol),
            ("calibration.resolution_tol", self.calibration.resolution_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(field, "must be a positive number"));
            }
        }
        if self.calibration.samples == 0 {
            return Err(invalid("calibration.samples", "must be positive"));
        }
        if self.output.report.is_empty() || self.output.records.is_empty() {
            return Err(invalid("output", "file names must be non-empty"));
        }
        if self.mode == Mode::Projective {
            ProjectiveSpec::new(self.spec()).map_err(|e| {
                invalid(
                    "hamiltonian",
                    format!("projective mode needs h(-z) = h(z): {e}"),
                )
            })?;
        }
        Ok(())
    }
}

/// Reads, parses and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::from_toml(&text, path)
}
