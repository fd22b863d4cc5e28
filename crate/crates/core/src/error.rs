//! Error types shared across the crate.

use thiserror::Error;

/// Top-level error type for scene construction, solving, and analysis.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Configuration file could not be parsed or contains invalid keys.
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    /// Scene geometry is inconsistent or does not fit the requested box.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// No physical Drude solution exists for the requested refractive index.
    #[error("drude fit error: {0}")]
    MaterialFit(String),

    /// A field value became non-finite during time stepping.
    #[error("non-finite {field} at step {step}, cell ({i}, {k})")]
    NonFinite {
        field: &'static str,
        step: u64,
        i: usize,
        k: usize,
    },

    /// The run did not reach steady state within the period budget.
    #[error("no steady state after {periods} periods (final drift {drift:.3e}, tol {tol:.3e})")]
    NonConvergence { periods: u32, drift: f64, tol: f64 },

    /// Estimated memory exceeds the configured budget.
    #[error("resource gate: estimated {estimate_gb:.1} GB exceeds budget {budget_gb:.1} GB")]
    ResourceGate { estimate_gb: f64, budget_gb: f64 },

    /// Spectra to be combined do not share a grid or convention.
    #[error("analysis error: {0}")]
    Analysis(String),

    /// Reading or writing an artifact file failed.
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl CoreError {
    pub fn io(path: impl Into<String>, err: impl std::fmt::Display) -> Self {
        CoreError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CoreError::Config { .. } | CoreError::Geometry(_) | CoreError::MaterialFit(_) => 2,
            CoreError::NonConvergence { .. } | CoreError::NonFinite { .. } => 3,
            CoreError::ResourceGate { .. } => 4,
            CoreError::Analysis(_) | CoreError::Io { .. } => 1,
        }
    }
}
