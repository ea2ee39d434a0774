use thiserror::Error;

use crate::modes::ModeLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {wavelength_um} um outside the dispersion model's valid interval [{min_um}, {max_um}] um")]
    WavelengthOutOfRange {
        wavelength_um: f64,
        min_um: f64,
        max_um: f64,
    },

    #[error("mode cutoff: {mode} is not guided at {wavelength_nm} nm")]
    ModeCutoff { mode: ModeLabel, wavelength_nm: f64 },

    #[error("unpolable configuration: beta_P - beta_H - beta_V = {mismatch} rad/um is not positive")]
    Unpolable { mismatch: f64 },

    #[error("window misses phase-matching island")]
    EmptyAmplitude,

    #[error("no interior maximum bracketed in [{lo_nm}, {hi_nm}] nm; widen the search interval")]
    NoBracket { lo_nm: f64, hi_nm: f64 },

    #[error("no structure to fit")]
    NoStructure,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dispersion data: {0}")]
    DispersionData(String),

    #[error("failed to converge: {0}")]
    Convergence(String),

    #[error("configuration invalid:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
