use serde::Serialize;
use ttls_dmd::{DmdError, ErrorClass};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or configuration file.
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Dmd(#[from] DmdError),
}

impl CliError {
    pub fn class(&self) -> ErrorClass {
        match self {
            CliError::Config(_) => ErrorClass::Config,
            CliError::Dmd(e) => e.class(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Config => EXIT_CONFIG,
            ErrorClass::Data => EXIT_DATA,
            ErrorClass::Numerical => EXIT_NUMERICAL,
        }
    }

    /// One-line JSON object for stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            class: &'a str,
            exit_code: i32,
            trial: Option<usize>,
        }
        let class = match self.class() {
            ErrorClass::Config => "config",
            ErrorClass::Data => "data",
            ErrorClass::Numerical => "numerical",
        };
        let trial = match self {
            CliError::Dmd(DmdError::Trial { trial, .. }) => Some(*trial),
            _ => None,
        };
        serde_json::to_string(&Report {
            error: &self.to_string(),
            class,
            exit_code: self.exit_code(),
            trial,
        })
        .expect("plain struct serializes")
    }
}

pub(crate) fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}
