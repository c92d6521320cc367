//! CLI errors with distinct process exit codes.

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("budget error: {0}")]
    Budget(String),
    #[error("audit failure: {0}")]
    AuditFailed(String),
    #[error("{0}")]
    Io(String),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_AUDIT: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::AuditFailed(_) => EXIT_AUDIT,
            CliError::Io(_) => EXIT_OTHER,
        }
    }
}

/// Maps core errors onto CLI exit classes: enumeration-budget problems keep
/// their own code, everything else surfaces as a config problem.
pub fn core_err(e: elbolab::Error) -> CliError {
    match e {
        elbolab::Error::BudgetExceeded { cells, cap } => {
            CliError::Budget(format!("{cells} cells exceed the cap of {cap}"))
        }
        other => CliError::Config(other.to_string()),
    }
}
