use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration; exit code 2.
    #[error("config error: {0}")]
    Config(String),

    /// Singular states, domain errors and I/O failures; exit code 3.
    #[error("{0}")]
    Runtime(String),

    /// Fatal equilibrium solver failure; exit code 4.
    #[error("solver did not converge: {0}")]
    Convergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Convergence(_) => 4,
        }
    }
}

impl From<pr3bp_core::Error> for CliError {
    fn from(e: pr3bp_core::Error) -> Self {
        use pr3bp_core::Error as E;
        match e {
            E::Convergence { .. } | E::SingularJacobian { .. } => {
                CliError::Convergence(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
