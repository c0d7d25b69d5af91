use thiserror::Error;

/// Failure of a command, mapped to the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: files, parameters, graph or model content. Exit code 2.
    #[error("{0}")]
    Validation(String),
    /// An eigensolver or factorization gave up. Exit code 3.
    #[error("{0}")]
    Solver(String),
    /// An experiment finished but missed its thresholds. Exit code 4.
    #[error("{0}")]
    Acceptance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Acceptance(_) => 4,
        }
    }
}

/// Solver failures are the ones a retry with other settings might fix; all
/// other library errors describe invalid input.
pub fn is_solver_error(e: &bethe::Error) -> bool {
    matches!(
        e,
        bethe::Error::NoConvergence { .. }
            | bethe::Error::FactorizationBreakdown { .. }
            | bethe::Error::ComplexDominance { .. }
            | bethe::Error::GapZero { .. }
    )
}

impl From<bethe::Error> for CliError {
    fn from(e: bethe::Error) -> Self {
        if is_solver_error(&e) {
            CliError::Solver(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        let solver: CliError = bethe::Error::NoConvergence { iterations: 3, best_residual: 1.0 }.into();
        assert_eq!(solver.exit_code(), 3);
        let input: CliError = bethe::Error::SubcriticalDegree { degree: 0.5 }.into();
        assert_eq!(input.exit_code(), 2);
        assert_eq!(CliError::Acceptance("missed".into()).exit_code(), 4);
        let io: CliError = std::io::Error::other("disk").into();
        assert_eq!(io.exit_code(), 2);
    }
}
