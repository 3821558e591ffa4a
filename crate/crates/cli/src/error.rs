use branchsum::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_INFEASIBLE: i32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::BudgetExceeded { .. } | Error::PathExplosion { .. } | Error::NoAbsorption(_) => EXIT_BUDGET,
            Error::ZeroMicrostates => EXIT_INFEASIBLE,
            Error::MalformedDescription(_)
            | Error::DanglingFace(_)
            | Error::WeightBelowBound { .. }
            | Error::UnknownSimplex(_)
            | Error::UnsupportedRefinement(_)
            | Error::InvalidEndpoints(_) => EXIT_INPUT,
            _ => EXIT_CONFIG,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}
