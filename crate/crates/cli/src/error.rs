use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Method(String),
    #[error("{0}")]
    Oracle(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Method(_) => 3,
            CliError::Oracle(_) => 4,
            CliError::Invariant(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input(_) => "input",
            CliError::Method(_) => "method_condition",
            CliError::Oracle(_) => "oracle",
            CliError::Invariant(_) => "invariant",
        }
    }

    pub fn to_report(&self) -> ErrorReport {
        ErrorReport { kind: self.kind(), message: self.to_string(), exit_code: self.exit_code() }
    }
}

impl From<simop::Error> for CliError {
    fn from(e: simop::Error) -> Self {
        use simop::Error as E;
        let msg = e.to_string();
        match e {
            _ if e.is_method_condition() => CliError::Method(msg),
            E::Parse { .. } | E::InvalidInput(_) | E::Io(_) => CliError::Input(msg),
            E::Oracle(_) => CliError::Oracle(msg),
            _ => CliError::Invariant(msg),
        }
    }
}

impl From<simop_oracle::OracleError> for CliError {
    fn from(e: simop_oracle::OracleError) -> Self {
        CliError::Oracle(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
}
