use std::fmt;

/// A failure classified by the exit status it maps to.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Invalid configuration or flags (exit 2).
    Config(String),
    /// Unreadable or malformed input or output data (exit 3).
    Data(String),
    /// The model contradicted itself (exit 4).
    Inconsistent(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Inconsistent(m) => m,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Inconsistent(_) => 4,
        }
    }

    pub fn context(self, ctx: &str) -> Self {
        let wrap = |m: String| format!("{ctx}: {m}");
        match self {
            CliError::Config(m) => CliError::Config(wrap(m)),
            CliError::Data(m) => CliError::Data(wrap(m)),
            CliError::Inconsistent(m) => CliError::Inconsistent(wrap(m)),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self {
            CliError::Config(_) => "config error",
            CliError::Data(_) => "data error",
            CliError::Inconsistent(_) => "internal inconsistency",
        };
        write!(f, "{kind}: {}", self.message())
    }
}

impl std::error::Error for CliError {}

impl From<vrpl_core::Error> for CliError {
    fn from(e: vrpl_core::Error) -> Self {
        use vrpl_core::Error as E;
        match e {
            E::InvalidParameter { .. } | E::Infeasible { .. } => CliError::Config(e.to_string()),
            E::InsufficientTrace { .. } | E::TraceData { .. } | E::Io(_) => {
                CliError::Data(e.to_string())
            }
            E::InconsistentQoe { .. } => CliError::Inconsistent(e.to_string()),
        }
    }
}
