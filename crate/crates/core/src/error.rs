use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// The uploaded QoE cannot be produced by any prediction error at the
    /// given radii (corrupted or forged feedback).
    #[error("QoE {q} is inconsistent with r_fov = {r_fov}, r_sv = {r_sv}")]
    InconsistentQoe { q: f64, r_fov: f64, r_sv: f64 },
    /// The privacy requirement is below the minimum achievable leakage.
    #[error("privacy requirement {max_leak_prob} is infeasible (minimum is {minimum})")]
    Infeasible { max_leak_prob: f64, minimum: f64 },
    #[error("trace {trace} has {have} samples but the timeline needs {need}")]
    InsufficientTrace {
        trace: String,
        have: usize,
        need: usize,
    },
    /// Trace file parse or validation failure; `line` is 1-based and counts the header.
    #[error("trace data, line {line}: {message}")]
    TraceData { line: u64, message: String },
    #[error("trace io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
