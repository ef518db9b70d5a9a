use stackcount::definable::DefinableError;
use stackcount::greenberg::GreenbergError;
use stackcount::measures::MeasureError;
use stackcount::ring::RingError;
use stackcount::scheme::SchemeError;
use stackcount::stacks::StackError;
use stackcount::witt::WittError;

/// Exit statuses; `2` is also what clap uses for malformed command lines.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const BOUND: u8 = 4;
    pub const PARTIAL: u8 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("project: {0}")]
    Project(String),
    #[error("parse: {0}")]
    Parse(String),
    #[error("search bound exceeded: {0}")]
    Bound(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Project(_) | CliError::Parse(_) => exit::PARSE,
            CliError::Bound(_) => exit::BOUND,
            CliError::Failure(_) => exit::FAILURE,
        }
    }
}

fn ring_error(e: RingError) -> CliError {
    match e {
        RingError::BoundExceeded { .. } => CliError::Bound(e.to_string()),
        _ => CliError::Failure(e.to_string()),
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::BoundExceeded { .. } => CliError::Bound(e.to_string()),
            SchemeError::Ring(r) => ring_error(r),
            SchemeError::Parse { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<RingError> for CliError {
    fn from(e: RingError) -> Self {
        ring_error(e)
    }
}

impl From<StackError> for CliError {
    fn from(e: StackError) -> Self {
        match e {
            StackError::Scheme(s) => s.into(),
            StackError::Ring(r) => ring_error(r),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::Scheme(s) => s.into(),
            MeasureError::Stack(s) => s.into(),
            MeasureError::Ring(r) => ring_error(r),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<DefinableError> for CliError {
    fn from(e: DefinableError) -> Self {
        match e {
            DefinableError::Parse(p) => CliError::Parse(p.to_string()),
            DefinableError::Measure(m) => m.into(),
            DefinableError::Expression(_) => CliError::Failure(e.to_string()),
        }
    }
}

impl From<GreenbergError> for CliError {
    fn from(e: GreenbergError) -> Self {
        match e {
            GreenbergError::Scheme(s) => s.into(),
            GreenbergError::Ring(r) => ring_error(r),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<WittError> for CliError {
    fn from(e: WittError) -> Self {
        CliError::Failure(e.to_string())
    }
}
