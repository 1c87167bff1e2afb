use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("near-parallel lines (|sin angle| = {0:e})")]
    NearParallel(f64),
    #[error("enumeration cap exceeded: {lines} lines > cap {cap}")]
    EnumerationCap { lines: usize, cap: usize },
    #[error("event budget exhausted after {0} events")]
    EventBudget(usize),
    #[error("proposal starvation: {attempts} proposals without a single success")]
    ProposalStarvation { attempts: usize },
    #[error("horizon too short: {unresolved} instance(s) alive at time 0 have clans reaching the horizon -T = {horizon}; increase T")]
    HorizonTooShort { unresolved: usize, horizon: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
