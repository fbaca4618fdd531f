use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected dim={expected}, got dim={got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("k={k} out of range: need 1 <= k <= {centres}")]
    KOutOfRange { k: usize, centres: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("rho={rho} out of range: need 1 <= rho <= k={k}")]
    RhoOutOfRange { rho: usize, k: usize },

    #[error("invalid solution: {0}")]
    InvalidSolution(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid alpha {0}: stability factor must exceed 1")]
    InvalidAlpha(String),

    #[error("budget exceeded: {what} (limit {limit})")]
    BudgetExceeded { what: String, limit: u128 },

    #[error("invalid generator spec: {0}")]
    SpecInvalid(String),

    #[error("literals repeat variable x{0}")]
    RepeatedVariable(usize),

    #[error("clause {0} is empty")]
    EmptyClause(usize),

    #[error("clause {clause} has {width} literals; exactly 3 distinct literals required")]
    NotExactly3Sat { clause: usize, width: usize },

    #[error("variable x{0} does not occur in any clause")]
    UnusedVariable(usize),

    #[error("bad wheel-copy override {0}: must be a power of 4 that is at least 4")]
    BadOverride(usize),

    #[error("malformed triple system: {0}")]
    MalformedTripleSystem(String),

    #[error("formula has {count} satisfying assignments; exactly one required")]
    NotUniquelySatisfiable { count: u64 },

    #[error("value overflow: {0}")]
    Overflow(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn budget(what: impl Into<String>, limit: impl Into<u128>) -> Self {
        Error::BudgetExceeded {
            what: what.into(),
            limit: limit.into(),
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
