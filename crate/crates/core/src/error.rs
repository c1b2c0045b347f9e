use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("coefficient domains are incompatible: {0}")]
    DomainMismatch(String),
    #[error("series is empty below the requested precision")]
    EmptySeries,
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("exponential of a series with a nonpositive exponent {0}")]
    Divergent(String),
    #[error("logarithm needs leading term 1, found {0}")]
    LogLeadingTerm(String),
    #[error("element is not invertible")]
    NotInvertible,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("plus-space support violated at exponent {0}")]
    PlusSupport(String),
    #[error("no basis element f_{0}: index must be 0 or 3 mod 4")]
    NoSuchBasisElement(i64),
    #[error("weight mismatch: {0}")]
    Weight(String),
    #[error("no eta engine coverage for divisor {0}")]
    EngineGap(u64),
    #[error("invalid character data: {0}")]
    InvalidCharacterData(String),
    #[error("not a virtual module: {0}")]
    NotVirtualModule(String),
    #[error("missing class number H_{m}({d},{r})")]
    MissingClassNumber { m: i64, d: i64, r: i64 },
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("vector has nonnegative norm {0}, no divisor point")]
    NotDivisorPoint(String),
    #[error("vector with c = 0 contributes at the cusp")]
    CuspContribution,
    #[error("untrusted inversion at n = {n}: rounding residue {residue}")]
    UntrustedInversion { n: i64, residue: String },
    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
