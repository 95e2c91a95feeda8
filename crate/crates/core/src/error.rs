use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can surface.
///
/// Variants fall into three families that the CLI maps onto exit codes:
/// configuration problems, protocol or arithmetic failures
/// and I/O. See [`Error::kind`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is outside the supported range [3, 2^63)")]
    ModulusOutOfRange(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("duplicate x-coordinate {0}")]
    DuplicateX(u64),
    #[error("x-coordinate 0 is reserved for the secret")]
    ZeroX,
    #[error("empty point set")]
    NoPoints,
    #[error("{constraints} constraints cannot fit a polynomial of degree {degree}")]
    OverConstrained { degree: usize, constraints: usize },
    #[error("field of size {modulus} has no admissible x-coordinate left")]
    FieldExhausted { modulus: u64 },
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient shares: need {need}, have {have}")]
    InsufficientShares { need: usize, have: usize },
    #[error("insufficient points: need {need}, have {have}")]
    InsufficientPoints { need: usize, have: usize },
    #[error("share at x={x} is inconsistent with the other shares")]
    Corruption { x: u64 },

    #[error("authorization failed: {0}")]
    Authorization(String),
    #[error("no holder answered for digest {digest}")]
    HolderLost { digest: String },
    #[error("integrity violation: {0}")]
    Integrity(String),
    #[error("placement failed: {0}")]
    Placement(String),
    #[error("participant {0} has failed and holds no data")]
    ParticipantFailed(usize),
    #[error("participant {0} has already failed")]
    AlreadyFailed(usize),
    #[error("participant {0} is not failed")]
    NotFailed(usize),
    #[error("unknown participant {0}")]
    UnknownParticipant(usize),
    #[error("exhaustive enumeration refused for n = {n} (limit {limit})")]
    EnumerationRefused { n: usize, limit: usize },

    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed state file: {0}")]
    Format(String),
}

/// Coarse classification used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Io,
    Protocol,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            NotPrime(_)
            | ModulusOutOfRange(_)
            | ProbabilityOutOfRange(_)
            | Config(_)
            | UnknownParticipant(_)
            | NotFailed(_)
            | AlreadyFailed(_)
            | EnumerationRefused { .. } => ErrorKind::Config,
            Io(_) | Format(_) => ErrorKind::Io,
            _ => ErrorKind::Protocol,
        }
    }

    /// Stable kebab-case identifier, printed by the CLI.
    pub fn name(&self) -> &'static str {
        use Error::*;
        match self {
            NotPrime(_) => "not-prime",
            ModulusOutOfRange(_) => "modulus-out-of-range",
            ZeroInverse => "zero-inverse",
            DuplicateX(_) => "duplicate-x",
            ZeroX => "zero-x",
            NoPoints => "no-points",
            OverConstrained { .. } => "over-constrained",
            FieldExhausted { .. } => "field-exhausted",
            ProbabilityOutOfRange(_) => "probability-out-of-range",
            Config(_) => "config",
            InsufficientShares { .. } => "insufficient-shares",
            InsufficientPoints { .. } => "insufficient-points",
            Corruption { .. } => "corruption",
            Authorization(_) => "authorization",
            HolderLost { .. } => "holder-lost",
            Integrity(_) => "integrity",
            Placement(_) => "placement",
            ParticipantFailed(_) => "participant-failed",
            NotFailed(_) => "not-failed",
            AlreadyFailed(_) => "already-failed",
            UnknownParticipant(_) => "unknown-participant",
            EnumerationRefused { .. } => "enumeration-refused",
            Io(_) => "io",
            Format(_) => "format",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
