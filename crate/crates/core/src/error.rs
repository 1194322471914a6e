use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("discs {0} and {1} are not disjoint")]
    OverlappingDiscs(usize, usize),

    #[error("interpolation lost too much precision at piece {piece} (rounding bound {rounding:e} against tolerance {tol:e}, {bits_short} bits short)")]
    ConditioningFailure {
        piece: usize,
        rounding: f64,
        tol: f64,
        /// Estimated extra working precision needed, 0 when unknown.
        bits_short: u32,
    },

    #[error("order cap {cap} exceeded with certified max bound {max_bound:e}")]
    OrderCapExceeded { cap: usize, max_bound: f64 },

    #[error("no magnitude beyond {threshold} within {scanned} indices starting at {start}")]
    ScanExhausted {
        threshold: f64,
        start: usize,
        scanned: usize,
    },

    #[error("magnitude escalation cap {escalations} reached: {last}")]
    EscalationExhausted { escalations: usize, last: Box<Error> },

    #[error("certificate slack depleted at step {step}")]
    SlackDepleted { step: usize },

    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("no library target within 1/(2n) of g on the disc of radius {0}")]
    NoCloseTarget(usize),

    #[error("ledger has no certificate for window (v={n}, N={}, k={k}, n={n})", 2 * .n)]
    MissingWindow { n: usize, k: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("archive: {0}")]
    Archive(String),

    #[error("verification failed for {failed} of {total} certificates")]
    VerificationFailed { failed: usize, total: usize },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::IndexOutOfRange { .. } => 2,
            Error::ScanExhausted { .. } => 3,
            Error::OrderCapExceeded { .. }
            | Error::EscalationExhausted { .. }
            | Error::ConditioningFailure { .. }
            | Error::OverlappingDiscs(..)
            | Error::SlackDepleted { .. } => 4,
            Error::VerificationFailed { .. } => 5,
            Error::NoCloseTarget(_) | Error::MissingWindow { .. } => 6,
            Error::Io(_) | Error::Archive(_) => 7,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
