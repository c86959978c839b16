use alloc::string::String;
use core::fmt;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Interval bounds out of order or not numbers.
    InvalidInterval { lo: f64, hi: f64 },
    /// Input data that admits no meaningful result (too few distinct values, no bins, ...).
    DegenerateInput(String),
    /// A precondition of the called operation does not hold.
    Contract(String),
    /// A piecewise polynomial that was required to be a density is not one.
    NotADensity { what: String, mass: f64, min_value: f64 },
    /// Program text that does not follow the grammar.
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    /// Well-formed program text with inconsistent content.
    Semantic(String),
    /// Grounding did not terminate within its budget.
    InfiniteGrounding(String),
    /// The enumerated choice space exceeds the configured cap.
    ChoiceSpaceTooLarge { estimate: f64, cap: u64 },
    /// Evidence with probability zero.
    InconsistentEvidence,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInterval { lo, hi } => write!(f, "invalid interval [{lo}, {hi}]"),
            Error::DegenerateInput(msg) => write!(f, "degenerate input: {msg}"),
            Error::Contract(msg) => write!(f, "contract violation: {msg}"),
            Error::NotADensity { what, mass, min_value } => write!(
                f,
                "{what} is not a valid density (integral {mass}, minimum value {min_value})"
            ),
            Error::Syntax { line, column, message } => write!(f, "syntax error at {line}:{column}: {message}"),
            Error::Semantic(msg) => write!(f, "{msg}"),
            Error::InfiniteGrounding(msg) => write!(f, "grounding does not terminate: {msg}"),
            Error::ChoiceSpaceTooLarge { estimate, cap } => write!(
                f,
                "choice space of about {estimate:e} assignments exceeds the cap of {cap}"
            ),
            Error::InconsistentEvidence => write!(f, "evidence has probability zero"),
        }
    }
}

impl core::error::Error for Error {}
