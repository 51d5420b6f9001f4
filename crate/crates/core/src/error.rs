use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("mask has {found} entries but the scenario has {expected} parties")]
    MaskLength { expected: usize, found: usize },

    #[error("mask entry {value} at party {party} is outside 0..{outcomes}")]
    MaskEntry {
        party: usize,
        value: usize,
        outcomes: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("probabilities are not normalized: {0}")]
    NotNormalized(String),

    #[error("enumeration needs {required} strategies but the budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("unsupported functional form: {0}")]
    UnsupportedForm(String),

    #[error("wrong scenario: {0}")]
    WrongScenario(String),

    #[error("invalid g table: {0}")]
    InvalidGTable(String),

    #[error("invalid setup: {0}")]
    InvalidSetup(String),

    #[error("invalid document at {path}: {message}")]
    InvalidDocument { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
