use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("undeclared identifier `{0}`")]
    Undeclared(String),

    #[error("no value assigned to `{0}`")]
    Unassigned(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("argument outside the function domain")]
    Domain,

    /// Every sampled point hit a pole; the probabilistic engine refuses to guess.
    #[error("cannot decide: {0}")]
    CannotDecide(String),

    #[error("`{target}` is not closed-form invertible in `{expr}`")]
    NotInvertible { target: String, expr: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A structural requirement of a transformation step failed.
    #[error("{step}: {detail}")]
    Structure { step: String, detail: String },
}

impl Error {
    pub(crate) fn structure(step: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Structure {
            step: step.into(),
            detail: detail.into(),
        }
    }

    /// True for the "cannot decide" family (exit status 2 in the CLI).
    pub fn is_undecided(&self) -> bool {
        matches!(self, Error::CannotDecide(_))
    }
}
