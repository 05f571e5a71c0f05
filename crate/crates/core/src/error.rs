use thiserror::Error;

/// Errors raised by the shared language operations (evaluation, unfolding).
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("unbound index variable `{0}`")]
    UnboundIndexVar(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown process `{0}`")]
    UnknownProc(String),
    #[error("`{name}` expects {expected} index argument(s), got {got}")]
    IndexArity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("`{name}[{indices}]` violates its domain constraint {constraint}")]
    DomainViolation {
        name: String,
        indices: String,
        constraint: String,
    },
}
