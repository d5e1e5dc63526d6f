use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("bad escape sequence in {0:?}")]
    BadEscape(String),
    #[error("expected field `{expected}`, found {found:?}")]
    UnexpectedField { expected: &'static str, found: String },
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("invalid value for `{field}`: {value:?}")]
    InvalidValue { field: &'static str, value: String },
    #[error("malformed symbol file: {0}")]
    Symbol(&'static str),
    #[error("trailing content after {0}")]
    Trailing(&'static str),
}
