use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("matrix is singular")]
    Singular,
    #[error("lattice containment fails: {0}")]
    NotContained(String),
    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    Budget { what: String, needed: u128, limit: u128 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("window too small: radius {required} required, have {have}")]
    WindowTooSmall { required: usize, have: usize },
    #[error("not a graph homomorphism: edge {0:?} -> {1:?} is not an edge")]
    NotHomomorphism(Vec<usize>, Vec<usize>),
    #[error("map is not injective: {0:?} and {1:?} have the same image")]
    NotInjective(Vec<usize>, Vec<usize>),
    #[error("{0}")]
    Violation(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Error {
        Error::Input(msg.into())
    }
    pub fn budget(what: impl Into<String>, needed: u128, limit: u128) -> Error {
        Error::Budget { what: what.into(), needed, limit }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
