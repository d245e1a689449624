use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("deck search exhausted at K_max = {0}")]
    DeckSearchExhausted(i64),

    #[error("branch of F unavailable: {0}")]
    Branch(String),

    #[error("point is not on the boundary (|r| = {0:e})")]
    NotOnBoundary(f64),

    #[error("nodes {from} and {to} lie in different components ({component_from} vs {component_to})")]
    Disconnected {
        from: usize,
        to: usize,
        component_from: usize,
        component_to: usize,
    },

    #[error("no graph node within snapping distance of {0}")]
    Snap(String),

    #[error("empty sample region")]
    EmptyRegion,

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
