use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown structure `{0}`")]
    UnknownStructure(String),

    #[error("{0} is not supported for structure `{1}`")]
    Unsupported(&'static str, &'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("quadrature did not converge for {name}: estimate {estimate}, error {error:e}")]
    Quadrature {
        name: String,
        estimate: String,
        error: f64,
    },

    #[error("root finding did not converge: {0}")]
    RootFinding(String),
}
