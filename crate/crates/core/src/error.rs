use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("enumeration budget exceeded: {required} supports required, budget is {budget}")]
    Budget { required: u128, budget: u128 },
    #[error("matrix is rank deficient: {0}")]
    RankDeficient(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
