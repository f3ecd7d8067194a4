use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("enumeration of {needed} candidates exceeds the budget of {budget}")]
    BudgetExceeded { needed: String, budget: u64 },
    #[error("valuation is not defined on alternative {0}")]
    UndefinedAlternative(String),
    #[error("valuation is not additive")]
    NotAdditive,
    #[error("prior is not a product distribution over player {0} and the others")]
    NotProductPrior(usize),
    #[error("utility is undefined: {0}")]
    UndefinedUtility(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
