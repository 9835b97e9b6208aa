use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus not prime: {0}")]
    NotPrime(u64),
    #[error("modulus must be at least 3, got {0}")]
    ModulusTooSmall(u64),
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("set must not contain zero")]
    ZeroInSet,
    #[error("subgroup order {d} does not divide p-1 = {order}")]
    SubgroupOrder { d: u64, order: u64 },
    #[error("requested {requested} elements but only {available} are available")]
    SetTooLarge { requested: u64, available: u64 },
    #[error("invalid set family: {0}")]
    InvalidFamily(String),
    #[error("function table has an empty domain")]
    EmptyDomain,
    #[error("function value at {x} is zero")]
    ZeroValue { x: u64 },
    #[error("function domains differ")]
    DomainMismatch,
    #[error("{x} is outside the function domain")]
    OutsideDomain { x: u64 },
    #[error("function table has no nonzero values")]
    NoNonzeroValues,
    #[error("invalid function table: {0}")]
    InvalidTable(String),
    #[error("empty input set")]
    EmptySet,
    #[error("counting overflow in {0}")]
    Overflow(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
