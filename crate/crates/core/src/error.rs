use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("operands live in different fields (Q_{0} vs Q_{1})")]
    PrimeMismatch(u32, u32),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("value is zero to all known digits (known to vanish mod p^{bound}); its norm is undetermined")]
    IndeterminateZero { bound: i64 },
    #[error("exact zero has no valuation")]
    ZeroValuation,
    #[error("division by zero")]
    DivisionByZero,
    #[error("need {needed} digits but only {available} are guaranteed")]
    InsufficientPrecision { needed: u32, available: u32 },
    #[error("{0} is divisible by p; expected a unit residue")]
    NotAUnitResidue(u64),
    #[error("no square root exists in Q_{p}")]
    NoSquareRoot { p: u32 },
    #[error("fixed points x2, x3 do not exist for this parameter")]
    NoFixedPoints,
    #[error("operation does not apply: {0}")]
    NotApplicable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown claim id `{0}`")]
    UnknownClaim(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
