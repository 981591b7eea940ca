use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cyclotomic level {level} exceeds the configured cap {cap}")]
    LevelOverflow { level: u64, cap: u32 },
    #[error("q-exponent overflow")]
    ExponentOverflow,
    #[error("series is not invertible: {0}")]
    NotInvertible(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("({a}, {m}) is not covered by any case of the formula")]
    Parity { a: i64, m: i64 },
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("no generic parameter found for {formula} after {attempts} candidates")]
    GenericSearchExhausted { formula: String, attempts: usize },
    #[error("coefficient of q^{exponent} is not rational")]
    NonRational { exponent: i64 },
    #[error("closed form disagrees with enumeration at q^{exponent}")]
    OracleMismatch { exponent: i64 },
    #[error("invalid monomial: {0}")]
    InvalidMonomial(String),
    #[error("eta quotient has fractional q-order {0}/24")]
    FractionalOrder(i64),
    #[error("rank table cache: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
