use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("integer overflow during exact arithmetic")]
    Overflow,

    #[error("rows are linearly dependent over the rationals")]
    RankDeficient,

    #[error("chiral set is not primitive (sublattice index {index})")]
    NotPrimitive { index: u128 },

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {smallest:e})")]
    NotPositiveDefinite { smallest: f64 },

    #[error("grid of {cells} cells exceeds the budget of {budget}")]
    GridTooLarge { cells: u128, budget: u128 },

    #[error("band {band} touches a neighbouring band at the extremum (gap {gap:e})")]
    BandTouching { band: usize, gap: f64 },

    #[error("level set for band {band} ({side}) is empty")]
    EmptyLevelSet { band: usize, side: &'static str },

    #[error("wrong shape: {0}")]
    WrongShape(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
