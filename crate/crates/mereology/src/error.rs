use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("operator is not Hermitian (max entrywise deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (max entrywise deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("state is not normalized (squared norm deviates by {deviation:.3e})")]
    NotNormalized { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("basis is not orthonormal (max Gram deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("interaction Hamiltonian has no terms")]
    EmptyInteraction,

    #[error(
        "no consistent pointer basis: interaction terms do not commute \
         (max commutator norm {commutator_norm:.3e})"
    )]
    NoPointerBasis { commutator_norm: f64 },

    #[error("derivative data of order {required} not available (have order {available})")]
    MissingDerivatives { required: u8, available: u8 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
