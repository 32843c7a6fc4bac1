use thiserror::Error;

/// Failures raised by tuple constructions and checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("letter {letter} out of range for an alphabet of size {n}")]
    LetterOutOfRange { letter: usize, n: usize },

    #[error("not a row contraction: largest eigenvalue of sum T_i T_i^* - I is {excess:e}")]
    NotRowContraction { excess: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below -{tol:e}")]
    NotPositive { eigenvalue: f64, tol: f64 },

    #[error("tuple is not commuting: max commutator norm {residual:e}")]
    NotCommuting { residual: f64 },

    #[error("tuple is not pure enough at degree {degree}: tail_bound = {tail_bound:e} exceeds {tol:e}")]
    NotPure { degree: usize, tail_bound: f64, tol: f64 },

    #[error("tuple is not a spherical unitary (residual {residual:e})")]
    NotSphericalUnitary { residual: f64 },

    #[error("Cuntz relations violated on the safe window (residual {residual:e})")]
    CuntzViolation { residual: f64 },

    #[error("subspace is not co-invariant (residual {residual:e})")]
    NotCoInvariant { residual: f64 },

    #[error("commuting-piece characterizations disagree: {0}")]
    CharacterizationMismatch(String),

    #[error("point is not on the unit sphere: sum |w_i|^2 = {norm_sq}")]
    NotOnSphere { norm_sq: f64 },

    #[error("joint diagonalization failed: {0}")]
    Diagonalization(String),

    #[error("ambient dimension {dim} exceeds the budget of {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;
