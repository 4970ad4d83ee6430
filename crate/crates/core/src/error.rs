use thiserror::Error;

/// Errors raised by the lattice, Coulomb, field and energy layers.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type so the
/// error stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate lattice: |det| = {det:e} is below 1e-12 x {scale:e}")]
    DegenerateLattice { det: f64, scale: f64 },

    #[error("invalid grid dimensions {dims:?}: every axis needs at least 2 points")]
    InvalidGrid { dims: [usize; 3] },

    #[error("source is not neutral: |rho_hat(0)| = {mean:e} (largest coefficient {largest:e})")]
    NonNeutralSource { mean: f64, largest: f64 },

    #[error("Green function evaluated at a lattice point (torus distance {distance:e})")]
    SingularPoint { distance: f64 },

    #[error("ions {first} and {second} coincide (torus distance {distance:e})")]
    IonsCoincide {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("ion {index} has charge {charge}: the positivity condition requires Z_j > 0")]
    NonPositiveCharge { index: usize, charge: f64 },

    #[error("ion positions and charges differ in length ({positions} vs {charges})")]
    IonCountMismatch { positions: usize, charges: usize },

    #[error("wave field has zero norm")]
    ZeroField,

    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),

    #[error("invalid Ewald parameters: {0}")]
    InvalidEwald(String),

    #[error("field has {found} samples, expected {expected}")]
    ShapeMismatch { expected: usize, found: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
