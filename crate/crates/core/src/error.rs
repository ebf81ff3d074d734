use thiserror::Error;

/// Errors raised by constructions in this crate.
///
/// Verification routines never error on a failed identity; they return
/// residuals. Errors are reserved for inputs that make a construction
/// meaningless (shape mismatches, non-faithful traces, degenerate witnesses).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("invalid homomorphism: {0}")]
    InvalidHomomorphism(String),

    #[error("non-integer multiplicity {value} for sub-block {sub_block} in block {block}")]
    NonIntegerMultiplicity {
        sub_block: usize,
        block: usize,
        value: f64,
    },

    #[error("inclusion is disconnected; Bratteli components: {components:?}")]
    Disconnected { components: Vec<Vec<String>> },

    #[error("trace is not faithful: {0}")]
    NotFaithful(String),

    #[error("not a subalgebra: {0}")]
    NotSubalgebra(String),

    #[error("quasi-basis verification failed: {0}")]
    QuasiBasis(String),

    #[error("no unitary orthonormal basis can exist: {0}")]
    NoUnitaryBasis(String),

    #[error("search failed after budget; best residual {best_residual:e}")]
    SearchFailed { best_residual: f64 },

    #[error("minimal expectation search failed: {0}")]
    MinimalExpectation(String),

    #[error("no compatible expectation: {0}")]
    NoCompatibleExpectation(String),

    #[error("dimension cap exceeded: projected dimension {projected} > cap {cap}")]
    DimensionCap { projected: usize, cap: usize },

    #[error("dual expectation inconsistent: residual {0:e}")]
    DualInconsistent(f64),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("cocycle action fails identity `{identity}` (residual {residual:e})")]
    CocycleIdentity { identity: String, residual: f64 },

    #[error("witness {index} does not normalize the subalgebra (residual {residual:e})")]
    NotNormalizing { index: usize, residual: f64 },

    #[error("witness set numerically degenerate: {0}")]
    Degenerate(String),

    #[error("witness set does not certify regularity: {0}")]
    NotRegular(String),

    #[error("element not in relative commutant (residual {0:e})")]
    NotInCommutant(f64),

    #[error("not an automorphism: {0}")]
    NotAutomorphism(String),
}

pub type Result<T> = std::result::Result<T, Error>;
