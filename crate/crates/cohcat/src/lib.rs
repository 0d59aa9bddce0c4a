//! Desk-scale simulation of catalytic coherence transformations.
//!
//! The crate builds the flagged-ensemble catalyst for a target n-copy output,
//! executes the three-step catalytic protocol (conditional channel on the flag
//! register, register shift, cyclic swap), and verifies the closure identities
//! and distance bounds that make the construction work. Around that core it
//! provides the coherence quantifiers used to certify monotonicity
//! (relative entropy of coherence, coherence of formation, the
//! quantum-incoherent relative entropy) and the rate formulas for assisted
//! distillation and incoherent state merging.
//!
//! Everything is dense complex linear algebra over a fixed incoherent
//! reference basis: each tensor factor's computational basis. Entropies are
//! in bits. Values are immutable after construction and all operations are
//! pure functions, so states and channels can be shared freely across
//! threads.
//!
//! ```
//! use cohcat::states::maximally_coherent;
//! use cohcat::measures::relative_entropy_of_coherence;
//!
//! let phi2 = maximally_coherent(2).unwrap();
//! let cr = relative_entropy_of_coherence(&phi2.density());
//! assert!((cr.value - 1.0).abs() < 1e-9);
//! ```

pub mod tol;

pub mod linalg;

pub mod states;

pub mod channels;

pub mod measures;

pub mod catalysis;

pub mod protocols;

pub mod report;

pub use catalysis::{CatalystState, ProtocolTrace};
pub use channels::KrausChannel;
pub use linalg::{CMatrix, CVector, HermitianMatrix, Spectrum};
pub use measures::MeasureResult;
pub use protocols::MergeAnalysis;
pub use report::ExperimentReport;
pub use states::{DensityOperator, PureState, SystemLayout};

/// Errors produced by state/channel construction and validation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not Hermitian: max |a_ij - conj(a_ji)| = {residual:.3e}")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace must be 1 within tolerance, got {trace}")]
    BadTrace { trace: f64 },

    #[error("eigendecomposition failed validation: {0}")]
    Eig(String),

    #[error("invalid layout: {0}")]
    Layout(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownSubsystem(String),

    #[error("invalid channel: {0}")]
    Channel(String),

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
