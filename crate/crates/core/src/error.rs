use std::path::PathBuf;

use crate::fock::Slot;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid Fock space configuration: {0}")]
    InvalidConfig(String),

    #[error("tilde operator requested on an undoubled space")]
    Undoubled,

    #[error("operation requires an undoubled space")]
    Doubled,

    #[error("slot {0:?} is not available on this space")]
    SlotOutOfRange(Slot),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("insufficient boson cutoff N_b = {cutoff}: {detail}")]
    InsufficientCutoff { cutoff: usize, detail: String },

    #[error("boson tail mass {tail_mass:.3e} exceeds tolerance {tolerance:.3e} at N_b = {cutoff}")]
    TailMass {
        cutoff: usize,
        tail_mass: f64,
        tolerance: f64,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("{0} did not converge")]
    NonConvergence(&'static str),

    #[error("matrix does not have the declared {0} structure")]
    StructureMismatch(&'static str),

    #[error("no supersymmetric harmonic oscillator for these parameters: omega2 = {omega2} < 2|alpha2| = {bound}")]
    ComplexRoots { omega2: f64, bound: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing operator: {0}")]
    MissingOperator(&'static str),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("dense materialization of dimension {dim} exceeds the limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
