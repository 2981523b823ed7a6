use std::io;

use thiserror::Error;

use crate::lattice::LatticeShape;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported lattice width {0}: L must be 2^N with N >= 2")]
    UnsupportedShape(u32),

    #[error("unsupported lattice exponent {0}: expected 2 <= N <= 15")]
    UnsupportedExponent(u32),

    #[error("shape mismatch: {0} vs {1}")]
    ShapeMismatch(LatticeShape, LatticeShape),

    #[error("expected {expected} bits, got {got}")]
    WrongLength { expected: usize, got: usize },

    #[error("residual error still has {0} defects")]
    ResidualHasDefects(usize),

    #[error("perfect matching needs an even node count, got {0}")]
    OddNodeCount(usize),

    #[error("brute-force matching is capped at {cap} nodes, got {got}")]
    TooLarge { cap: usize, got: usize },

    #[error("odd defect parity ({count}) on the symmetry anchored at {anchor}")]
    OddDefectParity {
        anchor: crate::lattice::FaceCoord,
        count: usize,
    },

    #[error("matching graph structure violated: {0}")]
    Structure(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed results file: {0}")]
    Malformed(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
