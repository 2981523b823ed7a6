//! Fibonacci fractal code, its symmetry-based iterative matching decoder,
//! and the Monte-Carlo and fitting machinery around it.

pub mod analysis;
pub mod code;
pub mod decoder;
pub mod error;
pub mod experiment;
pub mod lattice;
pub mod matching_graph;
pub mod mwpm;
pub mod noise;
pub mod symmetry;

pub use code::{BitGrid, Outcome, SyndromeGrid};
pub use decoder::{Candidate, DecodeResult, DecodeStatus, Decoder, DecoderConfig};
pub use error::{Error, Result};
pub use lattice::{FaceCoord, LatticeShape, Offset};
pub use matching_graph::{MatchingGraph, PairTable};
pub use noise::{NoiseModel, RngStream};
pub use symmetry::Symmetry;
