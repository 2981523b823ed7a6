//! Error sampling with reproducible, order-independent randomness.
//!
//! Every sample gets its own ChaCha key built from `(seed, sample index)`;
//! the sampling stages (row lines, column lines, single bits) read disjoint
//! ChaCha streams of that key. A sample therefore never depends on which
//! worker drew it or on what other samples were drawn.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::code::BitGrid;
use crate::error::Error;
use crate::lattice::LatticeShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    Iid,
    Spanning,
}

impl NoiseModel {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseModel::Iid => "iid",
            NoiseModel::Spanning => "spanning",
        }
    }

    pub fn sample(self, shape: LatticeShape, p: f64, stream: RngStream) -> BitGrid {
        match self {
            NoiseModel::Iid => sample_iid(shape, p, stream),
            NoiseModel::Spanning => sample_spanning(shape, p, stream),
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "iid" => Ok(NoiseModel::Iid),
            "spanning" => Ok(NoiseModel::Spanning),
            other => Err(Error::Config(format!("unknown noise model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Bits = 1,
    Rows = 2,
    Columns = 3,
}

/// Randomness for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub index: u64,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    fn stage(self, stage: Stage) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.index.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stage as u64);
        rng
    }
}

fn check_rate(p: f64) {
    assert!((0.0..=1.0).contains(&p), "error rate {p} outside [0, 1]");
}

/// Each bit flips independently with probability `p`.
pub fn sample_iid(shape: LatticeShape, p: f64, stream: RngStream) -> BitGrid {
    check_rate(p);
    let mut rng = stream.stage(Stage::Bits);
    let mut grid = BitGrid::zeros(shape);
    for i in 0..shape.num_faces() {
        if rng.random_bool(p) {
            grid.set_index(i, true);
        }
    }
    grid
}

/// Whole rows flip with probability `p`, then whole columns, then single
/// bits, all at the same rate and composed by XOR.
pub fn sample_spanning(shape: LatticeShape, p: f64, stream: RngStream) -> BitGrid {
    check_rate(p);
    let (w, h) = (shape.width() as usize, shape.height() as usize);
    let mut grid = sample_iid(shape, p, stream);

    let mut rows = stream.stage(Stage::Rows);
    for y in 0..h {
        if rows.random_bool(p) {
            (0..w).for_each(|x| grid.flip_index(y * w + x));
        }
    }
    let mut cols = stream.stage(Stage::Columns);
    for x in 0..w {
        if cols.random_bool(p) {
            (0..h).for_each(|y| grid.flip_index(y * w + x));
        }
    }
    grid
}
