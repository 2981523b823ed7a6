//! The Fibonacci code: bit grids, parity checks and codewords.
//!
//! Every face carries one bit. The check on face `f` is
//! `S_f = σ(f+ŷ) ⊕ σ(f−x̂) ⊕ σ(f) ⊕ σ(f+x̂)`, so a flip on face `g` violates
//! the checks on `g`, `g−ŷ`, `g−x̂` and `g+x̂`.

use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use crate::error::{Error, Result};
use crate::lattice::{FaceCoord, LatticeShape};

/// One bit per face, packed row-major into 64-bit words.
///
/// Codewords, errors, corrections, syndromes and symmetry indicators all use
/// this type.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitGrid {
    shape: LatticeShape,
    words: Vec<u64>,
}

/// A grid whose bit at `f` is the check value `S_f`.
pub type SyndromeGrid = BitGrid;

impl BitGrid {
    pub fn zeros(shape: LatticeShape) -> Self {
        Self {
            shape,
            words: vec![0; shape.num_faces().div_ceil(64)],
        }
    }

    pub fn ones(shape: LatticeShape) -> Self {
        let mut g = Self::zeros(shape);
        for i in 0..shape.num_faces() {
            g.set_index(i, true);
        }
        g
    }

    pub fn from_indices(shape: LatticeShape, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut g = Self::zeros(shape);
        for i in indices {
            g.flip_index(i);
        }
        g
    }

    pub fn from_faces(shape: LatticeShape, faces: impl IntoIterator<Item = FaceCoord>) -> Self {
        Self::from_indices(shape, faces.into_iter().map(|f| shape.face_index(f)))
    }

    #[inline]
    pub fn shape(&self) -> LatticeShape {
        self.shape
    }

    #[inline]
    pub fn get_index(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn get(&self, f: FaceCoord) -> bool {
        self.get_index(self.shape.face_index(f))
    }

    #[inline]
    pub fn set_index(&mut self, i: usize, value: bool) {
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn set(&mut self, f: FaceCoord, value: bool) {
        self.set_index(self.shape.face_index(f), value);
    }

    #[inline]
    pub fn flip_index(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    #[inline]
    pub fn flip(&mut self, f: FaceCoord) {
        self.flip_index(self.shape.face_index(f));
    }

    /// Number of set bits.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of set bits, ascending.
    pub fn ones_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    pub fn and(&self, other: &BitGrid) -> Result<BitGrid> {
        self.check_shape(other)?;
        Ok(BitGrid {
            shape: self.shape,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        })
    }

    pub fn xor(&self, other: &BitGrid) -> Result<BitGrid> {
        self.check_shape(other)?;
        let mut out = self.clone();
        out ^= other;
        Ok(out)
    }

    fn check_shape(&self, other: &BitGrid) -> Result<()> {
        if self.shape == other.shape {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(self.shape, other.shape))
        }
    }

    /// Bits of row `y` (1-based), `x = 1..=L`.
    pub fn row(&self, y: u32) -> Vec<bool> {
        (1..=self.shape.width())
            .map(|x| self.get(FaceCoord::new(x, y)))
            .collect()
    }

    /// The grid translated by `(dx, dy)`: bit at `f` moves to `f + (dx, dy)`.
    pub fn translated(&self, dx: i64, dy: i64) -> BitGrid {
        let s = self.shape;
        BitGrid::from_indices(s, self.ones_indices().map(|i| s.offset_index(i, dx, dy)))
    }

    /// ASCII rendering, `'X'` for 1 and `'.'` for 0, top row (`y = L/2`) first.
    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity(self.shape.num_faces() + self.shape.height() as usize);
        for y in (1..=self.shape.height()).rev() {
            for x in 1..=self.shape.width() {
                out.push(if self.get(FaceCoord::new(x, y)) { 'X' } else { '.' });
            }
            out.push('\n');
        }
        out
    }
}

impl BitXorAssign<&BitGrid> for BitGrid {
    fn bitxor_assign(&mut self, rhs: &BitGrid) {
        assert_eq!(self.shape, rhs.shape, "xor of grids with different shapes");
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a ^= b;
        }
    }
}

impl BitXor<&BitGrid> for &BitGrid {
    type Output = BitGrid;

    fn bitxor(self, rhs: &BitGrid) -> BitGrid {
        let mut out = self.clone();
        out ^= rhs;
        out
    }
}

impl fmt::Debug for BitGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitGrid {} weight {}", self.shape, self.weight())?;
        f.write_str(&self.to_ascii())
    }
}

/// Faces whose checks a flip on face `g` toggles: `g, g−ŷ, g−x̂, g+x̂`.
#[inline]
pub fn flip_stencil(shape: LatticeShape, g: usize) -> [usize; 4] {
    [
        g,
        shape.offset_index(g, 0, -1),
        shape.offset_index(g, -1, 0),
        shape.offset_index(g, 1, 0),
    ]
}

/// Evaluates every parity check on `config`.
pub fn syndrome(config: &BitGrid) -> SyndromeGrid {
    let shape = config.shape();
    let w = shape.width() as usize;
    let h = shape.height() as usize;
    let mut out = BitGrid::zeros(shape);
    for y in 0..h {
        let up = ((y + 1) % h) * w;
        let row = y * w;
        for x in 0..w {
            let left = (x + w - 1) % w;
            let right = (x + 1) % w;
            let s = config.get_index(up + x)
                ^ config.get_index(row + left)
                ^ config.get_index(row + x)
                ^ config.get_index(row + right);
            if s {
                out.set_index(row + x, true);
            }
        }
    }
    out
}

/// Fills the lattice upward from `bottom_row` with the row update
/// `σ(f) = σ(f−x̂−ŷ) ⊕ σ(f−ŷ) ⊕ σ(f+x̂−ŷ)`.
pub fn generate_codeword(shape: LatticeShape, bottom_row: &[bool]) -> Result<BitGrid> {
    let w = shape.width() as usize;
    if bottom_row.len() != w {
        return Err(Error::WrongLength {
            expected: w,
            got: bottom_row.len(),
        });
    }
    let mut grid = BitGrid::zeros(shape);
    let mut prev = bottom_row.to_vec();
    for y in 0..shape.height() as usize {
        if y > 0 {
            prev = (0..w)
                .map(|x| prev[(x + w - 1) % w] ^ prev[x] ^ prev[(x + 1) % w])
                .collect();
        }
        for (x, &b) in prev.iter().enumerate() {
            if b {
                grid.set_index(y * w + x, true);
            }
        }
    }
    Ok(grid)
}

pub fn is_codeword(config: &BitGrid) -> bool {
    syndrome(config).is_zero()
}

/// How a decoded sample ended up relative to the true error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    LogicalFailure,
}

/// Compares a syndrome-free correction with the error that produced it.
///
/// Only exact recovery counts as success; any nonzero codeword left behind is
/// a logical failure.
pub fn classify_residual(error: &BitGrid, correction: &BitGrid) -> Result<Outcome> {
    let residual = error.xor(correction)?;
    let defects = syndrome(&residual).weight();
    if defects != 0 {
        return Err(Error::ResidualHasDefects(defects));
    }
    Ok(if residual.is_zero() {
        Outcome::Success
    } else {
        Outcome::LogicalFailure
    })
}
