//! Periodic `L × L/2` lattice geometry.
//!
//! Faces are addressed with 1-based coordinates `(x, y)`, `1 <= x <= L`,
//! `1 <= y <= L/2`, and stored densely in row-major order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Shape of a supported lattice: `L = 2^N` columns and `L/2` rows, `N >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct LatticeShape {
    width: u32,
}

impl LatticeShape {
    /// Builds the shape for `L = width`; only powers of two `>= 4` are accepted.
    pub fn new(width: u32) -> Result<Self, Error> {
        if width >= 4 && width.is_power_of_two() {
            Ok(Self { width })
        } else {
            Err(Error::UnsupportedShape(width))
        }
    }

    /// Builds the shape for `L = 2^exponent`.
    pub fn from_exponent(exponent: u32) -> Result<Self, Error> {
        if !(2..=15).contains(&exponent) {
            return Err(Error::UnsupportedExponent(exponent));
        }
        Self::new(1 << exponent)
    }

    /// Horizontal extent `L`.
    #[inline]
    pub fn width(self) -> u32 {
        self.width
    }

    /// Vertical extent `L/2`.
    #[inline]
    pub fn height(self) -> u32 {
        self.width / 2
    }

    /// Number of faces, `L²/2`.
    #[inline]
    pub fn num_faces(self) -> usize {
        (self.width as usize) * (self.height() as usize)
    }

    pub fn exponent(self) -> u32 {
        self.width.trailing_zeros()
    }

    /// Canonical representative of an arbitrary integer coordinate pair.
    #[inline]
    pub fn wrap(self, raw_x: i64, raw_y: i64) -> FaceCoord {
        let w = self.width as i64;
        let h = self.height() as i64;
        FaceCoord {
            x: ((raw_x - 1).rem_euclid(w) + 1) as u32,
            y: ((raw_y - 1).rem_euclid(h) + 1) as u32,
        }
    }

    /// Row-major index `(y-1)·L + (x-1)` of a canonical face.
    #[inline]
    pub fn face_index(self, f: FaceCoord) -> usize {
        debug_assert!(self.contains(f), "non-canonical face {f}");
        (f.y as usize - 1) * self.width as usize + (f.x as usize - 1)
    }

    /// Inverse of [`face_index`](Self::face_index).
    #[inline]
    pub fn face_at(self, index: usize) -> FaceCoord {
        let w = self.width as usize;
        FaceCoord {
            x: (index % w) as u32 + 1,
            y: (index / w) as u32 + 1,
        }
    }

    #[inline]
    pub fn contains(self, f: FaceCoord) -> bool {
        (1..=self.width).contains(&f.x) && (1..=self.height()).contains(&f.y)
    }

    /// `f + (dx, dy)` with periodic wrapping.
    #[inline]
    pub fn offset(self, f: FaceCoord, dx: i64, dy: i64) -> FaceCoord {
        self.wrap(f.x as i64 + dx, f.y as i64 + dy)
    }

    /// Index of `f + (dx, dy)`.
    #[inline]
    pub fn offset_index(self, index: usize, dx: i64, dy: i64) -> usize {
        self.face_index(self.offset(self.face_at(index), dx, dy))
    }

    /// All faces in index order.
    pub fn faces(self) -> impl Iterator<Item = FaceCoord> {
        (0..self.num_faces()).map(move |i| self.face_at(i))
    }
}

impl TryFrom<u32> for LatticeShape {
    type Error = Error;

    fn try_from(width: u32) -> Result<Self, Error> {
        Self::new(width)
    }
}

impl From<LatticeShape> for u32 {
    fn from(shape: LatticeShape) -> u32 {
        shape.width
    }
}

impl fmt::Display for LatticeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height())
    }
}

/// A face in canonical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceCoord {
    pub x: u32,
    pub y: u32,
}

impl FaceCoord {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }
}

impl fmt::Display for FaceCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Translation `(dx, dy)` between faces, reduced modulo the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Offset {
    pub dx: i64,
    pub dy: i64,
}

impl Offset {
    pub const fn new(dx: i64, dy: i64) -> Self {
        Self { dx, dy }
    }

    /// The translation taking `from` onto `to`.
    pub fn between(from: FaceCoord, to: FaceCoord) -> Self {
        Self {
            dx: to.x as i64 - from.x as i64,
            dy: to.y as i64 - from.y as i64,
        }
    }
}

impl std::ops::Neg for Offset {
    type Output = Offset;

    fn neg(self) -> Offset {
        Offset::new(-self.dx, -self.dy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn l8() -> LatticeShape {
        LatticeShape::new(8).unwrap()
    }

    #[test]
    fn wrap_examples() {
        let s = l8();
        assert_eq!(s.wrap(9, 1), FaceCoord::new(1, 1));
        assert_eq!(s.wrap(0, 0), FaceCoord::new(8, 4));
        assert_eq!(s.wrap(3, 2), FaceCoord::new(3, 2));
    }

    #[test]
    fn face_index_examples() {
        let s = l8();
        assert_eq!(s.face_index(FaceCoord::new(1, 1)), 0);
        assert_eq!(s.face_index(FaceCoord::new(8, 1)), 7);
        assert_eq!(s.face_index(FaceCoord::new(1, 2)), 8);
    }

    #[test]
    fn rejects_unsupported_widths() {
        for w in [0, 1, 2, 3, 6, 12, 24, 100] {
            assert!(LatticeShape::new(w).is_err(), "{w}");
        }
        assert!(LatticeShape::from_exponent(1).is_err());
        assert_eq!(LatticeShape::from_exponent(3).unwrap().width(), 8);
    }

    #[test]
    fn face_index_is_a_bijection() {
        for n in 2..=6 {
            let s = LatticeShape::from_exponent(n).unwrap();
            let mut seen = vec![false; s.num_faces()];
            for f in s.faces() {
                let i = s.face_index(f);
                assert!(!seen[i]);
                seen[i] = true;
                assert_eq!(s.face_at(i), f);
            }
            assert!(seen.iter().all(|&b| b));
            assert_eq!(s.num_faces(), (s.width() * s.width() / 2) as usize);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn wrap_is_idempotent(n in 2u32..=7, x in -1000i64..1000, y in -1000i64..1000) {
            let s = LatticeShape::from_exponent(n).unwrap();
            let f = s.wrap(x, y);
            prop_assert!(s.contains(f));
            prop_assert_eq!(s.wrap(f.x as i64, f.y as i64), f);
        }

        #[test]
        fn full_period_translation_fixes_faces(n in 2u32..=7, x in -100i64..100, y in -100i64..100) {
            let s = LatticeShape::from_exponent(n).unwrap();
            let f = s.wrap(x, y);
            prop_assert_eq!(s.offset(f, s.width() as i64, 0), f);
            prop_assert_eq!(s.offset(f, 0, s.height() as i64), f);
        }
    }
}
