//! Symmetries: sets of checks whose sum vanishes identically.
//!
//! The fundamental symmetry is grown by a cellular automaton from a single
//! bit on the top row, `b(f) = b(f−x̂+ŷ) ⊕ b(f+ŷ) ⊕ b(f+x̂+ŷ)`, filling rows in
//! descending order. Its members form an inverted Sierpinski-like triangle
//! whose apex sits at `(L/2, L/2)` and whose base is centred on the anchor
//! `F = (L/2, 1)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::code::{syndrome, BitGrid};
use crate::error::{Error, Result};
use crate::lattice::{FaceCoord, LatticeShape, Offset};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symmetry {
    indicator: BitGrid,
    /// The face `F` for a fundamental symmetry or one of its translates.
    anchor: Option<FaceCoord>,
}

impl Symmetry {
    /// The identity element: no checks at all.
    pub fn empty(shape: LatticeShape) -> Self {
        Self {
            indicator: BitGrid::zeros(shape),
            anchor: None,
        }
    }

    /// Wraps an arbitrary indicator; no null-sum check is made.
    pub fn from_indicator(indicator: BitGrid) -> Self {
        Self {
            indicator,
            anchor: None,
        }
    }

    /// Runs the cellular automaton from the top row down to the bottom row.
    pub fn generate_fundamental(shape: LatticeShape) -> Self {
        let w = shape.width() as usize;
        let h = shape.height() as usize;
        let mut indicator = BitGrid::zeros(shape);
        let mut row = vec![false; w];
        row[w / 2 - 1] = true; // x = L/2
        for y in (0..h).rev() {
            if y + 1 < h {
                row = (0..w)
                    .map(|x| row[(x + w - 1) % w] ^ row[x] ^ row[(x + 1) % w])
                    .collect();
            }
            for (x, &b) in row.iter().enumerate() {
                if b {
                    indicator.set_index(y * w + x, true);
                }
            }
        }
        Self {
            indicator,
            anchor: Some(Self::fundamental_anchor(shape)),
        }
    }

    /// Cached fundamental symmetry for `shape`.
    pub fn fundamental(shape: LatticeShape) -> Arc<Symmetry> {
        static CACHE: OnceLock<Mutex<HashMap<LatticeShape, Arc<Symmetry>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry(shape)
            .or_insert_with(|| Arc::new(Self::generate_fundamental(shape)))
            .clone()
    }

    pub fn fundamental_anchor(shape: LatticeShape) -> FaceCoord {
        FaceCoord::new(shape.width() / 2, 1)
    }

    pub fn shape(&self) -> LatticeShape {
        self.indicator.shape()
    }

    pub fn indicator(&self) -> &BitGrid {
        &self.indicator
    }

    pub fn anchor(&self) -> Option<FaceCoord> {
        self.anchor
    }

    pub fn len(&self) -> usize {
        self.indicator.weight()
    }

    pub fn is_empty(&self) -> bool {
        self.indicator.is_zero()
    }

    pub fn contains(&self, f: FaceCoord) -> bool {
        self.indicator.get(f)
    }

    /// Member faces in index order.
    pub fn members(&self) -> impl Iterator<Item = FaceCoord> + '_ {
        let shape = self.shape();
        self.indicator.ones_indices().map(move |i| shape.face_at(i))
    }

    /// Shifts every member (and the anchor) by `r`.
    pub fn translate(&self, r: Offset) -> Symmetry {
        let shape = self.shape();
        Symmetry {
            indicator: self.indicator.translated(r.dx, r.dy),
            anchor: self.anchor.map(|a| shape.offset(a, r.dx, r.dy)),
        }
    }

    /// Group product: symmetric difference of the member sets.
    pub fn compose(&self, other: &Symmetry) -> Result<Symmetry> {
        let indicator = self.indicator.xor(&other.indicator)?;
        let anchor = if other.is_empty() {
            self.anchor
        } else if self.is_empty() {
            other.anchor
        } else {
            None
        };
        Ok(Symmetry { indicator, anchor })
    }

    /// Parity of the number of defects `error` leaves on member checks.
    pub fn defect_parity(&self, error: &BitGrid) -> Result<bool> {
        if error.shape() != self.shape() {
            return Err(Error::ShapeMismatch(error.shape(), self.shape()));
        }
        Ok(syndrome(error).and(&self.indicator)?.weight() % 2 == 1)
    }

    /// Checks that the member checks sum to zero by testing every unit error:
    /// by linearity this covers all errors.
    pub fn verify_null_sum(&self) -> bool {
        let shape = self.shape();
        (0..shape.num_faces()).all(|g| {
            let unit = BitGrid::from_indices(shape, [g]);
            !self.defect_parity(&unit).expect("same shape")
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shape(n: u32) -> LatticeShape {
        LatticeShape::from_exponent(n).unwrap()
    }

    #[test]
    fn fundamental_layout() {
        for n in 2..=7 {
            let s = shape(n);
            let sym = Symmetry::generate_fundamental(s);
            let l = s.width();
            // top row holds only the apex
            let top: Vec<u32> = (1..=l).filter(|&x| sym.contains(FaceCoord::new(x, l / 2))).collect();
            assert_eq!(top, vec![l / 2]);
            assert_eq!(sym.anchor(), Some(FaceCoord::new(l / 2, 1)));
            assert!(sym.contains(FaceCoord::new(l / 2, 1)), "S_F must be a member");
            // column x = L never holds a member: the triangle's base spans 1..L-1
            assert!((1..=l / 2).all(|y| !sym.contains(FaceCoord::new(l, y))));
            assert!(sym.contains(FaceCoord::new(1, 1)) && sym.contains(FaceCoord::new(l - 1, 1)));
        }
    }

    #[test]
    fn golden_member_counts() {
        // frozen from the automaton; L = 8 row pattern (top first):
        // ...X.... / ..XXX... / .X.X.X.. / XX.X.XX.
        let s = shape(3);
        let sym = Symmetry::generate_fundamental(s);
        assert_eq!(sym.indicator().to_ascii(), "...X....\n..XXX...\n.X.X.X..\nXX.X.XX.\n");
        let counts: Vec<usize> = (2..=7)
            .map(|n| Symmetry::generate_fundamental(shape(n)).len())
            .collect();
        assert_eq!(counts, GOLDEN_COUNTS);
    }

    const GOLDEN_COUNTS: [usize; 6] = [4, 12, 40, 128, 416, 1344];

    #[test]
    fn member_count_scales_fractally() {
        // |Σ| ~ c·L^D with D = 1 + log2(φ); the prefactor makes log|Σ|/log L
        // converge slowly, so measure the exponent between successive sizes
        let d = 1.0 + ((1.0 + 5f64.sqrt()) / 2.0).log2();
        for n in 4..=6 {
            let small = Symmetry::generate_fundamental(shape(n - 1)).len() as f64;
            let large = Symmetry::generate_fundamental(shape(n)).len() as f64;
            let dim = (large / small).log2();
            assert!((1.4..=1.9).contains(&dim), "n={n} dim={dim}");
            assert!((dim - d).abs() < 0.06, "n={n} dim={dim}");
        }
    }

    #[test]
    fn fundamental_satisfies_null_sum() {
        for n in 2..=6 {
            assert!(Symmetry::generate_fundamental(shape(n)).verify_null_sum());
        }
    }

    #[test]
    fn null_sum_examples() {
        let s = shape(3);
        assert!(Symmetry::empty(s).verify_null_sum());
        let single = Symmetry::from_indicator(BitGrid::from_faces(s, [FaceCoord::new(3, 3)]));
        assert!(!single.verify_null_sum());
    }

    #[test]
    fn random_errors_leave_even_parity_on_translates() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 3..=5 {
            let s = shape(n);
            let base = Symmetry::fundamental(s);
            let translates: Vec<Symmetry> = (0..20)
                .map(|_| {
                    base.translate(Offset::new(
                        rng.random_range(0..s.width() as i64),
                        rng.random_range(0..s.height() as i64),
                    ))
                })
                .collect();
            for _ in 0..200 {
                let mut e = BitGrid::zeros(s);
                for i in 0..s.num_faces() {
                    e.set_index(i, rng.random_bool(0.3));
                }
                assert!(!base.defect_parity(&e).unwrap());
                for t in &translates {
                    assert!(!t.defect_parity(&e).unwrap());
                }
            }
        }
    }

    #[test]
    fn translation_examples() {
        let s = shape(3);
        let sym = Symmetry::generate_fundamental(s);
        assert_eq!(sym.translate(Offset::new(0, 0)), sym);
        assert_eq!(sym.translate(Offset::new(8, 4)), sym);
        let shifted = sym.translate(Offset::new(1, 0));
        assert!(shifted.verify_null_sum());
        assert_eq!(shifted.anchor(), Some(FaceCoord::new(5, 1)));
        let r = Offset::new(3, -5);
        assert_eq!(sym.translate(r).translate(-r), sym);
    }

    #[test]
    fn composition_examples() {
        let s = shape(3);
        let sym = Symmetry::generate_fundamental(s);
        assert!(sym.compose(&sym).unwrap().is_empty());
        assert_eq!(sym.compose(&Symmetry::empty(s)).unwrap(), sym);
        let other = sym.translate(Offset::new(2, 0));
        let c = sym.compose(&other).unwrap();
        assert!(c.verify_null_sum());
        assert!(sym.compose(&Symmetry::empty(shape(4))).is_err());
    }

    #[test]
    fn horizontal_translates_generate_two_to_the_l_symmetries() {
        // closure of {Σ_{F+j x̂}} under composition at L = 8
        let s = shape(3);
        let base = Symmetry::generate_fundamental(s);
        let gens: Vec<BitGrid> = (1..=8)
            .map(|j| base.translate(Offset::new(j, 0)).indicator().clone())
            .collect();
        let mut group = std::collections::HashSet::new();
        for mask in 0u32..(1 << gens.len()) {
            let mut acc = BitGrid::zeros(s);
            for (j, g) in gens.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    acc ^= g;
                }
            }
            group.insert(acc);
        }
        assert_eq!(group.len(), 256);
        assert!(group
            .iter()
            .all(|g| Symmetry::from_indicator(g.clone()).verify_null_sum()));
    }

    #[test]
    fn cache_returns_the_same_instance() {
        let s = shape(4);
        let a = Symmetry::fundamental(s);
        let b = Symmetry::fundamental(s);
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(*a, Symmetry::generate_fundamental(s));
    }
}
