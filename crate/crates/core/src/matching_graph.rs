//! The matching graph on the faces of the fundamental symmetry.
//!
//! Vertices are the member faces of `Σ_F`, numbered in face-index order.
//! Two vertices share an edge when a single bit flip creates defects on both
//! of them (and on no other member). A flip that lands four defects on the
//! symmetry is read as two short strings crossing at the flipped face: the
//! vertical segment `{g, g−ŷ}` and the horizontal segment `{g−x̂, g+x̂}`.
//!
//! Exactly two edges leave the triangular support by wrapping around the
//! torus. The edge that wraps vertically joins `F` to the apex and gives the
//! horizontal probe, the one that wraps horizontally joins the two ends of
//! the bottom row and gives the vertical probe.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::code::flip_stencil;
use crate::error::{Error, Result};
use crate::lattice::{FaceCoord, LatticeShape};
use crate::mwpm::PairWeights;
use crate::symmetry::Symmetry;

/// How single flips with four defects on the symmetry enter the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FourDefectRule {
    /// Two edges, `{g, g−ŷ}` and `{g−x̂, g+x̂}`.
    #[default]
    Split,
    /// No edge at all.
    Ignore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    /// Vertex ids, `a < b`.
    pub ends: (usize, usize),
    /// Faces whose flip puts defects on exactly these two vertices.
    pub generators: Vec<FaceCoord>,
    /// Four-defect faces that contribute this edge as one of their segments.
    pub split_generators: Vec<FaceCoord>,
    #[serde(skip)]
    wraps_x: bool,
    #[serde(skip)]
    wraps_y: bool,
}

impl Edge {
    /// Number of single flips that produce this string segment.
    pub fn multiplicity(&self) -> usize {
        self.generators.len() + self.split_generators.len()
    }

    /// The unique generating face; only meaningful for multiplicity 1.
    fn sole_generator(&self) -> Option<FaceCoord> {
        match (self.generators.as_slice(), self.split_generators.as_slice()) {
            ([g], []) | ([], [g]) => Some(*g),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MatchingGraph {
    shape: LatticeShape,
    rule: FourDefectRule,
    vertices: Vec<FaceCoord>,
    vertex_of_face: Vec<Option<usize>>,
    edges: Vec<Edge>,
    /// `(neighbour, edge id)` sorted by neighbour.
    adjacency: Vec<Vec<(usize, usize)>>,
    defect_tally: [usize; 5],
    special_h: usize,
    special_v: usize,
}

impl MatchingGraph {
    pub fn build(shape: LatticeShape) -> Result<Self> {
        Self::build_with(shape, FourDefectRule::default())
    }

    pub fn build_with(shape: LatticeShape, rule: FourDefectRule) -> Result<Self> {
        let sym = Symmetry::fundamental(shape);
        let vertices: Vec<FaceCoord> = sym.members().collect();
        let mut vertex_of_face = vec![None; shape.num_faces()];
        for (id, &f) in vertices.iter().enumerate() {
            vertex_of_face[shape.face_index(f)] = Some(id);
        }

        let (w, h) = (shape.width() as i64, shape.height() as i64);
        let mut by_pair: BTreeMap<(usize, usize), Edge> = BTreeMap::new();
        let mut defect_tally = [0usize; 5];
        for gi in 0..shape.num_faces() {
            let g = shape.face_at(gi);
            let (gx, gy) = (g.x as i64, g.y as i64);
            let raw = [(gx, gy), (gx, gy - 1), (gx - 1, gy), (gx + 1, gy)];
            let stencil = flip_stencil(shape, gi);
            let hit: Vec<usize> = (0..4).filter(|&k| vertex_of_face[stencil[k]].is_some()).collect();
            defect_tally[hit.len()] += 1;

            let segments: Vec<([usize; 2], bool)> = match hit.len() {
                2 => vec![([hit[0], hit[1]], false)],
                4 if rule == FourDefectRule::Split => vec![([0, 1], true), ([2, 3], true)],
                _ => Vec::new(),
            };
            for ([i, j], split) in segments {
                let (a, b) = (vertex_of_face[stencil[i]].unwrap(), vertex_of_face[stencil[j]].unwrap());
                let outside = |(x, y): (i64, i64)| (!(1..=w).contains(&x), !(1..=h).contains(&y));
                let (xi, yi) = outside(raw[i]);
                let (xj, yj) = outside(raw[j]);
                let edge = by_pair.entry((a.min(b), a.max(b))).or_insert_with(|| Edge {
                    ends: (a.min(b), a.max(b)),
                    generators: Vec::new(),
                    split_generators: Vec::new(),
                    wraps_x: false,
                    wraps_y: false,
                });
                edge.wraps_x |= xi || xj;
                edge.wraps_y |= yi || yj;
                if split {
                    edge.split_generators.push(g);
                } else {
                    edge.generators.push(g);
                }
            }
        }

        let edges: Vec<Edge> = by_pair.into_values().collect();
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (k, e) in edges.iter().enumerate() {
            adjacency[e.ends.0].push((e.ends.1, k));
            adjacency[e.ends.1].push((e.ends.0, k));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        let special_h = Self::unique_special(&edges, |e| e.wraps_y, "vertically")?;
        let special_v = Self::unique_special(&edges, |e| e.wraps_x, "horizontally")?;
        if special_h == special_v {
            return Err(Error::Structure("one edge wraps both ways".into()));
        }

        Ok(Self {
            shape,
            rule,
            vertices,
            vertex_of_face,
            edges,
            adjacency,
            defect_tally,
            special_h,
            special_v,
        })
    }

    fn unique_special(edges: &[Edge], pred: impl Fn(&Edge) -> bool, how: &str) -> Result<usize> {
        let found: Vec<usize> = (0..edges.len()).filter(|&k| pred(&edges[k])).collect();
        match found.as_slice() {
            [k] if edges[*k].sole_generator().is_some() => Ok(*k),
            [k] => Err(Error::Structure(format!(
                "edge wrapping {how} has multiplicity {}",
                edges[*k].multiplicity()
            ))),
            _ => Err(Error::Structure(format!(
                "expected exactly one edge wrapping {how}, found {}",
                found.len()
            ))),
        }
    }

    pub fn shape(&self) -> LatticeShape {
        self.shape
    }

    pub fn rule(&self) -> FourDefectRule {
        self.rule
    }

    pub fn vertices(&self) -> &[FaceCoord] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_id(&self, f: FaceCoord) -> Option<usize> {
        self.vertex_of_face[self.shape.face_index(f)]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let list = &self.adjacency[a];
        list.binary_search_by_key(&b, |&(n, _)| n).ok().map(|i| list[i].1)
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// How many faces put 0, 1, .., 4 defects on the symmetry.
    pub fn defect_tally(&self) -> [usize; 5] {
        self.defect_tally
    }

    /// The edge wrapping vertically (crosses the horizontal cut).
    pub fn special_h(&self) -> usize {
        self.special_h
    }

    /// The edge wrapping horizontally (crosses the vertical cut).
    pub fn special_v(&self) -> usize {
        self.special_v
    }

    /// Face tested by the horizontal probe of this (untranslated) graph.
    pub fn h_probe_face(&self) -> FaceCoord {
        self.edges[self.special_h].sole_generator().unwrap()
    }

    /// Face tested by the vertical probe of this (untranslated) graph.
    pub fn v_probe_face(&self) -> FaceCoord {
        self.edges[self.special_v].sole_generator().unwrap()
    }
}

/// Saturation point for path counts.
pub const DEGENERACY_CAP: u64 = 1 << 62;

const CROSS_H: u8 = 1;
const CROSS_V: u8 = 2;

/// Distances, path counts and crossing flags for every vertex pair.
///
/// Paths are canonical BFS paths from the lower vertex id, expanding
/// neighbours in id order and keeping the first predecessor found.
#[derive(Debug, Clone)]
pub struct PairTable {
    n: usize,
    distance: Vec<u16>,
    degeneracy: Vec<u64>,
    flags: Vec<u8>,
}

impl PairTable {
    pub fn build(graph: &MatchingGraph) -> Result<Self> {
        let n = graph.num_vertices();
        let mut distance = vec![0u16; n * n];
        let mut degeneracy = vec![0u64; n * n];
        let mut flags = vec![0u8; n * n];

        let mut dist = vec![u32::MAX; n];
        let mut count = vec![0u64; n];
        let mut flag = vec![0u8; n];
        let mut queue = VecDeque::with_capacity(n);
        for s in 0..n {
            dist.fill(u32::MAX);
            count.fill(0);
            dist[s] = 0;
            count[s] = 1;
            flag[s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &(v, k) in graph.neighbors(u) {
                    let m = graph.edges[k].multiplicity() as u64;
                    if dist[v] == u32::MAX {
                        dist[v] = dist[u] + 1;
                        let mut f = flag[u];
                        if k == graph.special_h {
                            f ^= CROSS_H;
                        }
                        if k == graph.special_v {
                            f ^= CROSS_V;
                        }
                        flag[v] = f;
                        queue.push_back(v);
                    }
                    if dist[v] == dist[u] + 1 {
                        count[v] = count[v].saturating_add(count[u].saturating_mul(m)).min(DEGENERACY_CAP);
                    }
                }
            }
            if let Some(t) = dist.iter().position(|&d| d == u32::MAX) {
                return Err(Error::Structure(format!(
                    "matching graph is disconnected: {} unreachable from {}",
                    graph.vertices[t], graph.vertices[s]
                )));
            }
            // only the lower endpoint's search defines the canonical path
            for t in s..n {
                let d = u16::try_from(dist[t]).map_err(|_| Error::Structure("distance overflow".into()))?;
                for idx in [s * n + t, t * n + s] {
                    distance[idx] = d;
                    degeneracy[idx] = count[t];
                    flags[idx] = flag[t];
                }
            }
        }
        Ok(Self {
            n,
            distance,
            degeneracy,
            flags,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn distance(&self, u: usize, v: usize) -> u32 {
        self.distance[u * self.n + v] as u32
    }

    pub fn degeneracy(&self, u: usize, v: usize) -> u64 {
        self.degeneracy[u * self.n + v]
    }

    pub fn crosses_h(&self, u: usize, v: usize) -> bool {
        self.flags[u * self.n + v] & CROSS_H != 0
    }

    pub fn crosses_v(&self, u: usize, v: usize) -> bool {
        self.flags[u * self.n + v] & CROSS_V != 0
    }

    /// Real-valued connection weight for the pair.
    pub fn weight(&self, u: usize, v: usize, p_w: f64) -> f64 {
        edge_weight(self.distance(u, v), self.degeneracy(u, v), p_w)
    }

    /// Fixed-point weights for every pair at the given assumed error rate.
    pub fn fixed_point_weights(&self, p_w: f64) -> WeightMatrix {
        let n = self.n;
        let mut w = vec![0i64; n * n];
        for u in 0..n {
            for v in u + 1..n {
                let x = to_fixed_point(self.weight(u, v, p_w));
                w[u * n + v] = x;
                w[v * n + u] = x;
            }
        }
        WeightMatrix { n, w }
    }
}

/// Assumed error rates are kept inside `[1e-6, 0.5 − 1e-6]`.
pub fn clamp_probability(p: f64) -> f64 {
    p.clamp(1e-6, 0.5 - 1e-6)
}

/// `E·log((1−p)/p) − log D`, with `p` clamped.
pub fn edge_weight(distance: u32, degeneracy: u64, p_w: f64) -> f64 {
    let p = clamp_probability(p_w);
    distance as f64 * ((1.0 - p) / p).ln() - (degeneracy.max(1) as f64).ln()
}

pub const WEIGHT_SCALE: f64 = 1e6;

pub fn to_fixed_point(weight: f64) -> i64 {
    (weight * WEIGHT_SCALE).round_ties_even() as i64
}

/// Dense integer weights between graph vertices.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    n: usize,
    w: Vec<i64>,
}

impl WeightMatrix {
    #[inline]
    pub fn get(&self, u: usize, v: usize) -> i64 {
        self.w[u * self.n + v]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// The matching problem over a subset of vertices.
    pub fn restrict<'a>(&'a self, nodes: &'a [usize]) -> Restricted<'a> {
        Restricted { matrix: self, nodes }
    }
}

pub struct Restricted<'a> {
    matrix: &'a WeightMatrix,
    nodes: &'a [usize],
}

impl PairWeights for Restricted<'_> {
    fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    fn weight(&self, a: usize, b: usize) -> i64 {
        self.matrix.get(self.nodes[a], self.nodes[b])
    }
}

#[derive(Debug, Serialize)]
pub struct GraphDump {
    pub width: u32,
    pub height: u32,
    pub four_defect_rule: FourDefectRule,
    pub vertices: Vec<FaceCoord>,
    pub edges: Vec<EdgeDump>,
    pub special_h: usize,
    pub special_v: usize,
    pub defect_tally: [usize; 5],
    pub pairs: Vec<PairDump>,
}

#[derive(Debug, Serialize)]
pub struct EdgeDump {
    pub id: usize,
    pub u: usize,
    pub v: usize,
    pub multiplicity: usize,
    pub generators: Vec<FaceCoord>,
    pub split_generators: Vec<FaceCoord>,
}

#[derive(Debug, Serialize)]
pub struct PairDump {
    pub u: usize,
    pub v: usize,
    pub distance: u32,
    pub degeneracy: u64,
    pub crosses_h: bool,
    pub crosses_v: bool,
}

impl GraphDump {
    pub fn new(graph: &MatchingGraph, table: &PairTable) -> Self {
        let n = graph.num_vertices();
        Self {
            width: graph.shape.width(),
            height: graph.shape.height(),
            four_defect_rule: graph.rule,
            vertices: graph.vertices.clone(),
            edges: graph
                .edges
                .iter()
                .enumerate()
                .map(|(id, e)| EdgeDump {
                    id,
                    u: e.ends.0,
                    v: e.ends.1,
                    multiplicity: e.multiplicity(),
                    generators: e.generators.clone(),
                    split_generators: e.split_generators.clone(),
                })
                .collect(),
            special_h: graph.special_h,
            special_v: graph.special_v,
            defect_tally: graph.defect_tally,
            pairs: (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .map(|(u, v)| PairDump {
                    u,
                    v,
                    distance: table.distance(u, v),
                    degeneracy: table.degeneracy(u, v),
                    crosses_h: table.crosses_h(u, v),
                    crosses_v: table.crosses_v(u, v),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{syndrome, BitGrid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shape(n: u32) -> LatticeShape {
        LatticeShape::from_exponent(n).unwrap()
    }

    fn graph(n: u32) -> (MatchingGraph, PairTable) {
        let g = MatchingGraph::build(shape(n)).unwrap();
        let t = PairTable::build(&g).unwrap();
        (g, t)
    }

    #[test]
    fn special_edges_sit_where_expected() {
        for n in 3..=7 {
            let s = shape(n);
            let l = s.width();
            let g = MatchingGraph::build(s).unwrap();
            let id = |x, y| g.vertex_id(FaceCoord::new(x, y)).unwrap();
            let h = &g.edges()[g.special_h()];
            let v = &g.edges()[g.special_v()];
            assert_eq!(h.ends, (id(l / 2, 1), id(l / 2, l / 2)), "L={l}");
            assert_eq!(v.ends, (id(1, 1), id(l - 1, 1)), "L={l}");
            assert_eq!(g.h_probe_face(), FaceCoord::new(l / 2, 1));
            assert_eq!(g.v_probe_face(), FaceCoord::new(l, 1));
            let wrapping = g.edges().iter().filter(|e| e.wraps_x || e.wraps_y).count();
            assert_eq!(wrapping, 2);
        }
    }

    #[test]
    fn smallest_lattice_has_no_distinct_wrap_edge() {
        // at L = 4 the apex sits directly above F, doubling the wrap edge
        let err = MatchingGraph::build(shape(2)).unwrap_err();
        assert!(matches!(err, Error::Structure(_)), "{err}");
    }

    #[test]
    fn ignoring_four_defect_flips_loses_the_vertical_wrap_for_even_exponents() {
        assert!(MatchingGraph::build_with(shape(3), FourDefectRule::Ignore).is_ok());
        assert!(MatchingGraph::build_with(shape(5), FourDefectRule::Ignore).is_ok());
        for n in [4, 6] {
            let err = MatchingGraph::build_with(shape(n), FourDefectRule::Ignore).unwrap_err();
            assert!(matches!(err, Error::Structure(_)), "{err}");
        }
    }

    #[test]
    fn golden_defect_tally() {
        // |Δ| = 0, 1, 2, 3, 4 over all faces
        assert_eq!(graph(3).0.defect_tally(), [9, 0, 22, 0, 1]);
        assert_eq!(graph(4).0.defect_tally(), [53, 0, 70, 0, 5]);
        assert_eq!(graph(5).0.defect_tally(), [269, 0, 230, 0, 13]);
    }

    #[test]
    fn generators_produce_exactly_their_edge() {
        for n in 3..=5 {
            let (g, _) = graph(n);
            let s = g.shape();
            let sym = Symmetry::fundamental(s);
            for e in g.edges() {
                let ends = [g.vertices()[e.ends.0], g.vertices()[e.ends.1]];
                for &f in &e.generators {
                    let syn = syndrome(&BitGrid::from_faces(s, [f]));
                    let on: Vec<FaceCoord> = syn
                        .and(sym.indicator())
                        .unwrap()
                        .ones_indices()
                        .map(|i| s.face_at(i))
                        .collect();
                    assert_eq!(on, ends.to_vec());
                }
                for &f in &e.split_generators {
                    let syn = syndrome(&BitGrid::from_faces(s, [f])).and(sym.indicator()).unwrap();
                    assert_eq!(syn.weight(), 4);
                    assert!(ends.iter().all(|&v| syn.get(v)));
                }
            }
        }
    }

    #[test]
    fn degenerate_edge_has_distance_one_and_two_paths() {
        let (g, t) = graph(3);
        let e = g
            .edges()
            .iter()
            .find(|e| e.generators.len() == 2)
            .expect("a doubled edge");
        assert_ne!(e.generators[0], e.generators[1]);
        assert_eq!(t.distance(e.ends.0, e.ends.1), 1);
        assert_eq!(t.degeneracy(e.ends.0, e.ends.1), 2);
    }

    #[test]
    fn trivial_pairs() {
        let (g, t) = graph(4);
        for u in 0..g.num_vertices() {
            assert_eq!(t.distance(u, u), 0);
            assert_eq!(t.degeneracy(u, u), 1);
            assert!(!t.crosses_h(u, u) && !t.crosses_v(u, u));
        }
    }

    #[test]
    fn special_pairs_cross() {
        for n in 3..=6 {
            let (g, t) = graph(n);
            let (a, b) = g.edges()[g.special_h()].ends;
            assert!(t.crosses_h(a, b) && !t.crosses_v(a, b));
            let (a, b) = g.edges()[g.special_v()].ends;
            assert!(t.crosses_v(a, b) && !t.crosses_h(a, b));
            assert_eq!(t.distance(a, b), 1);
        }
    }

    #[test]
    fn distance_is_a_metric() {
        for n in 3..=4 {
            let (g, t) = graph(n);
            let v = g.num_vertices();
            for a in 0..v {
                for b in 0..v {
                    assert_eq!(t.distance(a, b), t.distance(b, a));
                    assert_eq!(t.degeneracy(a, b), t.degeneracy(b, a));
                    assert!(t.degeneracy(a, b) >= 1);
                    assert_eq!(t.distance(a, b) == 0, a == b);
                    for c in 0..v {
                        assert!(t.distance(a, c) <= t.distance(a, b) + t.distance(b, c));
                    }
                }
            }
        }
    }

    #[test]
    fn random_single_flips_connect_adjacent_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in [3, 4, 5] {
            let (g, t) = graph(n);
            let s = g.shape();
            let sym = Symmetry::fundamental(s);
            let mut seen = 0;
            while seen < 1000 {
                let f = rng.random_range(0..s.num_faces());
                let on: Vec<usize> = syndrome(&BitGrid::from_indices(s, [f]))
                    .and(sym.indicator())
                    .unwrap()
                    .ones_indices()
                    .map(|i| g.vertex_id(s.face_at(i)).unwrap())
                    .collect();
                if on.len() == 2 {
                    assert_eq!(t.distance(on[0], on[1]), 1);
                    seen += 1;
                }
            }
        }
    }

    /// Counts the smallest sets of string segments (edge with a chosen
    /// generator) whose endpoints cancel down to exactly `{u, v}`.
    fn brute_force_paths(g: &MatchingGraph, u: usize, v: usize) -> (u32, u64) {
        let units: Vec<u64> = g
            .edges()
            .iter()
            .flat_map(|e| std::iter::repeat_n((1u64 << e.ends.0) | (1u64 << e.ends.1), e.multiplicity()))
            .collect();
        let target = (1u64 << u) | (1u64 << v);

        fn count(units: &[u64], start: usize, left: usize, acc: u64, target: u64) -> u64 {
            if left == 0 {
                return (acc == target) as u64;
            }
            (start..=units.len() - left)
                .map(|i| count(units, i + 1, left - 1, acc ^ units[i], target))
                .sum()
        }

        for k in 1..=units.len() {
            let c = count(&units, 0, k, 0, target);
            if c > 0 {
                return (k as u32, c);
            }
        }
        unreachable!("graph is connected")
    }

    #[test]
    fn degeneracy_matches_brute_force_enumeration() {
        let (g, t) = graph(3);
        assert!(g.num_vertices() <= 64);
        for u in 0..g.num_vertices() {
            for v in u + 1..g.num_vertices() {
                let (k, c) = brute_force_paths(&g, u, v);
                assert_eq!(t.distance(u, v), k, "({u}, {v})");
                assert_eq!(t.degeneracy(u, v), c, "({u}, {v})");
            }
        }
    }

    #[test]
    fn edge_weight_examples() {
        assert!((edge_weight(1, 1, 0.1) - 9f64.ln()).abs() < 1e-12);
        assert!((edge_weight(1, 1, 0.1) - 2.1972).abs() < 1e-4);
        assert!((edge_weight(1, 2, 0.1) - 1.5041).abs() < 1e-4);
        for p in [1e-4, 0.01, 0.1, 0.3, 0.49] {
            assert!(edge_weight(2, 1, p) > edge_weight(1, 2, p));
        }
        // out-of-range rates are clamped, not propagated as NaN or infinity
        assert!(edge_weight(3, 1, 0.0).is_finite());
        assert!(edge_weight(3, 1, 0.7).is_finite());
        assert_eq!(edge_weight(3, 1, 0.7), edge_weight(3, 1, 0.5 - 1e-6));
    }

    #[test]
    fn fixed_point_rounds_half_to_even() {
        assert_eq!(to_fixed_point(2.5e-6), 2);
        assert_eq!(to_fixed_point(3.5e-6), 4);
        assert_eq!(to_fixed_point(-2.5e-6), -2);
        let (g, t) = graph(3);
        let w = t.fixed_point_weights(0.1);
        assert_eq!(w.len(), g.num_vertices());
        let (a, b) = g.edges()[0].ends;
        assert_eq!(w.get(a, b), w.get(b, a));
        assert_eq!(w.get(a, b), to_fixed_point(t.weight(a, b, 0.1)));
    }

    #[test]
    fn dump_lists_every_pair_once() {
        let (g, t) = graph(3);
        let d = GraphDump::new(&g, &t);
        let v = g.num_vertices();
        assert_eq!(d.pairs.len(), v * (v - 1) / 2);
        assert_eq!(d.edges.len(), g.edges().len());
        let json = serde_json::to_value(&d).unwrap();
        assert_eq!(json["special_h"], g.special_h());
        assert_eq!(json["four_defect_rule"], "split");
    }
}
