//! Probe-based iterative decoder.
//!
//! For every translation `g` of the fundamental symmetry, the defects lying
//! on `𝒢_g` are paired by minimum-weight perfect matching. The parity of
//! pairs whose canonical path uses the vertically wrapping edge is the
//! horizontal probe `H` of the face that generates that edge; the parity for
//! the horizontally wrapping edge is the vertical probe `V` of its own
//! generating face. One matching per translation thus gives one `H` and one
//! `V` value, and `L²/2` matchings give both probes on every face.
//!
//! Each iteration proposes `C^H = H`, `C^V = V` and `C^D = H ∧ V`, keeps the
//! one leaving the fewest defects, and stops when no defects remain or when
//! the defect count goes up.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::code::{syndrome, BitGrid, SyndromeGrid};
use crate::error::{Error, Result};
use crate::lattice::{FaceCoord, LatticeShape};
use crate::matching_graph::{clamp_probability, MatchingGraph, PairTable, WeightMatrix};
use crate::mwpm::min_weight_perfect_matching;
use crate::symmetry::Symmetry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Candidate {
    D,
    V,
    H,
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Candidate::D => "D",
            Candidate::V => "V",
            Candidate::H => "H",
        })
    }
}

impl FromStr for Candidate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D" | "d" => Ok(Candidate::D),
            "V" | "v" => Ok(Candidate::V),
            "H" | "h" => Ok(Candidate::H),
            _ => Err(Error::Config(format!("unknown candidate {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    /// Error rate assumed by the pair weights.
    pub p_w: f64,
    pub max_iterations: usize,
    /// Preference among candidates leaving equally many defects.
    pub tie_break_order: [Candidate; 3],
}

impl DecoderConfig {
    pub const DEFAULT_MAX_ITERATIONS: usize = 100;

    pub fn new(p_w: f64) -> Self {
        Self {
            p_w,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            tie_break_order: [Candidate::D, Candidate::V, Candidate::H],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.p_w.is_finite() {
            return Err(Error::Config(format!("weight rate {} is not finite", self.p_w)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        let mut order = self.tie_break_order;
        order.sort_by_key(|c| *c as u8);
        if order != [Candidate::D, Candidate::V, Candidate::H] {
            return Err(Error::Config("tie-break order must be a permutation of D, V, H".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecodeStatus {
    Converged,
    HeraldedFailure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub total_correction: BitGrid,
    pub iterations_used: usize,
    pub status: DecodeStatus,
    /// Candidate chosen in each completed iteration.
    pub choices: Vec<Candidate>,
}

/// The three candidate corrections of one iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidates {
    pub v: BitGrid,
    pub h: BitGrid,
    pub d: BitGrid,
}

impl Candidates {
    pub fn get(&self, c: Candidate) -> &BitGrid {
        match c {
            Candidate::D => &self.d,
            Candidate::V => &self.v,
            Candidate::H => &self.h,
        }
    }
}

/// Matching graph plus pair table for one lattice size.
#[derive(Debug)]
pub struct DecodingGraph {
    pub graph: MatchingGraph,
    pub table: PairTable,
}

impl DecodingGraph {
    pub fn build(shape: LatticeShape) -> Result<Self> {
        let graph = MatchingGraph::build(shape)?;
        let table = PairTable::build(&graph)?;
        Ok(Self { graph, table })
    }

    /// Process-wide cached instance.
    pub fn shared(shape: LatticeShape) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<LatticeShape, Arc<DecodingGraph>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(g) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&shape) {
            return Ok(g.clone());
        }
        let built = Arc::new(Self::build(shape)?);
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        Ok(guard.entry(shape).or_insert(built).clone())
    }
}

/// Per-translation probe results carried between iterations.
struct ProbeCache {
    h: Vec<bool>,
    v: Vec<bool>,
}

pub struct Decoder {
    shape: LatticeShape,
    cfg: DecoderConfig,
    graph: Arc<DecodingGraph>,
    weights: WeightMatrix,
    /// Vertex positions relative to the anchor, as `(dx, dy)` in `[0, L) × [0, L/2)`.
    offsets: Vec<(usize, usize)>,
    h_offset: (usize, usize),
    v_offset: (usize, usize),
    matchings: AtomicU64,
}

impl Decoder {
    pub fn new(shape: LatticeShape, cfg: DecoderConfig) -> Result<Self> {
        Self::with_graph(DecodingGraph::shared(shape)?, cfg)
    }

    pub fn with_graph(graph: Arc<DecodingGraph>, cfg: DecoderConfig) -> Result<Self> {
        cfg.validate()?;
        let shape = graph.graph.shape();
        let anchor = Symmetry::fundamental_anchor(shape);
        let rel = |f: FaceCoord| {
            let w = shape.width() as i64;
            let h = shape.height() as i64;
            (
                (f.x as i64 - anchor.x as i64).rem_euclid(w) as usize,
                (f.y as i64 - anchor.y as i64).rem_euclid(h) as usize,
            )
        };
        let offsets = graph.graph.vertices().iter().map(|&f| rel(f)).collect();
        let h_offset = rel(graph.graph.h_probe_face());
        let v_offset = rel(graph.graph.v_probe_face());
        let weights = graph.table.fixed_point_weights(clamp_probability(cfg.p_w));
        Ok(Self {
            shape,
            cfg,
            graph,
            weights,
            offsets,
            h_offset,
            v_offset,
            matchings: AtomicU64::new(0),
        })
    }

    pub fn shape(&self) -> LatticeShape {
        self.shape
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &DecodingGraph {
        &self.graph
    }

    /// Number of probe matchings evaluated so far (empty ones included).
    pub fn invocations(&self) -> u64 {
        self.matchings.load(Ordering::Relaxed)
    }

    #[inline]
    fn shift(&self, anchor: usize, (dx, dy): (usize, usize)) -> usize {
        let w = self.shape.width() as usize;
        let h = self.shape.height() as usize;
        let (ax, ay) = (anchor % w, anchor / w);
        ((ay + dy) % h) * w + (ax + dx) % w
    }

    /// Anchor index of the translated graph whose vertex `k` lies on `face`.
    #[inline]
    fn anchor_of(&self, face: usize, k: usize) -> usize {
        let w = self.shape.width() as usize;
        let h = self.shape.height() as usize;
        let (dx, dy) = self.offsets[k];
        let (fx, fy) = (face % w, face / w);
        ((fy + h - dy) % h) * w + (fx + w - dx) % w
    }

    fn probe_anchor(&self, syn: &SyndromeGrid, anchor: usize, nodes: &mut Vec<usize>) -> Result<(bool, bool)> {
        nodes.clear();
        nodes.extend((0..self.offsets.len()).filter(|&k| syn.get_index(self.shift(anchor, self.offsets[k]))));
        self.solve(anchor, nodes)
    }

    fn solve(&self, anchor: usize, nodes: &[usize]) -> Result<(bool, bool)> {
        self.matchings.fetch_add(1, Ordering::Relaxed);
        if nodes.is_empty() {
            return Ok((false, false));
        }
        if nodes.len() % 2 == 1 {
            return Err(Error::OddDefectParity {
                anchor: self.shape.face_at(anchor),
                count: nodes.len(),
            });
        }
        let pairing = min_weight_perfect_matching(&self.weights.restrict(nodes))?;
        let table = &self.graph.table;
        let (mut h, mut v) = (false, false);
        for (a, b) in pairing.pairs {
            h ^= table.crosses_h(nodes[a], nodes[b]);
            v ^= table.crosses_v(nodes[a], nodes[b]);
        }
        Ok((h, v))
    }

    /// Probes from the matching on `𝒢_g`: the horizontal probe of `g` and
    /// the vertical probe of `g + (L/2)·x̂`.
    pub fn probes_for_translation(&self, syn: &SyndromeGrid, g: FaceCoord) -> Result<(bool, bool)> {
        self.check_shape(syn)?;
        let mut nodes = Vec::new();
        self.probe_anchor(syn, self.shape.face_index(g), &mut nodes)
    }

    fn check_shape(&self, grid: &BitGrid) -> Result<()> {
        if grid.shape() != self.shape {
            return Err(Error::ShapeMismatch(grid.shape(), self.shape));
        }
        Ok(())
    }

    /// Evaluates every translation from scratch.
    fn probe_all(&self, syn: &SyndromeGrid) -> Result<ProbeCache> {
        let n = self.shape.num_faces();
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
        let defects: Vec<usize> = syn.ones_indices().collect();
        for k in 0..self.offsets.len() {
            for &d in &defects {
                lists[self.anchor_of(d, k)].push(k);
            }
        }
        let mut cache = ProbeCache {
            h: vec![false; n],
            v: vec![false; n],
        };
        for (anchor, nodes) in lists.iter().enumerate() {
            let (h, v) = self.solve(anchor, nodes)?;
            cache.h[anchor] = h;
            cache.v[anchor] = v;
        }
        Ok(cache)
    }

    /// Re-evaluates only translations whose symmetry sees a changed defect.
    fn probe_changed(&self, cache: &mut ProbeCache, syn: &SyndromeGrid, changed: &SyndromeGrid) -> Result<()> {
        let n = self.shape.num_faces();
        let mut dirty = vec![false; n];
        for c in changed.ones_indices() {
            for k in 0..self.offsets.len() {
                dirty[self.anchor_of(c, k)] = true;
            }
        }
        let mut nodes = Vec::new();
        for anchor in (0..n).filter(|&a| dirty[a]) {
            let (h, v) = self.probe_anchor(syn, anchor, &mut nodes)?;
            cache.h[anchor] = h;
            cache.v[anchor] = v;
        }
        Ok(())
    }

    fn assemble(&self, cache: &ProbeCache) -> Candidates {
        let n = self.shape.num_faces();
        let mut h = BitGrid::zeros(self.shape);
        let mut v = BitGrid::zeros(self.shape);
        for anchor in 0..n {
            if cache.h[anchor] {
                h.set_index(self.shift(anchor, self.h_offset), true);
            }
            if cache.v[anchor] {
                v.set_index(self.shift(anchor, self.v_offset), true);
            }
        }
        let d = h.and(&v).expect("same shape");
        Candidates { v, h, d }
    }

    /// All three candidates, from `L²/2` matchings.
    pub fn candidate_corrections(&self, syn: &SyndromeGrid) -> Result<Candidates> {
        self.check_shape(syn)?;
        Ok(self.assemble(&self.probe_all(syn)?))
    }

    /// Picks the candidate whose own syndrome cancels the most defects.
    pub fn select_correction(&self, syn: &SyndromeGrid, candidates: &Candidates) -> (Candidate, BitGrid) {
        select_correction(syn, candidates, &self.cfg.tie_break_order)
    }

    pub fn decode(&self, syn: &SyndromeGrid) -> Result<DecodeResult> {
        self.check_shape(syn)?;
        let mut current = syn.clone();
        let mut total = BitGrid::zeros(self.shape);
        let mut choices = Vec::new();
        if current.is_zero() {
            return Ok(DecodeResult {
                total_correction: total,
                iterations_used: 0,
                status: DecodeStatus::Converged,
                choices,
            });
        }

        let mut cache = self.probe_all(&current)?;
        let mut seen = HashSet::new();
        seen.insert(current.clone());
        let mut status = DecodeStatus::HeraldedFailure;
        let mut iterations = 0;
        while iterations < self.cfg.max_iterations {
            let candidates = self.assemble(&cache);
            let (label, correction) = self.select_correction(&current, &candidates);
            let change = syndrome(&correction);
            let next = &current ^ &change;
            iterations += 1;
            choices.push(label);
            if next.weight() > current.weight() {
                break;
            }
            total ^= &correction;
            if next.is_zero() {
                status = DecodeStatus::Converged;
                break;
            }
            if !seen.insert(next.clone()) {
                // a repeated state cycles with constant weight until the cap
                iterations = self.cfg.max_iterations;
                break;
            }
            self.probe_changed(&mut cache, &next, &change)?;
            current = next;
        }
        Ok(DecodeResult {
            total_correction: total,
            iterations_used: iterations,
            status,
            choices,
        })
    }
}

/// Candidate leaving the lightest residual syndrome; ties follow `order`.
pub fn select_correction(syn: &SyndromeGrid, candidates: &Candidates, order: &[Candidate; 3]) -> (Candidate, BitGrid) {
    let mut best: Option<(usize, Candidate)> = None;
    for &c in order {
        let residual = (syn ^ &syndrome(candidates.get(c))).weight();
        if best.is_none_or(|(w, _)| residual < w) {
            best = Some((residual, c));
        }
    }
    let (_, c) = best.expect("three candidates");
    (c, candidates.get(c).clone())
}
