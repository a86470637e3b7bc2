//! Space and divisibility barriers, lattice detection of divisibility
//! obstructions, and an exact maximum-matching oracle.

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Matching, Vertex};
use crate::intlin::{to_big, Hnf};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// A subgroup of `Z^d` held as its Hermite normal form basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegerLattice {
    pub dim: usize,
    pub basis: Vec<Vec<i64>>,
}

impl IntegerLattice {
    fn from_hnf(h: &Hnf) -> Self {
        IntegerLattice {
            dim: h.dim,
            basis: h
                .basis
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|x| x.to_i64().expect("lattice entry fits i64"))
                        .collect()
                })
                .collect(),
        }
    }

    fn hnf(&self) -> Hnf {
        Hnf::from_rows(&self.basis, self.dim, false)
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// `[Z^d : L]`, or `None` when the lattice is not of full rank.
    pub fn determinant(&self) -> Option<BigInt> {
        if self.rank() < self.dim {
            return None;
        }
        Some(
            (0..self.dim)
                .map(|k| BigInt::from(self.basis[k][k]))
                .product(),
        )
    }

    /// Index inside `{v : Σv ≡ 0 (mod r)}`, the largest lattice that can hold
    /// the edge vectors of an r-graph. `None` if `L` is not of full rank.
    pub fn index_in_sum_lattice(&self, r: usize) -> Option<BigInt> {
        let det = self.determinant()?;
        let r = BigInt::from(r);
        if (&det % &r).is_zero() {
            Some(det / r)
        } else {
            None
        }
    }
}

pub fn lattice_from_vectors(vs: &[Vec<i64>]) -> Result<IntegerLattice> {
    let Some(first) = vs.first() else {
        return Err(Error::InvalidInput(
            "lattice needs at least one generator".into(),
        ));
    };
    let d = first.len();
    if vs.iter().any(|v| v.len() != d) {
        return Err(Error::InvalidInput(
            "generators of different dimensions".into(),
        ));
    }
    Ok(IntegerLattice::from_hnf(&Hnf::from_rows(vs, d, false)))
}

pub fn lattice_contains(l: &IntegerLattice, v: &[i64]) -> Result<bool> {
    if v.len() != l.dim {
        return Err(Error::InvalidInput(format!(
            "vector of dimension {} tested against a lattice in Z^{}",
            v.len(),
            l.dim
        )));
    }
    Ok(l.hnf().contains(&to_big(v)))
}

/// Ordered partition of `0..n` into nonempty parts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexPartition {
    parts: Vec<Vec<Vertex>>,
    #[serde(skip)]
    part_of: Vec<usize>,
}

impl VertexPartition {
    pub fn new(n: usize, parts: Vec<Vec<Vertex>>) -> Result<Self> {
        let mut part_of = vec![usize::MAX; n];
        for (i, p) in parts.iter().enumerate() {
            if p.is_empty() {
                return Err(Error::InvalidInput(format!("part {i} is empty")));
            }
            for &v in p {
                if v >= n || part_of[v] != usize::MAX {
                    return Err(Error::InvalidInput(format!(
                        "vertex {v} out of range or in two parts"
                    )));
                }
                part_of[v] = i;
            }
        }
        if part_of.contains(&usize::MAX) {
            return Err(Error::InvalidInput(
                "parts do not cover every vertex".into(),
            ));
        }
        let parts = parts
            .into_iter()
            .map(|mut p| {
                p.sort_unstable();
                p
            })
            .collect();
        Ok(VertexPartition { parts, part_of })
    }

    /// Parts given as a label per vertex (labels `0..d`, all used).
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let d = labels.iter().max().map_or(0, |&m| m + 1);
        let mut parts = vec![Vec::new(); d];
        for (v, &l) in labels.iter().enumerate() {
            parts[l].push(v);
        }
        VertexPartition::new(labels.len(), parts)
    }

    pub fn parts(&self) -> &[Vec<Vertex>] {
        &self.parts
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn n(&self) -> usize {
        self.part_of.len()
    }

    pub fn sizes(&self) -> Vec<i64> {
        self.parts.iter().map(|p| p.len() as i64).collect()
    }
}

pub fn edge_vector(e: &[Vertex], p: &VertexPartition) -> Vec<i64> {
    let mut v = vec![0i64; p.num_parts()];
    for &x in e {
        v[p.part_of[x]] += 1;
    }
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceBarrierSpec {
    pub n: usize,
    pub r: usize,
    pub i: usize,
    pub s: Vec<Vertex>,
}

impl SpaceBarrierSpec {
    /// `|S| < i·n/r`, the condition making the construction an obstruction.
    pub fn is_barrier(&self) -> bool {
        self.s.len() * self.r < self.i * self.n
    }
}

/// All edges of the complete r-graph meeting `S` in at least `i` vertices.
pub fn space_barrier(spec: &SpaceBarrierSpec) -> Result<Hypergraph> {
    if spec.i == 0 || spec.i > spec.r {
        return Err(Error::InvalidInput(format!(
            "need 1 <= i <= r, got i = {}",
            spec.i
        )));
    }
    if spec.s.iter().any(|&v| v >= spec.n) {
        return Err(Error::InvalidInput("S has a vertex out of range".into()));
    }
    if !spec.is_barrier() {
        log::warn!(
            "|S| = {} is not below i·n/r = {}·{}/{}; the construction is not a barrier",
            spec.s.len(),
            spec.i,
            spec.n,
            spec.r
        );
    }
    let mut in_s = vec![false; spec.n];
    for &v in &spec.s {
        in_s[v] = true;
    }
    Ok(Hypergraph::complete_filtered(spec.n, spec.r, |e| {
        e.iter().filter(|&&v| in_s[v]).count() >= spec.i
    }))
}

/// All edges of the complete r-graph whose part-count vector lies in `l`.
pub fn divisibility_barrier(
    p: &VertexPartition,
    l: &IntegerLattice,
    r: usize,
) -> Result<Hypergraph> {
    if l.dim != p.num_parts() {
        return Err(Error::InvalidInput(format!(
            "lattice dimension {} differs from {} parts",
            l.dim,
            p.num_parts()
        )));
    }
    let hnf = l.hnf();
    if hnf.contains(&to_big(&p.sizes())) {
        return Err(Error::InvalidBarrier(format!(
            "part sizes {:?} lie in the lattice",
            p.sizes()
        )));
    }
    Ok(Hypergraph::complete_filtered(p.n(), r, |e| {
        hnf.contains(&to_big(&edge_vector(e, p)))
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum BarrierVerdict {
    /// The part sizes are outside the edge lattice: no perfect matching.
    Barrier {
        lattice: IntegerLattice,
        /// Index of the edge lattice in the sum lattice, when finite.
        index: Option<u64>,
    },
    NoObstructionAtP {
        lattice: IntegerLattice,
    },
}

impl BarrierVerdict {
    pub fn is_barrier(&self) -> bool {
        matches!(self, BarrierVerdict::Barrier { .. })
    }
}

fn edge_lattice(h: &Hypergraph, p: &VertexPartition) -> IntegerLattice {
    let vs: BTreeSet<Vec<i64>> = h.edges().iter().map(|e| edge_vector(e, p)).collect();
    let vs: Vec<Vec<i64>> = vs.into_iter().collect();
    if vs.is_empty() {
        return IntegerLattice {
            dim: p.num_parts(),
            basis: Vec::new(),
        };
    }
    lattice_from_vectors(&vs).expect("nonempty, equal dimensions")
}

pub fn detect_divisibility_barrier(h: &Hypergraph, p: &VertexPartition) -> Result<BarrierVerdict> {
    if p.n() != h.n() {
        return Err(Error::InvalidInput(
            "partition ground set differs from the instance".into(),
        ));
    }
    let lattice = edge_lattice(h, p);
    let member = lattice.hnf().contains(&to_big(&p.sizes()));
    Ok(if member {
        BarrierVerdict::NoObstructionAtP { lattice }
    } else {
        let index = lattice.index_in_sum_lattice(h.r()).and_then(|i| i.to_u64());
        BarrierVerdict::Barrier { lattice, index }
    })
}

/// Exhaustive search over partitions into at most `max_parts` parts.
pub fn search_divisibility_barrier(
    h: &Hypergraph,
    max_parts: usize,
) -> Result<Option<(VertexPartition, BarrierVerdict)>> {
    let n = h.n();
    if n > 12 || max_parts > 3 {
        return Err(Error::TooLarge(
            "partition search is limited to n <= 12 and d <= 3".into(),
        ));
    }
    // Restricted growth strings enumerate each set partition once.
    fn go(
        h: &Hypergraph,
        labels: &mut Vec<usize>,
        used: usize,
        max_parts: usize,
    ) -> Option<(VertexPartition, BarrierVerdict)> {
        if labels.len() == h.n() {
            if used < 2 {
                return None;
            }
            let p = VertexPartition::from_labels(labels).ok()?;
            let v = detect_divisibility_barrier(h, &p).ok()?;
            return v.is_barrier().then_some((p, v));
        }
        for l in 0..(used + 1).min(max_parts) {
            labels.push(l);
            let found = go(h, labels, used.max(l + 1), max_parts);
            labels.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
    if n == 0 {
        return Ok(None);
    }
    Ok(go(h, &mut vec![0], 1, max_parts))
}

pub fn is_tridivisible(g: &Hypergraph) -> Result<bool> {
    if g.r() != 2 {
        return Err(Error::InvalidInstance(
            "tridivisibility is defined for graphs".into(),
        ));
    }
    let degs = g.degrees();
    Ok(g.num_edges() % 3 == 0 && degs.iter().all(|d| d % 2 == 0))
}

/// Default vertex bound for [`exact_max_matching`].
pub const EXACT_MATCHING_BOUND: usize = 15;

struct MatchSearch<'a> {
    h: &'a Hypergraph,
    /// Edges indexed by their smallest vertex.
    by_min: Vec<Vec<usize>>,
    used: Vec<bool>,
    chosen: Vec<usize>,
    best: Vec<usize>,
    cap: usize,
}

impl MatchSearch<'_> {
    fn new(h: &Hypergraph) -> MatchSearch<'_> {
        let mut by_min = vec![Vec::new(); h.n()];
        for (i, e) in h.edges().iter().enumerate() {
            by_min[e[0]].push(i);
        }
        MatchSearch {
            h,
            by_min,
            used: vec![false; h.n()],
            chosen: Vec::new(),
            best: Vec::new(),
            cap: h.n() / h.r(),
        }
    }

    fn free_after(&self, v: usize) -> usize {
        self.used[v..].iter().filter(|&&u| !u).count()
    }

    fn max(&mut self, v: usize) {
        if self.best.len() == self.cap {
            return;
        }
        if self.chosen.len() + self.free_after(v.min(self.h.n())) / self.h.r() <= self.best.len() {
            return;
        }
        let Some(v) = (v..self.h.n()).find(|&u| !self.used[u]) else {
            return;
        };
        for k in 0..self.by_min[v].len() {
            let ei = self.by_min[v][k];
            let e = &self.h.edges()[ei];
            if e.iter().any(|&x| self.used[x]) {
                continue;
            }
            for &x in e {
                self.used[x] = true;
            }
            self.chosen.push(ei);
            if self.chosen.len() > self.best.len() {
                self.best = self.chosen.clone();
            }
            self.max(v + 1);
            self.chosen.pop();
            for &x in &self.h.edges()[ei] {
                self.used[x] = false;
            }
            if self.best.len() == self.cap {
                return;
            }
        }
        // Leave v uncovered.
        self.used[v] = true;
        self.max(v + 1);
        self.used[v] = false;
    }

    fn count_perfect(&mut self, v: usize) -> u64 {
        let Some(v) = (v..self.h.n()).find(|&u| !self.used[u]) else {
            return 1;
        };
        let mut total = 0;
        for k in 0..self.by_min[v].len() {
            let ei = self.by_min[v][k];
            if self.h.edges()[ei].iter().any(|&x| self.used[x]) {
                continue;
            }
            for &x in &self.h.edges()[ei] {
                self.used[x] = true;
            }
            total += self.count_perfect(v + 1);
            for &x in &self.h.edges()[ei] {
                self.used[x] = false;
            }
        }
        total
    }
}

/// Maximum matching by branch and bound with the default vertex bound.
pub fn exact_max_matching(h: &Hypergraph) -> Result<Matching> {
    exact_max_matching_bounded(h, EXACT_MATCHING_BOUND)
}

pub fn exact_max_matching_bounded(h: &Hypergraph, max_vertices: usize) -> Result<Matching> {
    if h.n() > max_vertices {
        return Err(Error::TooLarge(format!(
            "exact matching is limited to {max_vertices} vertices, got {}",
            h.n()
        )));
    }
    let mut s = MatchSearch::new(h);
    s.max(0);
    Ok(Matching::new(
        s.best.iter().map(|&i| h.edges()[i].clone()).collect(),
    ))
}

/// Number of perfect matchings, by exhaustive branching on the smallest
/// uncovered vertex. Exponential; meant for small designs.
pub fn count_perfect_matchings(h: &Hypergraph) -> u64 {
    if h.n() % h.r() != 0 {
        return 0;
    }
    MatchSearch::new(h).count_perfect(0)
}

/// Barrier specifications in their JSON envelope.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BarrierSpec {
    Space(SpaceBarrierSpec),
    Div {
        r: usize,
        n: usize,
        parts: Vec<Vec<Vertex>>,
        generators: Vec<Vec<i64>>,
    },
}

impl BarrierSpec {
    pub fn build(&self) -> Result<Hypergraph> {
        match self {
            BarrierSpec::Space(s) => space_barrier(s),
            BarrierSpec::Div {
                r,
                n,
                parts,
                generators,
            } => {
                let p = VertexPartition::new(*n, parts.clone())?;
                let l = lattice_from_vectors(generators)?;
                divisibility_barrier(&p, &l, *r)
            }
        }
    }
}

/// The parity construction: `|V_1| = ⌈n/2⌉` odd, `|V_2| = n − |V_1|`,
/// edges meeting `V_1` in an even number of vertices.
pub fn parity_barrier(n: usize, r: usize) -> Result<(Hypergraph, VertexPartition)> {
    let mut a = n.div_ceil(2);
    if a % 2 == 0 {
        a -= 1;
    }
    if a == 0 || a == n {
        return Err(Error::InvalidInput(
            "parity barrier needs two nonempty parts".into(),
        ));
    }
    let p = VertexPartition::new(n, vec![(0..a).collect(), (a..n).collect()])?;
    let l = lattice_from_vectors(&[vec![2, 0], vec![0, 1]])?;
    let h = divisibility_barrier(&p, &l, r)?;
    Ok((h, p))
}
