//! Triangle decompositions from a GF(2^a) labeling: the zero-sum template,
//! a nibble outside it, a cover of the leave that spills into the template,
//! and a hole in the template found by octahedron flips and cascades.

use crate::error::{Error, Failure, Result};
use crate::graph::SimpleGraph;
use crate::hypergraph::{
    pair, triangle, triangle_edges, Hypergraph, Triangle, TriangleDecomposition, Vertex,
};
use crate::nibble::{rodl_nibble, NibbleParams};
use crate::octahedron::{add_weight, edge_sums, flip, FlipStats, Octahedron, TriangleWeights};
use crate::relaxations::{bounded_integral_decomposition_with, BoundedOptions, BoundedOutcome};
use crate::rng::{derive_seed, rng_from, Rng};
use crate::verify::verify_triangle_decomposition;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Irreducible moduli over GF(2) for degrees 2..=16, bit i = coefficient
/// of x^i.
const MODULI: [u32; 15] = [
    0x7,     // x^2 + x + 1
    0xB,     // x^3 + x + 1
    0x13,    // x^4 + x + 1
    0x25,    // x^5 + x^2 + 1
    0x43,    // x^6 + x + 1
    0x83,    // x^7 + x + 1
    0x11B,   // x^8 + x^4 + x^3 + x + 1
    0x211,   // x^9 + x^4 + 1
    0x409,   // x^10 + x^3 + 1
    0x805,   // x^11 + x^2 + 1
    0x1053,  // x^12 + x^6 + x^4 + x + 1
    0x201B,  // x^13 + x^4 + x^3 + x + 1
    0x4443,  // x^14 + x^10 + x^6 + x + 1
    0x8003,  // x^15 + x + 1
    0x1100B, // x^16 + x^12 + x^3 + x + 1
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FieldGF2a {
    pub a: u32,
    pub modulus: u32,
}

fn clmul(x: u64, y: u64) -> u64 {
    let mut out = 0;
    for i in 0..32 {
        if (y >> i) & 1 == 1 {
            out ^= x << i;
        }
    }
    out
}

fn degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

/// Quotient and remainder of polynomial division over GF(2).
fn poly_divmod(mut num: u64, den: u64) -> (u64, u64) {
    let dd = degree(den);
    let mut q = 0;
    while num != 0 && degree(num) >= dd {
        let s = degree(num) - dd;
        q |= 1 << s;
        num ^= den << s;
    }
    (q, num)
}

impl FieldGF2a {
    pub fn new(a: u32) -> Result<Self> {
        if !(2..=16).contains(&a) {
            return Err(Error::InvalidInput(format!(
                "field degree must be in 2..=16, got {a}"
            )));
        }
        Ok(FieldGF2a {
            a,
            modulus: MODULI[(a - 2) as usize],
        })
    }

    /// Number of elements, `2^a`.
    pub fn order(&self) -> u32 {
        1 << self.a
    }

    pub fn add(&self, x: u32, y: u32) -> u32 {
        x ^ y
    }

    pub fn mul(&self, x: u32, y: u32) -> u32 {
        poly_divmod(clmul(x as u64, y as u64), self.modulus as u64).1 as u32
    }

    /// Inverse by the extended Euclidean algorithm; zero has none.
    pub fn inv(&self, x: u32) -> Result<u32> {
        if x == 0 || x >= self.order() {
            return Err(Error::InvalidInput(format!(
                "{x} has no inverse in GF(2^{})",
                self.a
            )));
        }
        let (mut r0, mut r1) = (self.modulus as u64, x as u64);
        let (mut s0, mut s1) = (0u64, 1u64);
        while r1 != 0 {
            let (q, r) = poly_divmod(r0, r1);
            (r0, r1) = (r1, r);
            (s0, s1) = (s1, s0 ^ clmul(q, s1));
        }
        debug_assert_eq!(r0, 1);
        Ok(poly_divmod(s0, self.modulus as u64).1 as u32)
    }
}

/// Injective map from vertices to nonzero field elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Labeling {
    pub field: FieldGF2a,
    pub pi: Vec<u32>,
    #[serde(skip)]
    vertex_of: Vec<Option<Vertex>>,
}

impl Labeling {
    pub fn new(field: FieldGF2a, pi: Vec<u32>) -> Result<Self> {
        let mut vertex_of = vec![None; field.order() as usize];
        for (v, &l) in pi.iter().enumerate() {
            if l == 0 || l >= field.order() || vertex_of[l as usize].is_some() {
                return Err(Error::InvalidInput(format!(
                    "label {l} is zero, out of range or repeated"
                )));
            }
            vertex_of[l as usize] = Some(v);
        }
        Ok(Labeling {
            field,
            pi,
            vertex_of,
        })
    }

    /// Vertex `v` gets label `v + 1`.
    pub fn identity(n: usize, a: u32) -> Result<Self> {
        let field = FieldGF2a::new(a)?;
        if n as u32 > field.order() - 1 {
            return Err(Error::InvalidInput(format!(
                "{n} vertices need more than {} labels",
                field.order() - 1
            )));
        }
        Labeling::new(field, (1..=n as u32).collect())
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn label(&self, v: Vertex) -> u32 {
        self.pi[v]
    }

    pub fn vertex(&self, label: u32) -> Option<Vertex> {
        self.vertex_of.get(label as usize).copied().flatten()
    }

    pub fn is_zero_sum(&self, t: &Triangle) -> bool {
        self.pi[t[0]] ^ self.pi[t[1]] ^ self.pi[t[2]] == 0
    }
}

/// The `a` with `2^{a−2} < n <= 2^{a−1}`.
pub fn standard_degree(n: usize) -> u32 {
    let mut a = 2;
    while (1usize << (a - 1)) < n {
        a += 1;
    }
    a
}

/// Smallest `a >= 2` with `2^a − 1 >= n`.
pub fn dense_degree(n: usize) -> u32 {
    let mut a = 2;
    while (1usize << a) - 1 < n {
        a += 1;
    }
    a
}

/// Uniformly random injection into the nonzero elements of GF(2^a).
pub fn random_labeling(n: usize, seed: u64, a_override: Option<u32>) -> Result<Labeling> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "labeling needs n >= 3, got {n}"
        )));
    }
    let a = a_override.unwrap_or_else(|| standard_degree(n));
    let field = FieldGF2a::new(a)?;
    if n as u64 > field.order() as u64 - 1 {
        return Err(Error::InvalidInput(format!(
            "{n} vertices do not fit into the {} nonzero elements of GF(2^{a})",
            field.order() - 1
        )));
    }
    let mut labels: Vec<u32> = (1..field.order()).collect();
    labels.shuffle(&mut rng_from(seed, "labeling", 0));
    labels.truncate(n);
    Labeling::new(field, labels)
}

#[derive(Clone, Debug, Serialize)]
pub struct Template {
    pub triangles: Vec<Triangle>,
    #[serde(skip)]
    pub gstar: SimpleGraph,
    #[serde(skip)]
    members: BTreeSet<Triangle>,
}

impl Template {
    pub fn contains(&self, t: &Triangle) -> bool {
        self.members.contains(t)
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }
}

/// All zero-sum triangles of `g`. They are edge-disjoint because two labels
/// fix the third.
pub fn template(g: &SimpleGraph, lab: &Labeling) -> Result<Template> {
    if lab.n() != g.n() {
        return Err(Error::InvalidInput(
            "labeling does not cover the graph".into(),
        ));
    }
    let mut members = BTreeSet::new();
    for (u, v) in g.edges() {
        let Some(w) = lab.vertex(lab.label(u) ^ lab.label(v)) else {
            continue;
        };
        if g.has_edge(u, w) && g.has_edge(v, w) {
            members.insert(triangle(u, v, w));
        }
    }
    let triangles: Vec<Triangle> = members.iter().copied().collect();
    let gstar = SimpleGraph::from_triangles(g.n(), &triangles);
    assert_eq!(
        gstar.num_edges(),
        3 * triangles.len(),
        "template triangles share an edge"
    );
    Ok(Template {
        triangles,
        gstar,
        members,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct CoverOptions {
    /// Fail instead of reusing a template triangle for a second spill edge.
    pub require_distinct_template: bool,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions {
            require_distinct_template: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LeaveCover {
    pub triangles: Vec<Triangle>,
    pub spill: Vec<(Vertex, Vertex)>,
    /// Whether every spill edge lies in its own template triangle.
    pub distinct_template: bool,
}

/// Template triangle holding a `G*` edge.
fn template_of(lab: &Labeling, u: Vertex, v: Vertex) -> Option<Triangle> {
    lab.vertex(lab.label(u) ^ lab.label(v))
        .map(|w| triangle(u, v, w))
}

/// Random greedy cover of every leave edge `uv` by a triangle `uvw` with
/// `uw`, `vw` unused edges of `G*`. Choices that keep spill edges in
/// distinct template triangles are preferred.
pub fn cover_leave(
    leave: &SimpleGraph,
    gstar: &SimpleGraph,
    lab: &Labeling,
    seed: u64,
    opts: &CoverOptions,
) -> Result<LeaveCover> {
    for (u, v) in leave.edges() {
        if gstar.has_edge(u, v) {
            return Err(Error::InvalidInput(format!("leave edge {u}{v} lies in G*")));
        }
    }
    let mut r = rng_from(seed, "cover-leave", 0);
    let mut free = gstar.clone();
    let mut touched: BTreeSet<Triangle> = BTreeSet::new();
    let mut triangles = Vec::new();
    let mut spill = Vec::new();
    let mut distinct = true;
    for (u, v) in leave.edges() {
        let legal: Vec<Vertex> = free.common_neighbors(u, v).collect();
        let fresh: Vec<Vertex> = legal
            .iter()
            .copied()
            .filter(|&w| {
                let a = template_of(lab, u, w);
                let b = template_of(lab, v, w);
                a != b
                    && a.is_some_and(|t| !touched.contains(&t))
                    && b.is_some_and(|t| !touched.contains(&t))
            })
            .collect();
        let pool = if !fresh.is_empty() {
            &fresh
        } else if opts.require_distinct_template {
            return Err(Error::Failed(
                Failure::new(
                    "cover-leave",
                    "no triangle keeps spill edges in distinct template triangles",
                )
                .with_witness((u, v)),
            ));
        } else {
            distinct = false;
            &legal
        };
        let Some(&w) = pool.choose(&mut r) else {
            return Err(Error::Failed(
                Failure::new("cover-leave", "no legal covering triangle").with_witness((u, v)),
            ));
        };
        free.remove_edge(u, w);
        free.remove_edge(v, w);
        for (x, y) in [(u, w), (v, w)] {
            if let Some(t) = template_of(lab, x, y) {
                touched.insert(t);
            }
            spill.push(pair(x, y));
        }
        triangles.push(triangle(u, v, w));
    }
    spill.sort_unstable();
    Ok(LeaveCover {
        triangles,
        spill,
        distinct_template: distinct,
    })
}

/// Triangles of weight ±1 whose signed edge sums are the indicator of `S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignedDecomposition {
    pub plus: Vec<Triangle>,
    pub minus: Vec<Triangle>,
}

impl SignedDecomposition {
    fn from_weights(w: &TriangleWeights) -> Option<Self> {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (&t, &x) in w {
            match x {
                1 => plus.push(t),
                -1 => minus.push(t),
                _ => return None,
            }
        }
        Some(SignedDecomposition { plus, minus })
    }

    pub fn weights(&self) -> TriangleWeights {
        let mut w = TriangleWeights::new();
        for &t in &self.plus {
            add_weight(&mut w, t, 1);
        }
        for &t in &self.minus {
            add_weight(&mut w, t, -1);
        }
        w
    }

    /// Edge sums equal `1_S`, support inside `G*`, and at most one
    /// triangle of each sign on every edge.
    pub fn is_valid_for(&self, s: &SimpleGraph, gstar: &SimpleGraph) -> bool {
        let w = self.weights();
        if w.len() != self.plus.len() + self.minus.len() {
            return false;
        }
        let sums = edge_sums(&w);
        let sums_ok = sums.len() == s.num_edges()
            && sums.iter().all(|(&(u, v), &x)| x == 1 && s.has_edge(u, v));
        let support_ok = w.keys().all(|t| gstar.has_triangle(t));
        let mut seen: BTreeMap<((Vertex, Vertex), bool), usize> = BTreeMap::new();
        for (t, &x) in &w {
            for e in triangle_edges(t) {
                *seen.entry((e, x > 0)).or_default() += 1;
            }
        }
        sums_ok && support_ok && seen.values().all(|&c| c <= 1)
    }
}

/// Which constraints the local search is driving to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    /// Support in `G*`, weights in {−1,0,1}, one triangle of each sign per edge.
    Signed,
    /// Template weights in {0,1}, other weights in {−1,0}, support in `G*`.
    Hole,
}

type Move = Vec<(Octahedron, i64)>;

struct Search<'a> {
    n: usize,
    gstar: &'a SimpleGraph,
    lab: Option<&'a Labeling>,
    w: TriangleWeights,
    pos: Vec<i64>,
    neg: Vec<i64>,
    stats: FlipStats,
}

const ILLEGAL_WEIGHT: i64 = 4;

impl<'a> Search<'a> {
    fn new(
        n: usize,
        gstar: &'a SimpleGraph,
        lab: Option<&'a Labeling>,
        w: TriangleWeights,
    ) -> Self {
        let mut s = Search {
            n,
            gstar,
            lab,
            w: TriangleWeights::new(),
            pos: vec![0; n * n],
            neg: vec![0; n * n],
            stats: FlipStats::default(),
        };
        for (t, x) in w {
            s.bump(t, x);
        }
        s
    }

    fn legal(&self, t: &Triangle) -> bool {
        self.gstar.has_triangle(t)
    }

    fn is_template(&self, t: &Triangle) -> bool {
        self.lab.is_some_and(|l| l.is_zero_sum(t)) && self.legal(t)
    }

    fn tri_cost(&self, phase: Phase, t: &Triangle, x: i64) -> i64 {
        if x == 0 {
            return 0;
        }
        if !self.legal(t) {
            return ILLEGAL_WEIGHT * x.abs();
        }
        match phase {
            Phase::Signed => (x.abs() - 1).max(0),
            Phase::Hole => {
                if self.is_template(t) {
                    (x - 1).max(0) + (-x).max(0)
                } else {
                    x.max(0) + (-x - 1).max(0)
                }
            }
        }
    }

    fn edge_cost(phase: Phase, p: i64, q: i64) -> i64 {
        match phase {
            Phase::Signed => (p - 1).max(0) + (q - 1).max(0),
            Phase::Hole => 0,
        }
    }

    fn idx(&self, u: Vertex, v: Vertex) -> usize {
        let (u, v) = pair(u, v);
        u * self.n + v
    }

    fn bump(&mut self, t: Triangle, d: i64) {
        let old = self.w.get(&t).copied().unwrap_or(0);
        let new = old + d;
        for (u, v) in triangle_edges(&t) {
            let i = self.idx(u, v);
            self.pos[i] += new.max(0) - old.max(0);
            self.neg[i] += (-new).max(0) - (-old).max(0);
        }
        add_weight(&mut self.w, t, d);
    }

    fn potential(&self, phase: Phase) -> i64 {
        let tri: i64 = self
            .w
            .iter()
            .map(|(t, &x)| self.tri_cost(phase, t, x))
            .sum();
        let edges: i64 = (0..self.n * self.n)
            .map(|i| Self::edge_cost(phase, self.pos[i], self.neg[i]))
            .sum();
        tri + edges
    }

    fn changes(mv: &[(Octahedron, i64)]) -> Vec<(Triangle, i64)> {
        let mut d: Vec<(Triangle, i64)> = Vec::with_capacity(8 * mv.len());
        for (o, dir) in mv {
            let (a, b) = o.groups();
            d.extend(a.into_iter().map(|t| (t, *dir)));
            d.extend(b.into_iter().map(|t| (t, -*dir)));
        }
        d.sort_unstable_by_key(|&(t, _)| t);
        let mut out: Vec<(Triangle, i64)> = Vec::with_capacity(d.len());
        for (t, x) in d {
            match out.last_mut() {
                Some((u, y)) if *u == t => *y += x,
                _ => out.push((t, x)),
            }
        }
        out.retain(|&(_, x)| x != 0);
        out
    }

    fn delta(&self, phase: Phase, mv: &[(Octahedron, i64)]) -> i64 {
        let mut total = 0;
        let mut edge_d: Vec<(usize, i64, i64)> = Vec::new();
        for (t, dx) in Self::changes(mv) {
            let old = self.w.get(&t).copied().unwrap_or(0);
            let new = old + dx;
            total += self.tri_cost(phase, &t, new) - self.tri_cost(phase, &t, old);
            if phase == Phase::Signed {
                for (u, v) in triangle_edges(&t) {
                    let i = self.idx(u, v);
                    let (dp, dq) = (new.max(0) - old.max(0), (-new).max(0) - (-old).max(0));
                    match edge_d.iter_mut().find(|e| e.0 == i) {
                        Some(e) => {
                            e.1 += dp;
                            e.2 += dq;
                        }
                        None => edge_d.push((i, dp, dq)),
                    }
                }
            }
        }
        for (i, dp, dq) in edge_d {
            let (p, q) = (self.pos[i], self.neg[i]);
            total += Self::edge_cost(phase, p + dp, q + dq) - Self::edge_cost(phase, p, q);
        }
        total
    }

    fn apply(&mut self, mv: &[(Octahedron, i64)]) {
        for &(o, dir) in mv {
            let before = self.w.clone();
            let mut probe = before;
            flip(&mut probe, &o, dir, &mut self.stats);
            let (a, b) = o.groups();
            for t in a {
                self.bump(t, dir);
            }
            for t in b {
                self.bump(t, -dir);
            }
            debug_assert_eq!(probe, self.w);
        }
    }

    /// Triangles currently breaking a constraint of `phase`.
    fn violations(&self, phase: Phase) -> Vec<Triangle> {
        let mut out: Vec<Triangle> = Vec::new();
        for (t, &x) in &self.w {
            let on_bad_edge = phase == Phase::Signed
                && triangle_edges(t).iter().any(|&(u, v)| {
                    let i = self.idx(u, v);
                    (x > 0 && self.pos[i] > 1) || (x < 0 && self.neg[i] > 1)
                });
            if self.tri_cost(phase, t, x) > 0 || on_bad_edge {
                out.push(*t);
            }
        }
        out
    }

    fn octahedron_ok(&self, o: &Octahedron, host: &SimpleGraph) -> bool {
        o.edges().iter().all(|&(u, v)| host.has_edge(u, v))
    }

    /// Octahedra holding `t` in their first group, the other three
    /// vertices drawn from the rest (all of them, or a random sample).
    fn octahedra_through(
        &self,
        t: &Triangle,
        host: &SimpleGraph,
        cap: usize,
        r: &mut Rng,
    ) -> Vec<Octahedron> {
        // The second vertex of each part sees both vertices of the other parts.
        let side = |i: usize| -> Vec<Vertex> {
            let (p, q) = (t[(i + 1) % 3], t[(i + 2) % 3]);
            (0..self.n)
                .filter(|v| !t.contains(v) && host.has_edge(*v, p) && host.has_edge(*v, q))
                .collect()
        };
        let (xs, ys, zs) = (side(0), side(1), side(2));
        let mut out = Vec::new();
        let total = xs.len() * ys.len() * zs.len();
        let push = |a: Vertex, b: Vertex, c: Vertex, out: &mut Vec<Octahedron>| {
            if a != b
                && b != c
                && a != c
                && host.has_edge(a, b)
                && host.has_edge(b, c)
                && host.has_edge(a, c)
            {
                out.push(Octahedron {
                    parts: [[t[0], a], [t[1], b], [t[2], c]],
                });
            }
        };
        if total <= cap {
            for &a in &xs {
                for &b in &ys {
                    for &c in &zs {
                        push(a, b, c, &mut out);
                    }
                }
            }
        } else {
            for _ in 0..cap {
                let (a, b, c) = (
                    *xs.choose(r).unwrap(),
                    *ys.choose(r).unwrap(),
                    *zs.choose(r).unwrap(),
                );
                push(a, b, c, &mut out);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SignedOptions {
    /// Octahedron candidates examined per violating triangle.
    pub candidate_cap: usize,
    /// Greedy batch steps before annealing takes over.
    pub max_steps: usize,
    /// Single-move steps of the annealing phase.
    pub anneal_steps: usize,
    /// Starting temperature; it decays linearly to zero.
    pub anneal_temperature: f64,
    /// Vertex load bound handed to the bounded integral decomposition.
    pub load_bound: Option<i64>,
}

impl Default for SignedOptions {
    fn default() -> Self {
        SignedOptions {
            candidate_cap: 1500,
            max_steps: 200,
            anneal_steps: 600,
            anneal_temperature: 0.6,
            load_bound: None,
        }
    }
}

/// Moves repairing the violating triangle `t`: the caller's extra moves
/// plus octahedra holding `t` that push its weight the right way.
fn repair_moves(
    s: &Search<'_>,
    phase: Phase,
    t: &Triangle,
    host: &SimpleGraph,
    cap: usize,
    r: &mut Rng,
    extra_moves: &mut impl FnMut(&Search<'_>, &Triangle, &mut Rng) -> Vec<Move>,
) -> Vec<Move> {
    let Some(&x) = s.w.get(t) else {
        return Vec::new();
    };
    let mut moves: Vec<Move> = extra_moves(s, t, r);
    let dir = if phase == Phase::Hole && s.is_template(t) {
        // Template weight above 1 goes down, below 0 goes up.
        if x > 1 {
            -1
        } else {
            1
        }
    } else if phase == Phase::Hole && x < 0 && s.legal(t) {
        1
    } else {
        -x.signum()
    };
    for o in s.octahedra_through(t, host, cap, r) {
        moves.push(vec![(o, dir)]);
    }
    moves
}

/// Local search shared by the signed and hole phases. Greedy steps pick,
/// per violating triangle in random order, its best move, and apply it when
/// it lowers the potential and touches no edge of a move already taken in
/// the step. Once that stalls, annealing repairs one random violating
/// triangle per step, accepting worse moves with Boltzmann probability.
fn descend(
    s: &mut Search<'_>,
    phase: Phase,
    host: &SimpleGraph,
    opts: &SignedOptions,
    r: &mut Rng,
    mut extra_moves: impl FnMut(&Search<'_>, &Triangle, &mut Rng) -> Vec<Move>,
) -> std::result::Result<(), Triangle> {
    for _ in 0..opts.max_steps {
        let mut bad = s.violations(phase);
        if bad.is_empty() {
            return Ok(());
        }
        bad.shuffle(r);
        let mut used_edges: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
        let mut progressed = false;
        for t in &bad {
            let best = repair_moves(s, phase, t, host, opts.candidate_cap, r, &mut extra_moves)
                .into_iter()
                .map(|mv| (s.delta(phase, &mv), mv))
                .min_by_key(|(d, _)| *d);
            let Some((d, mv)) = best else { continue };
            let edges: Vec<(Vertex, Vertex)> = mv.iter().flat_map(|(o, _)| o.edges()).collect();
            if d < 0 && edges.iter().all(|e| !used_edges.contains(e)) {
                used_edges.extend(edges);
                s.apply(&mv);
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    let cap = opts.candidate_cap.min(200);
    for step in 0..opts.anneal_steps {
        let bad = s.violations(phase);
        let Some(t) = bad.choose(r).copied() else {
            return Ok(());
        };
        let mut scored: Vec<(i64, Move)> =
            repair_moves(s, phase, &t, host, cap, r, &mut extra_moves)
                .into_iter()
                .map(|mv| (s.delta(phase, &mv), mv))
                .collect();
        let Some(low) = scored.iter().map(|(d, _)| *d).min() else {
            continue;
        };
        scored.retain(|(d, _)| *d == low);
        let (d, mv) = scored.swap_remove(r.gen_range(0..scored.len()));
        let temp = opts.anneal_temperature * (1.0 - step as f64 / opts.anneal_steps as f64);
        if d <= 0 || (temp > 0.0 && r.gen::<f64>() < (-(d as f64) / temp).exp()) {
            s.apply(&mv);
        }
    }
    match s.violations(phase).first() {
        None => Ok(()),
        Some(&t) => Err(t),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SignedReport {
    pub decomposition: SignedDecomposition,
    pub integral_max_load: i64,
    pub flips: FlipStats,
}

/// Signed decomposition of `s` within `gstar`, starting from a bounded
/// integral decomposition over `host` and removing illegal triangles,
/// large weights and repeated signs by octahedron flips.
pub fn signed_decomposition(
    s: &SimpleGraph,
    gstar: &SimpleGraph,
    host: &SimpleGraph,
    seed: u64,
) -> Result<SignedReport> {
    signed_decomposition_with(s, gstar, host, seed, &SignedOptions::default())
}

pub fn signed_decomposition_with(
    s: &SimpleGraph,
    gstar: &SimpleGraph,
    host: &SimpleGraph,
    seed: u64,
    opts: &SignedOptions,
) -> Result<SignedReport> {
    if !s.is_subgraph_of(gstar) {
        return Err(Error::InvalidInput("S must lie inside G*".into()));
    }
    if !gstar.is_subgraph_of(host) {
        return Err(Error::InvalidInput("G* must lie inside the host".into()));
    }
    let bound = opts.load_bound.unwrap_or(2 * s.n() as i64);
    let start =
        match bounded_integral_decomposition_with(s, host, bound, &BoundedOptions::default())? {
            BoundedOutcome::Solved(b) => b,
            BoundedOutcome::Failed(b) => {
                return Err(Error::Failed(
                    Failure::new(
                        "bounded-integral",
                        format!("vertex load {} above bound {bound}", b.max_vertex_load),
                    )
                    .with_witness(b.max_vertex_load),
                ))
            }
            BoundedOutcome::NoIntegralSolution => {
                return Err(Error::Failed(Failure::new(
                    "bounded-integral",
                    "S has no integral triangle decomposition",
                )))
            }
        };
    let mut search = Search::new(s.n(), gstar, None, start.solution.weights.clone());
    search.stats.absorb(&start.flips);
    let mut r = rng_from(seed, "signed", 0);
    let res = descend(&mut search, Phase::Signed, host, opts, &mut r, |_, _, _| {
        Vec::new()
    });
    if let Err(t) = res {
        return Err(Error::Failed(
            Failure::new(
                "signed",
                format!(
                    "local search stalled at potential {}",
                    search.potential(Phase::Signed)
                ),
            )
            .with_witness(t),
        ));
    }
    let decomposition = SignedDecomposition::from_weights(&search.w).ok_or_else(|| {
        Error::ImpossibleState("signed phase finished with a weight outside ±1".into())
    })?;
    if !decomposition.is_valid_for(s, gstar) {
        return Err(Error::ImpossibleState(
            "signed decomposition failed its own check".into(),
        ));
    }
    Ok(SignedReport {
        decomposition,
        integral_max_load: start.max_vertex_load,
        flips: search.stats,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AssociatedOctahedron {
    pub octahedron: Octahedron,
    /// The four triangles of the group holding `t`.
    pub through_t: [Triangle; 4],
    /// The all-template decomposition.
    pub template_side: [Triangle; 4],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum NotOctahedral {
    /// `t` is itself zero-sum, so `y+z = x` and the parts collapse.
    Degenerate,
    /// A pair sum is not the label of any vertex.
    MissingLabel(u32),
    /// Some octahedron edge is outside `G*`.
    MissingEdge(Vertex, Vertex),
}

/// The octahedron with parts `{x, y+z}`, `{y, z+x}`, `{z, x+y}`.
pub fn associated_octahedron(
    t: &Triangle,
    lab: &Labeling,
    gstar: &SimpleGraph,
) -> std::result::Result<AssociatedOctahedron, NotOctahedral> {
    let [x, y, z] = *t;
    let (lx, ly, lz) = (lab.label(x), lab.label(y), lab.label(z));
    if lx ^ ly ^ lz == 0 {
        return Err(NotOctahedral::Degenerate);
    }
    let get = |l: u32| lab.vertex(l).ok_or(NotOctahedral::MissingLabel(l));
    let yz = get(ly ^ lz)?;
    let zx = get(lz ^ lx)?;
    let xy = get(lx ^ ly)?;
    let o = Octahedron::new([[x, yz], [y, zx], [z, xy]]).ok_or(NotOctahedral::Degenerate)?;
    if let Some(&(u, v)) = o.edges().iter().find(|&&(u, v)| !gstar.has_edge(u, v)) {
        return Err(NotOctahedral::MissingEdge(u, v));
    }
    let (a, b) = o.groups();
    Ok(AssociatedOctahedron {
        octahedron: o,
        through_t: a,
        template_side: b,
    })
}

/// Flip sequence that absorbs the positive triangle `t`: nothing for a
/// template triangle, the associated octahedron when `t` is octahedral,
/// otherwise a cascade through an octahedron `{x,x'},{y,y'},{z,z'}` whose
/// companion triangles are template or octahedral. Among the candidates
/// tried (at most `budget`) the one leaving the fewest violations wins.
pub fn cascade_absorb(
    t: &Triangle,
    weights: &TriangleWeights,
    lab: &Labeling,
    gstar: &SimpleGraph,
    seed: u64,
    budget: usize,
) -> Result<Vec<(Octahedron, i64)>> {
    let s = Search::new(lab.n(), gstar, Some(lab), weights.clone());
    let mut r = rng_from(seed, "cascade", 0);
    let moves = cascade_candidates(&s, t, budget, &mut r);
    if lab.is_zero_sum(t) && gstar.has_triangle(t) {
        return Ok(Vec::new());
    }
    moves
        .into_iter()
        .min_by_key(|mv| s.delta(Phase::Hole, mv))
        .ok_or_else(|| {
            Error::Failed(
                Failure::new("cascade", format!("no cascade within {budget} candidates"))
                    .with_witness(t),
            )
        })
}

fn cascade_candidates(s: &Search<'_>, t: &Triangle, budget: usize, r: &mut Rng) -> Vec<Move> {
    let lab = s.lab.expect("hole phase has a labeling");
    if s.is_template(t) {
        return Vec::new();
    }
    if let Ok(a) = associated_octahedron(t, lab, s.gstar) {
        return vec![vec![(a.octahedron, -1)]];
    }
    let [x, y, z] = *t;
    let others: Vec<Vertex> = (0..s.n).filter(|v| !t.contains(v)).collect();
    let mut out = Vec::new();
    for _ in 0..budget {
        let p: Vec<&Vertex> = others.choose_multiple(r, 3).collect();
        if p.len() < 3 {
            break;
        }
        let (x2, y2, z2) = (*p[0], *p[1], *p[2]);
        let o = Octahedron {
            parts: [[x, x2], [y, y2], [z, z2]],
        };
        if !s.octahedron_ok(&o, s.gstar) {
            continue;
        }
        let (_, companions) = o.groups();
        let mut mv: Move = vec![(o, -1)];
        let mut ok = true;
        for c in companions {
            if s.is_template(&c) {
                continue;
            }
            match associated_octahedron(&c, lab, s.gstar) {
                Ok(a) => mv.push((a.octahedron, -1)),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            out.push(mv);
        }
    }
    out
}

/// A hole found by exhaustive search: `outer` holds every template triangle
/// meeting the spill, and `inner` decomposes the rest of their union by
/// non-template triangles of `G*`, pulling in further template triangles
/// when an inner triangle needs their edges. `None` when no hole exists;
/// `TooLarge` when the node cap runs out.
pub fn exact_hole(
    spill: &SimpleGraph,
    tpl: &Template,
    lab: &Labeling,
    max_nodes: u64,
) -> Result<Option<(Vec<Triangle>, Vec<Triangle>)>> {
    let n = spill.n();
    let mut outer: BTreeSet<Triangle> = BTreeSet::new();
    for (u, v) in spill.edges() {
        let t = template_of(lab, u, v)
            .filter(|t| tpl.contains(t))
            .ok_or_else(|| {
                Error::InvalidInput(format!("spill edge {u}{v} is not in a template triangle"))
            })?;
        outer.insert(t);
    }
    // Edges still to be covered by inner triangles.
    let mut todo = SimpleGraph::from_triangles(n, &outer);
    for (u, v) in spill.edges() {
        todo.remove_edge(u, v);
    }
    struct St<'a> {
        tpl: &'a Template,
        lab: &'a Labeling,
        nodes: u64,
        cap: u64,
        outer: BTreeSet<Triangle>,
        inner: Vec<Triangle>,
    }
    fn go(todo: &mut SimpleGraph, st: &mut St<'_>) -> Result<bool> {
        st.nodes += 1;
        if st.nodes > st.cap {
            return Err(Error::TooLarge("hole search node cap reached".into()));
        }
        let Some((u, v)) = todo.edges().into_iter().next() else {
            return Ok(true);
        };
        for w in 0..todo.n() {
            if w == u || w == v {
                continue;
            }
            let t = triangle(u, v, w);
            if st.lab.is_zero_sum(&t) || !st.tpl.gstar.has_triangle(&t) {
                continue;
            }
            // Each other edge is either pending or opens a fresh template triangle.
            let mut opened = Vec::new();
            let mut ok = true;
            for (a, b) in [(u, w), (v, w)] {
                if todo.has_edge(a, b) {
                    continue;
                }
                match template_of(st.lab, a, b) {
                    Some(x)
                        if st.tpl.contains(&x)
                            && !st.outer.contains(&x)
                            && !opened.contains(&x) =>
                    {
                        opened.push(x)
                    }
                    _ => ok = false,
                }
            }
            if !ok {
                continue;
            }
            for x in &opened {
                st.outer.insert(*x);
                todo.add_triangle(x);
            }
            todo.remove_triangle(&t);
            st.inner.push(t);
            if go(todo, st)? {
                return Ok(true);
            }
            st.inner.pop();
            todo.add_triangle(&t);
            for x in &opened {
                st.outer.remove(x);
                todo.remove_triangle(x);
            }
        }
        Ok(false)
    }
    let mut st = St {
        tpl,
        lab,
        nodes: 0,
        cap: max_nodes,
        outer,
        inner: Vec::new(),
    };
    Ok(go(&mut todo, &mut st)?.then(|| (st.outer.into_iter().collect(), st.inner)))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AlgebraicOptions {
    /// Field degree; `None` picks the smallest `a` with `2^a − 1 >= n`.
    pub field_degree: Option<u32>,
    pub retries: usize,
    pub nibble: NibbleParams,
    pub require_distinct_template: bool,
    pub signed: SignedOptions,
    /// Cascade candidates tried per positive triangle and step.
    pub cascade_budget: usize,
    /// Leave covers drawn per labeling before giving up on it.
    pub cover_draws: usize,
}

impl Default for AlgebraicOptions {
    fn default() -> Self {
        AlgebraicOptions {
            field_degree: None,
            retries: 25,
            nibble: NibbleParams::default(),
            require_distinct_template: false,
            signed: SignedOptions::default(),
            cascade_budget: 500,
            cover_draws: 8,
        }
    }
}

/// Per-attempt stage telemetry.
#[derive(Clone, Debug, Default, Serialize)]
pub struct AlgebraicTelemetry {
    pub attempt: usize,
    pub field_degree: u32,
    pub template_triangles: usize,
    pub gstar_edges: usize,
    pub nibble_triangles: usize,
    pub leave_edges: usize,
    pub cover_draws: usize,
    pub spill_edges: usize,
    pub spill_max_degree: usize,
    pub spill_distinct_template: bool,
    pub integral_max_load: i64,
    pub signed_plus: usize,
    pub signed_minus: usize,
    pub hole_outer: usize,
    pub hole_inner: usize,
    pub flips: FlipStats,
    pub hole_checks: u64,
    pub failure: Option<Failure>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgebraicReport {
    pub decomposition: TriangleDecomposition,
    pub attempts: Vec<AlgebraicTelemetry>,
    pub flips: FlipStats,
    /// Exact multiset checks of the hole that were made (and passed).
    pub hole_checks: u64,
}

/// Every edge must lie in a triangle; the spread of triangle degrees is
/// reported, not enforced.
fn preflight(g: &SimpleGraph) -> Result<()> {
    if !g.is_tridivisible() {
        return Err(Error::InvalidInstance("graph is not tridivisible".into()));
    }
    let mut lo = usize::MAX;
    let mut hi = 0;
    for (u, v) in g.edges() {
        let t = g.common_neighbors(u, v).count();
        if t == 0 {
            return Err(Error::InvalidInstance(format!(
                "edge {u}{v} lies in no triangle"
            )));
        }
        lo = lo.min(t);
        hi = hi.max(t);
    }
    if hi > 0 && (lo as f64) < 0.5 * hi as f64 {
        log::warn!("triangle degrees range over [{lo}, {hi}]; the template heuristics assume near-regularity");
    }
    Ok(())
}

pub fn triangle_decompose_algebraic(g: &SimpleGraph, seed: u64) -> Result<AlgebraicReport> {
    triangle_decompose_algebraic_with(g, seed, &AlgebraicOptions::default())
}

pub fn triangle_decompose_algebraic_with(
    g: &SimpleGraph,
    seed: u64,
    opts: &AlgebraicOptions,
) -> Result<AlgebraicReport> {
    preflight(g)?;
    let n = g.n();
    let a = opts.field_degree.unwrap_or_else(|| dense_degree(n));
    let mut attempts = Vec::new();
    let mut flips = FlipStats::default();
    let mut hole_checks = 0;
    for attempt in 0..opts.retries.max(1) {
        let aseed = derive_seed(seed, "algebraic-attempt", attempt as u64);
        let mut tel = AlgebraicTelemetry {
            attempt,
            field_degree: a,
            ..Default::default()
        };
        let res = attempt_once(g, aseed, a, opts, &mut tel);
        flips.absorb(&tel.flips);
        hole_checks += tel.hole_checks;
        match res {
            Ok(d) => {
                attempts.push(tel);
                return Ok(AlgebraicReport {
                    decomposition: d,
                    attempts,
                    flips,
                    hole_checks,
                });
            }
            Err(Error::Failed(f)) => {
                log::debug!("algebraic attempt {attempt} failed: {f}");
                tel.failure = Some(f);
                attempts.push(tel);
            }
            Err(e) => return Err(e),
        }
    }
    let last = attempts
        .last()
        .and_then(|t| t.failure.clone())
        .unwrap_or_else(|| Failure::new("algebraic", "no attempt"));
    Err(Error::Failed(Failure {
        stage: last.stage.clone(),
        reason: format!("{} attempts failed; last: {}", attempts.len(), last.reason),
        witness: last.witness,
    }))
}

fn attempt_once(
    g: &SimpleGraph,
    seed: u64,
    a: u32,
    opts: &AlgebraicOptions,
    tel: &mut AlgebraicTelemetry,
) -> Result<TriangleDecomposition> {
    let n = g.n();
    let lab = random_labeling(n, derive_seed(seed, "labeling", 0), Some(a))?;
    let tpl = template(g, &lab)?;
    tel.template_triangles = tpl.len();
    tel.gstar_edges = tpl.gstar.num_edges();

    // Nibble on the triangles of G ∖ G*.
    let rest = g.difference(&tpl.gstar);
    let mut nibble_tris: Vec<Triangle> = Vec::new();
    let rest_tris = rest.triangles();
    if !rest_tris.is_empty() {
        let edges = rest.edges();
        let index: BTreeMap<(Vertex, Vertex), usize> =
            edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let h = Hypergraph::new(
            edges.len(),
            3,
            rest_tris
                .iter()
                .map(|t| triangle_edges(t).iter().map(|e| index[e]).collect())
                .collect(),
        )?;
        let p = NibbleParams {
            seed: derive_seed(seed, "nibble", 0),
            ..opts.nibble
        };
        let out = rodl_nibble(&h, &p)?;
        for e in out.matching.edges() {
            let mut vs: Vec<Vertex> = e.iter().flat_map(|&i| [edges[i].0, edges[i].1]).collect();
            vs.sort_unstable();
            vs.dedup();
            nibble_tris.push([vs[0], vs[1], vs[2]]);
        }
    }
    tel.nibble_triangles = nibble_tris.len();
    let mut leave = rest.clone();
    for t in &nibble_tris {
        leave.remove_triangle(t);
    }
    tel.leave_edges = leave.num_edges();

    let mut last = None;
    let mut found = None;
    for draw in 0..opts.cover_draws.max(1) {
        tel.cover_draws = draw + 1;
        match fill_hole(
            g,
            &lab,
            &tpl,
            &leave,
            derive_seed(seed, "cover-draw", draw as u64),
            opts,
            tel,
        ) {
            Ok(x) => {
                found = Some(x);
                break;
            }
            Err(Error::Failed(f)) => last = Some(f),
            Err(e) => return Err(e),
        }
    }
    let Some((cover, outer, inner)) = found else {
        return Err(Error::Failed(last.expect("at least one draw")));
    };
    tel.hole_outer = outer.len();
    tel.hole_inner = inner.len();

    let outer_set: BTreeSet<Triangle> = outer.iter().copied().collect();
    let mut all: Vec<Triangle> = nibble_tris;
    all.extend(cover.triangles.iter().copied());
    all.extend(
        tpl.triangles
            .iter()
            .copied()
            .filter(|t| !outer_set.contains(t)),
    );
    all.extend(inner);
    let d = TriangleDecomposition::new(all);
    let check = verify_triangle_decomposition(&g.to_hypergraph(), &d);
    if !check.accepted {
        return Err(Error::ImpossibleState(format!(
            "assembled decomposition rejected: {check:?}"
        )));
    }
    Ok(d)
}

/// Covers the leave, spills into the template and looks for a hole; the
/// triangles returned are the cover, the outer and the inner triangles.
fn fill_hole(
    g: &SimpleGraph,
    lab: &Labeling,
    tpl: &Template,
    leave: &SimpleGraph,
    seed: u64,
    opts: &AlgebraicOptions,
    tel: &mut AlgebraicTelemetry,
) -> Result<(LeaveCover, Vec<Triangle>, Vec<Triangle>)> {
    let n = g.n();
    let cover = cover_leave(
        leave,
        &tpl.gstar,
        lab,
        derive_seed(seed, "cover", 0),
        &CoverOptions {
            require_distinct_template: opts.require_distinct_template,
        },
    )?;
    let spill = SimpleGraph::from_edges(n, cover.spill.iter().copied());
    tel.spill_edges = spill.num_edges();
    tel.spill_max_degree = spill.degrees().into_iter().max().unwrap_or(0);
    tel.spill_distinct_template = cover.distinct_template;
    if !spill.is_tridivisible() {
        return Err(Error::ImpossibleState("spill is not tridivisible".into()));
    }

    let (outer, inner) = if spill.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let signed = signed_decomposition_with(
            &spill,
            &tpl.gstar,
            g,
            derive_seed(seed, "signed", 0),
            &opts.signed,
        );
        let signed = signed?;
        tel.integral_max_load = signed.integral_max_load;
        tel.signed_plus = signed.decomposition.plus.len();
        tel.signed_minus = signed.decomposition.minus.len();
        tel.flips.absorb(&signed.flips);

        // Cascade every positive triangle into the template.
        let mut search = Search::new(n, &tpl.gstar, Some(lab), signed.decomposition.weights());
        let mut r = rng_from(seed, "hole", 0);
        let budget = opts.cascade_budget;
        let res = descend(
            &mut search,
            Phase::Hole,
            &tpl.gstar,
            &opts.signed,
            &mut r,
            |s, t, r| match s.w.get(t) {
                Some(&x) if x > 0 && !s.is_template(t) => cascade_candidates(s, t, budget, r),
                _ => Vec::new(),
            },
        );
        tel.flips.absorb(&search.stats);
        if let Err(t) = res {
            return Err(Error::Failed(
                Failure::new(
                    "cascade",
                    format!(
                        "hole search stalled at potential {}",
                        search.potential(Phase::Hole)
                    ),
                )
                .with_witness(t),
            ));
        }
        let outer: Vec<Triangle> = search
            .w
            .iter()
            .filter(|(_, &x)| x == 1)
            .map(|(&t, _)| t)
            .collect();
        let inner: Vec<Triangle> = search
            .w
            .iter()
            .filter(|(_, &x)| x == -1)
            .map(|(&t, _)| t)
            .collect();
        if outer.len() + inner.len() != search.w.len() || !outer.iter().all(|t| tpl.contains(t)) {
            return Err(Error::ImpossibleState(
                "hole weights outside the allowed pattern".into(),
            ));
        }
        // ⋃M^o = S ⊎ ⋃M^i as edge multisets.
        let mut lhs: Vec<(Vertex, Vertex)> = outer.iter().flat_map(triangle_edges).collect();
        let mut rhs: Vec<(Vertex, Vertex)> = spill.edges();
        rhs.extend(inner.iter().flat_map(triangle_edges));
        lhs.sort_unstable();
        rhs.sort_unstable();
        tel.hole_checks += 1;
        if lhs != rhs {
            return Err(Error::ImpossibleState(
                "hole edges differ from spill plus inner triangles".into(),
            ));
        }
        (outer, inner)
    };
    Ok((cover, outer, inner))
}

/// Random draw helper for tests and callers wanting a random non-template
/// triangle of `G*`.
pub fn random_non_template_triangle(
    gstar: &SimpleGraph,
    lab: &Labeling,
    seed: u64,
) -> Option<Triangle> {
    let ts: Vec<Triangle> = gstar
        .triangles()
        .into_iter()
        .filter(|t| !lab.is_zero_sum(t))
        .collect();
    let mut r = rng_from(seed, "pick-triangle", 0);
    if ts.is_empty() {
        return None;
    }
    Some(ts[r.gen_range(0..ts.len())])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_irreducible(m: u64) -> bool {
        let d = degree(m);
        (2..1u64 << (d / 2 + 1)).all(|f| degree(f) > d / 2 || poly_divmod(m, f).1 != 0)
    }

    #[test]
    fn moduli_are_irreducible() {
        for (i, &m) in MODULI.iter().enumerate() {
            assert_eq!(degree(m as u64), i as i32 + 2);
            assert!(is_irreducible(m as u64), "modulus {m:#x}");
        }
    }

    #[test]
    fn field_examples() {
        let f = FieldGF2a::new(3).unwrap();
        assert_eq!(f.mul(0b010, 0b100), 0b011);
        assert_eq!(f.add(5, 3), 6);
        assert_eq!(f.inv(1).unwrap(), 1);
        assert!(f.inv(0).is_err());
        for a in 2..=8 {
            let f = FieldGF2a::new(a).unwrap();
            for x in 1..f.order() {
                assert_eq!(f.mul(x, f.inv(x).unwrap()), 1);
            }
        }
    }

    #[test]
    fn labeling_degrees() {
        assert_eq!(random_labeling(7, 1, None).unwrap().field.a, 4);
        assert_eq!(random_labeling(20, 1, None).unwrap().field.a, 6);
        let l = random_labeling(7, 1, Some(3)).unwrap();
        let mut labels = l.pi.clone();
        labels.sort_unstable();
        assert_eq!(labels, (1..8).collect::<Vec<u32>>());
        assert!(random_labeling(9, 1, Some(3)).is_err());
        assert_eq!(dense_degree(9), 4);
        assert_eq!(dense_degree(7), 3);
    }

    #[test]
    fn projective_templates() {
        for (n, a, count) in [(7, 3, 7), (15, 4, 35), (31, 5, 155)] {
            let g = SimpleGraph::complete(n);
            let t = template(&g, &Labeling::identity(n, a).unwrap()).unwrap();
            assert_eq!(t.len(), count);
            let d = TriangleDecomposition::new(t.triangles.clone());
            assert!(verify_triangle_decomposition(&g.to_hypergraph(), &d).accepted);
        }
        // Dropping an edge removes its template triangle from G*.
        let mut g = SimpleGraph::complete(7);
        g.remove_edge(0, 1);
        let t = template(&g, &Labeling::identity(7, 3).unwrap()).unwrap();
        assert_eq!(t.len(), 6);
        assert!(!t.gstar.has_edge(0, 2));
    }

    #[test]
    fn strict_spill_cover_fails_on_k13() {
        // With a = 4, G minus G* is triangle-free, so the whole of it is the
        // leave; its spill needs more distinct template triangles than exist.
        let g = SimpleGraph::complete(13);
        for seed in 0..5 {
            let lab = random_labeling(13, seed, Some(4)).unwrap();
            let tpl = template(&g, &lab).unwrap();
            let leave = g.difference(&tpl.gstar);
            assert!(leave.triangles().is_empty());
            let strict = CoverOptions {
                require_distinct_template: true,
            };
            let e = cover_leave(&leave, &tpl.gstar, &lab, seed, &strict).unwrap_err();
            assert!(
                matches!(e, Error::Failed(ref f) if f.stage == "cover-leave"),
                "{e:?}"
            );
        }
    }

    #[test]
    fn exact_hole_examples() {
        let n = 15;
        let g = SimpleGraph::complete(n);
        let lab = Labeling::identity(n, 4).unwrap();
        let tpl = template(&g, &lab).unwrap();
        let empty = SimpleGraph::new(n);
        assert_eq!(
            exact_hole(&empty, &tpl, &lab, 1000).unwrap(),
            Some((vec![], vec![]))
        );
        // A template triangle's own edges: it is the hole, nothing inside.
        let t = tpl.triangles[3];
        let (outer, inner) = exact_hole(&SimpleGraph::from_triangles(n, &[t]), &tpl, &lab, 1000)
            .unwrap()
            .unwrap();
        assert_eq!((outer, inner), (vec![t], vec![]));
        // Non-template triangles: whatever comes back satisfies the swap.
        for seed in 0..4 {
            let x = random_non_template_triangle(&g, &lab, seed).unwrap();
            let spill = SimpleGraph::from_triangles(n, &[x]);
            match exact_hole(&spill, &tpl, &lab, 200_000) {
                Ok(Some((outer, inner))) => {
                    let mut lhs = edge_multiset(&outer);
                    let mut rhs = edge_multiset(&inner);
                    rhs.extend(spill.edges());
                    lhs.sort_unstable();
                    rhs.sort_unstable();
                    assert_eq!(lhs, rhs);
                    assert!(outer.iter().all(|t| tpl.contains(t)));
                    assert!(inner.iter().all(|t| !lab.is_zero_sum(t)));
                }
                Ok(None) | Err(Error::TooLarge(_)) => {}
                Err(e) => panic!("{e:?}"),
            }
        }
    }

    fn edge_multiset(ts: &[Triangle]) -> Vec<(Vertex, Vertex)> {
        ts.iter().flat_map(triangle_edges).collect()
    }

    #[test]
    fn associated_octahedron_examples() {
        let g = SimpleGraph::complete(7);
        let lab = Labeling::identity(7, 3).unwrap();
        // Labels 1, 2, 4 are vertices 0, 1, 3.
        let a = associated_octahedron(&[0, 1, 3], &lab, &g).unwrap();
        let mut parts: Vec<[u32; 2]> = a
            .octahedron
            .parts
            .iter()
            .map(|p| [lab.label(p[0]), lab.label(p[1])])
            .collect();
        parts.sort();
        assert_eq!(parts, vec![[1, 6], [2, 5], [4, 3]]);
        for t in a.template_side {
            assert!(lab.is_zero_sum(&t));
        }
        assert!(a.through_t.contains(&[0, 1, 3]));
        assert_eq!(
            associated_octahedron(&[0, 1, 2], &lab, &g),
            Err(NotOctahedral::Degenerate)
        );
    }

    #[test]
    fn cover_leave_examples() {
        let lab = Labeling::identity(7, 3).unwrap();
        let g = SimpleGraph::complete(7);
        let empty = SimpleGraph::new(7);
        let c = cover_leave(&empty, &g, &lab, 1, &CoverOptions::default()).unwrap();
        assert!(c.triangles.is_empty() && c.spill.is_empty());
        let mut gstar = g.clone();
        gstar.remove_edge(0, 1);
        let leave = SimpleGraph::from_edges(7, [(0, 1)]);
        let c = cover_leave(&leave, &gstar, &lab, 1, &CoverOptions::default()).unwrap();
        assert_eq!((c.triangles.len(), c.spill.len()), (1, 2));
    }

    #[test]
    fn signed_examples() {
        let n = 15;
        let g = SimpleGraph::complete(n);
        let lab = Labeling::identity(n, 4).unwrap();
        let tpl = template(&g, &lab).unwrap();
        let t0 = tpl.triangles[0];
        let s = SimpleGraph::from_triangles(n, &[t0]);
        let r = signed_decomposition(&s, &tpl.gstar, &g, 3).unwrap();
        assert_eq!(r.decomposition.plus, vec![t0]);
        assert!(r.decomposition.minus.is_empty());
        // Two template triangles sharing no edge.
        let t1 = *tpl
            .triangles
            .iter()
            .find(|t| t.iter().all(|v| !t0.contains(v)))
            .unwrap();
        let s2 = SimpleGraph::from_triangles(n, &[t0, t1]);
        let r = signed_decomposition(&s2, &tpl.gstar, &g, 3).unwrap();
        assert!(r.decomposition.is_valid_for(&s2, &tpl.gstar));
        // A 4-cycle has 4 edges, so no integral decomposition exists.
        let c4 = SimpleGraph::from_edges(n, [(0, 1), (1, 2), (2, 3), (0, 3)]);
        assert!(matches!(
            signed_decomposition(&c4, &g, &g, 1),
            Err(Error::Failed(_))
        ));
        let outside = SimpleGraph::from_edges(n, [(0, 1)]);
        let mut gs = g.clone();
        gs.remove_edge(0, 1);
        assert!(matches!(
            signed_decomposition(&outside, &gs, &g, 1),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn cascades_on_projective_labels() {
        let n = 15;
        let g = SimpleGraph::complete(n);
        let lab = Labeling::identity(n, 4).unwrap();
        for seed in 0..10 {
            let t = random_non_template_triangle(&g, &lab, seed).unwrap();
            let mut w = TriangleWeights::new();
            add_weight(&mut w, t, 1);
            let mv = cascade_absorb(&t, &w, &lab, &g, seed, 500).unwrap();
            assert_eq!(mv.len(), 1);
            let mut stats = FlipStats::default();
            for (o, d) in mv {
                flip(&mut w, &o, d, &mut stats);
            }
            assert!(w.iter().all(|(t, &x)| (x == 1) == lab.is_zero_sum(t)));
        }
        let t = [0, 1, 2];
        assert!(cascade_absorb(&t, &TriangleWeights::new(), &lab, &g, 0, 10)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn pipeline_small_complete_graphs() {
        for n in [7, 15] {
            let r = triangle_decompose_algebraic(&SimpleGraph::complete(n), 1).unwrap();
            assert_eq!(r.decomposition.len(), n * (n - 1) / 6);
        }
        assert!(matches!(
            triangle_decompose_algebraic(&SimpleGraph::complete(4), 1),
            Err(Error::InvalidInstance(_))
        ));
    }
}
