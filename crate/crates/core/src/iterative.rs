//! Triangle decompositions by iterative absorption: a vortex of nested
//! random vertex sets, cover-down steps pushing the uncovered edges into
//! the next set, and an absorber swap for the final leave.

use crate::error::{Error, Failure, Result};
use crate::graph::SimpleGraph;
use crate::hypergraph::{
    pair, triangle, triangle_edges, Hypergraph, Triangle, TriangleDecomposition, Vertex,
};
use crate::lp::LpOptions;
use crate::nibble::{rodl_nibble_weighted, NibbleParams};
use crate::relaxations::{fractional_triangle_decomposition_on, FractionalOutcome};
use crate::rng::{derive_seed, rng_from, Rng};
use crate::verify::verify_triangle_decomposition;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Spread of per-edge triangle degrees inside one vortex level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelStats {
    pub size: usize,
    pub edges: usize,
    pub min_triangle_degree: usize,
    pub max_triangle_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Vortex {
    /// `levels[0]` is the whole vertex set; each level is sorted.
    pub levels: Vec<Vec<Vertex>>,
    pub theta: f64,
    pub stats: Vec<LevelStats>,
}

impl Vortex {
    pub fn sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn last(&self) -> &[Vertex] {
        self.levels.last().expect("a vortex has a first level")
    }
}

fn level_stats(g: &SimpleGraph, level: &[Vertex]) -> LevelStats {
    let inside: BTreeSet<Vertex> = level.iter().copied().collect();
    let mut lo = usize::MAX;
    let mut hi = 0;
    let mut edges = 0;
    for (u, v) in g.edges() {
        if inside.contains(&u) && inside.contains(&v) {
            edges += 1;
            let t = g
                .common_neighbors(u, v)
                .filter(|w| inside.contains(w))
                .count();
            lo = lo.min(t);
            hi = hi.max(t);
        }
    }
    LevelStats {
        size: level.len(),
        edges,
        min_triangle_degree: if edges == 0 { 0 } else { lo },
        max_triangle_degree: hi,
    }
}

/// Nested uniformly random subsets with `|V_i| = round(θ·|V_{i−1}|)`,
/// stopping at the first level of size at most `tau_cap`.
pub fn build_vortex(g: &SimpleGraph, theta: f64, tau_cap: usize, seed: u64) -> Result<Vortex> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "theta must lie in (0,1), got {theta}"
        )));
    }
    let mut levels = vec![(0..g.n()).collect::<Vec<Vertex>>()];
    let mut r = rng_from(seed, "vortex", 0);
    while levels.last().unwrap().len() > tau_cap {
        let prev = levels.last().unwrap();
        let size = (theta * prev.len() as f64).round() as usize;
        if size >= prev.len() {
            return Err(Error::InvalidInput(format!(
                "theta {theta} does not shrink a level of size {}",
                prev.len()
            )));
        }
        let mut next: Vec<Vertex> = prev.choose_multiple(&mut r, size).copied().collect();
        next.sort_unstable();
        levels.push(next);
    }
    let stats = levels.iter().map(|l| level_stats(g, l)).collect();
    Ok(Vortex {
        levels,
        theta,
        stats,
    })
}

/// Weighted triangle family in which every edge of `g` has total weight 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoostedFamily {
    pub triangles: Vec<Triangle>,
    #[serde(skip)]
    pub weights: Vec<BigRational>,
}

impl BoostedFamily {
    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.to_f64().unwrap_or(0.0))
            .collect()
    }
}

pub fn boost_triangles(g: &SimpleGraph, family: &[Triangle]) -> Result<BoostedFamily> {
    boost_triangles_with(g, family, &LpOptions::default())
}

/// A perfect fractional triangle decomposition supported on `family`,
/// read as selection probabilities. Triangles with weight zero are dropped.
pub fn boost_triangles_with(
    g: &SimpleGraph,
    family: &[Triangle],
    opts: &LpOptions,
) -> Result<BoostedFamily> {
    if family.is_empty() {
        return Err(Error::InvalidInput(
            "boosting needs a nonempty triangle family".into(),
        ));
    }
    match fractional_triangle_decomposition_on(g, family, opts)? {
        FractionalOutcome::Infeasible => Err(Error::Failed(Failure::new(
            "boost",
            "no fractional triangle decomposition on the given support",
        ))),
        FractionalOutcome::Feasible(sol) => {
            let (triangles, weights) = sol
                .weights
                .into_iter()
                .map(|(k, w)| ([k[0], k[1], k[2]], w))
                .unzip();
            Ok(BoostedFamily { triangles, weights })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoverDownParams {
    /// Probability of reserving a cross edge.
    pub p: f64,
    pub theta: f64,
    pub seed: u64,
    /// Degree-slack constants, `0 < c0 < c1 < c2 < p`; a vertex with fewer
    /// than `c1·|V1|` neighbours in `V1` is reported.
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Weight the nibble by a fractional decomposition of the nibble graph.
    pub boost: bool,
    /// Pivot cap for the boosting LP; on overflow the nibble runs unweighted.
    pub boost_max_pivots: usize,
    /// Matchings tried per vertex, and the search cap, in the second greedy.
    pub matching_cap: usize,
    pub matching_nodes: u64,
    /// Node cap of the exhaustive fallback and how many times it may hand
    /// a quarter of the nibble triangles back to the leave.
    pub search_nodes: u64,
    pub search_rounds: usize,
}

impl Default for CoverDownParams {
    fn default() -> Self {
        CoverDownParams {
            p: 0.1,
            theta: 0.3,
            seed: 0,
            c0: 0.01,
            c1: 0.02,
            c2: 0.05,
            boost: false,
            boost_max_pivots: 20_000,
            matching_cap: 32,
            matching_nodes: 20_000,
            search_nodes: 200_000,
            search_rounds: 4,
        }
    }
}

impl CoverDownParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidInput(format!(
                "p must lie in (0,1), got {}",
                self.p
            )));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidInput(format!(
                "theta must lie in (0,1), got {}",
                self.theta
            )));
        }
        if !(0.0 < self.c0 && self.c0 < self.c1 && self.c1 < self.c2 && self.c2 < self.p) {
            return Err(Error::InvalidInput("need 0 < c0 < c1 < c2 < p".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CoverDownTelemetry {
    pub reserved: usize,
    pub nibble_triangles: usize,
    pub boosted: bool,
    pub nibble_leave_edges: usize,
    pub greedy_one: usize,
    /// Triangles of the first greedy not made of two reserved edges.
    pub greedy_one_unreserved: usize,
    pub greedy_two: usize,
    pub greedy_two_nodes: u64,
    /// Triangles placed by the exhaustive fallback, zero if unused.
    pub search_triangles: usize,
    pub returned_to_leave: usize,
    /// Fraction of the edges inside `V1` consumed by this step.
    pub inside_coverage: f64,
    pub low_degree_vertices: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverDownOutcome {
    pub used: Vec<Triangle>,
    #[serde(skip)]
    pub residual: SimpleGraph,
    pub telemetry: CoverDownTelemetry,
}

/// Up to `cap` perfect matchings of `avail` on `verts`, in random order.
fn perfect_matchings(
    verts: &[Vertex],
    avail: &SimpleGraph,
    cap: usize,
    r: &mut Rng,
) -> Vec<Vec<(Vertex, Vertex)>> {
    fn go(
        left: &[Vertex],
        g: &SimpleGraph,
        cur: &mut Vec<(Vertex, Vertex)>,
        out: &mut Vec<Vec<(Vertex, Vertex)>>,
        cap: usize,
        r: &mut Rng,
    ) {
        if out.len() >= cap {
            return;
        }
        let Some(&u) = left.first() else {
            out.push(cur.clone());
            return;
        };
        let mut cands: Vec<Vertex> = left[1..]
            .iter()
            .copied()
            .filter(|&v| g.has_edge(u, v))
            .collect();
        cands.shuffle(r);
        for v in cands {
            let rest: Vec<Vertex> = left[1..].iter().copied().filter(|&x| x != v).collect();
            cur.push(pair(u, v));
            go(&rest, g, cur, out, cap, r);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(verts, avail, &mut Vec::new(), &mut out, cap, r);
    out
}

/// Covers the leftover cross edges of every vertex in `outer` by triangles
/// through a perfect matching of its neighbours inside `V1`. Vertices with
/// the fewest options go first; a dead end backtracks.
fn match_cross_edges(
    work: &mut SimpleGraph,
    outer: &[Vertex],
    v1: &[Vertex],
    cap: usize,
    r: &mut Rng,
    nodes: &mut u64,
    max_nodes: u64,
) -> Result<Option<Vec<Triangle>>> {
    *nodes += 1;
    if *nodes > max_nodes {
        return Ok(None);
    }
    let mut best: Option<(Vertex, Vec<Vec<(Vertex, Vertex)>>)> = None;
    for &x in outer {
        let nbrs: Vec<Vertex> = v1
            .iter()
            .copied()
            .filter(|&v| work.has_edge(x, v))
            .collect();
        if nbrs.is_empty() {
            continue;
        }
        if nbrs.len() % 2 == 1 {
            return Err(Error::ImpossibleState(format!(
                "vertex {x} has an odd number of cross edges left"
            )));
        }
        let ms = perfect_matchings(&nbrs, work, cap, r);
        if best.as_ref().is_none_or(|(_, b)| ms.len() < b.len()) {
            let dead = ms.is_empty();
            best = Some((x, ms));
            if dead {
                break;
            }
        }
    }
    let Some((x, ms)) = best else {
        return Ok(Some(Vec::new()));
    };
    for m in ms {
        let ts: Vec<Triangle> = m.iter().map(|&(u, v)| triangle(x, u, v)).collect();
        for t in &ts {
            work.remove_triangle(t);
        }
        if let Some(mut rest) = match_cross_edges(work, outer, v1, cap, r, nodes, max_nodes)? {
            rest.extend(ts);
            return Ok(Some(rest));
        }
        for t in &ts {
            work.add_triangle(t);
        }
    }
    Ok(None)
}

/// Covers every edge of `g` not inside `v1` by edge-disjoint triangles of
/// `g`: reserve cross edges `H`, nibble on the rest outside `V1`, cover the
/// leftover edges outside `V1` through `H`, then each vertex's leftover
/// cross edges by a perfect matching inside `V1`.
pub fn cover_down(
    g: &SimpleGraph,
    v1: &[Vertex],
    prm: &CoverDownParams,
) -> Result<CoverDownOutcome> {
    prm.validate()?;
    if !g.is_tridivisible() {
        return Err(Error::InvalidInstance(
            "cover-down needs a tridivisible graph".into(),
        ));
    }
    let n = g.n();
    let mut in_v1 = vec![false; n];
    for &v in v1 {
        if v >= n {
            return Err(Error::InvalidInput(format!("vertex {v} out of range")));
        }
        in_v1[v] = true;
    }
    let mut tel = CoverDownTelemetry::default();
    let inside_before = g
        .edges()
        .iter()
        .filter(|&&(u, v)| in_v1[u] && in_v1[v])
        .count();
    let mut work = g.clone();
    let mut used: Vec<Triangle> = Vec::new();
    if g.edges().iter().all(|&(u, v)| in_v1[u] && in_v1[v]) {
        return Ok(CoverDownOutcome {
            used,
            residual: work,
            telemetry: tel,
        });
    }
    let mut r = rng_from(prm.seed, "cover-down", 0);
    for x in (0..n).filter(|&x| !in_v1[x] && g.degree(x) > 0) {
        let d = v1.iter().filter(|&&v| g.has_edge(x, v)).count();
        if (d as f64) < prm.c1 * v1.len() as f64 {
            tel.low_degree_vertices += 1;
        }
    }

    // Reserve cross edges.
    let mut reserved = SimpleGraph::new(n);
    for (u, v) in g.edges() {
        if in_v1[u] != in_v1[v] && r.gen::<f64>() < prm.p {
            reserved.add_edge(u, v);
        }
    }
    tel.reserved = reserved.num_edges();

    // Nibble on the triangles of G minus G[V1] minus H.
    let mut outside = g.difference(&reserved);
    for (u, v) in g.edges() {
        if in_v1[u] && in_v1[v] {
            outside.remove_edge(u, v);
        }
    }
    if outside.num_edges() > 0 {
        let tris = outside.triangles();
        if tris.is_empty() {
            return Err(Error::Failed(Failure::new(
                "nibble",
                "no triangles outside V1",
            )));
        }
        let edges = outside.edges();
        let index: BTreeMap<(Vertex, Vertex), usize> =
            edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let weights = if prm.boost {
            let opts = LpOptions {
                max_pivots: Some(prm.boost_max_pivots),
                ..Default::default()
            };
            match boost_triangles_with(&outside, &tris, &opts) {
                Ok(b) => {
                    let by: BTreeMap<Triangle, f64> =
                        b.triangles.iter().copied().zip(b.weights_f64()).collect();
                    tel.boosted = true;
                    Some(
                        tris.iter()
                            .map(|t| by.get(t).copied().unwrap_or(0.0))
                            .collect::<Vec<f64>>(),
                    )
                }
                Err(Error::Failed(_)) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let h = Hypergraph::new(
            edges.len(),
            3,
            tris.iter()
                .map(|t| triangle_edges(t).iter().map(|e| index[e]).collect())
                .collect(),
        )?;
        let np = NibbleParams {
            seed: derive_seed(prm.seed, "cover-down-nibble", 0),
            ..Default::default()
        };
        let out = rodl_nibble_weighted(&h, weights.as_deref(), &np)?;
        for e in out.matching.edges() {
            let mut vs: Vec<Vertex> = e.iter().flat_map(|&i| [edges[i].0, edges[i].1]).collect();
            vs.sort_unstable();
            vs.dedup();
            let t = [vs[0], vs[1], vs[2]];
            work.remove_triangle(&t);
            used.push(t);
        }
        tel.nibble_triangles = used.len();
    }
    tel.nibble_leave_edges = work
        .edges()
        .iter()
        .filter(|&&(u, v)| !(in_v1[u] && in_v1[v]))
        .count();

    let before = work.clone();
    match greedy_finish(&mut work, &reserved, &in_v1, v1, prm, &mut r, &mut tel) {
        Ok(ts) => used.extend(ts),
        Err(Error::Failed(f)) => {
            // Small sets leave the greedy little room. Fall back to an
            // exhaustive cover of the leave, handing nibble triangles back
            // to it while that fails.
            log::debug!("cover-down greedy failed: {f}");
            work = before;
            (tel.greedy_one, tel.greedy_one_unreserved, tel.greedy_two) = (0, 0, 0);
            let mut nibbled = std::mem::take(&mut used);
            nibbled.shuffle(&mut r);
            let mut rounds = 0;
            loop {
                if let Some(ts) = search_finish(&mut work, &in_v1, prm.search_nodes, &mut r)? {
                    tel.search_triangles = ts.len();
                    used = nibbled;
                    used.extend(ts);
                    break;
                }
                if nibbled.is_empty() || rounds == prm.search_rounds {
                    return Err(Error::Failed(Failure {
                        stage: format!("{} then search", f.stage),
                        ..f
                    }));
                }
                rounds += 1;
                let back = nibbled.len().div_ceil(4);
                for t in nibbled.split_off(nibbled.len() - back) {
                    work.add_triangle(&t);
                    tel.returned_to_leave += 1;
                }
            }
        }
        Err(e) => return Err(e),
    }

    if let Some(&(u, v)) = work.edges().iter().find(|&&(u, v)| !(in_v1[u] && in_v1[v])) {
        return Err(Error::ImpossibleState(format!(
            "edge {u}{v} outside V1 left uncovered"
        )));
    }
    let inside_after = work.num_edges();
    tel.inside_coverage = if inside_before == 0 {
        0.0
    } else {
        (inside_before - inside_after) as f64 / inside_before as f64
    };
    assert_edge_disjoint_in(g, &used);
    Ok(CoverDownOutcome {
        used,
        residual: work,
        telemetry: tel,
    })
}

/// First greedy then second greedy; on success every edge of `work`
/// outside `V1` is covered.
fn greedy_finish(
    work: &mut SimpleGraph,
    reserved: &SimpleGraph,
    in_v1: &[bool],
    v1: &[Vertex],
    prm: &CoverDownParams,
    r: &mut Rng,
    tel: &mut CoverDownTelemetry,
) -> Result<Vec<Triangle>> {
    let n = work.n();
    let mut used = Vec::new();
    // First greedy: leftover edges outside V1, through reserved edges
    // when possible and through any uncovered cross edges otherwise.
    let mut star_edges: Vec<(Vertex, Vertex)> = work
        .edges()
        .into_iter()
        .filter(|&(u, v)| !in_v1[u] && !in_v1[v])
        .collect();
    star_edges.shuffle(r);
    for (u, v) in star_edges {
        let mut cands: Vec<(usize, Vertex)> = v1
            .iter()
            .copied()
            .filter(|&w| work.has_edge(u, w) && work.has_edge(v, w))
            .map(|w| {
                (
                    2 - reserved.has_edge(u, w) as usize - reserved.has_edge(v, w) as usize,
                    w,
                )
            })
            .collect();
        cands.shuffle(r);
        let Some(&(missing, w)) = cands.iter().min_by_key(|c| c.0) else {
            return Err(Error::Failed(
                Failure::new("greedy-one", "no triangle into V1 for an edge outside V1")
                    .with_witness((u, v)),
            ));
        };
        if missing > 0 {
            tel.greedy_one_unreserved += 1;
        }
        let t = triangle(u, v, w);
        work.remove_triangle(&t);
        used.push(t);
        tel.greedy_one += 1;
    }

    // Second greedy: each vertex's leftover cross edges by a matching in V1.
    let outer: Vec<Vertex> = (0..n).filter(|&x| !in_v1[x]).collect();
    let mut nodes = 0;
    let Some(ts) = match_cross_edges(
        work,
        &outer,
        v1,
        prm.matching_cap,
        r,
        &mut nodes,
        prm.matching_nodes,
    )?
    else {
        let witness = outer
            .iter()
            .copied()
            .find(|&x| v1.iter().any(|&v| work.has_edge(x, v)));
        return Err(Error::Failed(
            Failure::new(
                "greedy-two",
                "no perfect matchings for the leftover cross edges",
            )
            .with_witness(witness),
        ));
    };
    tel.greedy_two = ts.len();
    tel.greedy_two_nodes = nodes;
    used.extend(ts);

    Ok(used)
}

/// Exhaustive cover of the edges of `work` outside `V1` by triangles of
/// `work`, most constrained edge first. `None` when there is none or the
/// node cap is reached.
fn search_finish(
    work: &mut SimpleGraph,
    in_v1: &[bool],
    max_nodes: u64,
    r: &mut Rng,
) -> Result<Option<Vec<Triangle>>> {
    fn go(
        g: &mut SimpleGraph,
        in_v1: &[bool],
        out: &mut Vec<Triangle>,
        nodes: &mut u64,
        cap: u64,
        r: &mut Rng,
    ) -> bool {
        *nodes += 1;
        if *nodes > cap {
            return false;
        }
        let mut best: Option<((Vertex, Vertex), Vec<Vertex>)> = None;
        for (u, v) in g.edges() {
            if in_v1[u] && in_v1[v] {
                continue;
            }
            let ws: Vec<Vertex> = g.common_neighbors(u, v).collect();
            if best.as_ref().is_none_or(|(_, b)| ws.len() < b.len()) {
                let dead = ws.is_empty();
                best = Some(((u, v), ws));
                if dead {
                    break;
                }
            }
        }
        let Some(((u, v), mut ws)) = best else {
            return true;
        };
        ws.shuffle(r);
        for w in ws {
            let t = triangle(u, v, w);
            g.remove_triangle(&t);
            out.push(t);
            if go(g, in_v1, out, nodes, cap, r) {
                return true;
            }
            out.pop();
            g.add_triangle(&t);
        }
        false
    }
    let mut out = Vec::new();
    let mut nodes = 0;
    Ok(go(work, in_v1, &mut out, &mut nodes, max_nodes, r).then_some(out))
}

fn assert_edge_disjoint_in(g: &SimpleGraph, ts: &[Triangle]) {
    let mut seen = SimpleGraph::new(g.n());
    for t in ts {
        for (u, v) in triangle_edges(t) {
            assert!(g.has_edge(u, v), "triangle {t:?} is not in the graph");
            assert!(!seen.has_edge(u, v), "edge {u}{v} covered twice");
            seen.add_edge(u, v);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExclusiveAbsorber {
    pub s: Vec<(Vertex, Vertex)>,
    /// Edge-disjoint triangles set aside for `S`.
    pub a: Vec<Triangle>,
    /// Decomposition of `S` together with the edges of `a`.
    pub b: Vec<Triangle>,
}

/// Search for `A ⊆ pool` (pairwise edge-disjoint, disjoint from `target`)
/// and a triangle decomposition `B` of `target ∪ ⋃A`. The smallest
/// uncovered edge is covered first; its triangle's other edges are either
/// still uncovered or brought in by one new pool triangle each.
fn swap_search(
    target: &SimpleGraph,
    pool: &[Triangle],
    max_pool: usize,
    max_nodes: u64,
) -> Result<Option<(Vec<Triangle>, Vec<Triangle>)>> {
    let n = target.n();
    let mut by_edge: BTreeMap<(Vertex, Vertex), Vec<usize>> = BTreeMap::new();
    for (i, t) in pool.iter().enumerate() {
        for e in triangle_edges(t) {
            by_edge.entry(e).or_default().push(i);
        }
    }
    struct St<'a> {
        pool: &'a [Triangle],
        by_edge: BTreeMap<(Vertex, Vertex), Vec<usize>>,
        blocked: SimpleGraph,
        todo: SimpleGraph,
        a: Vec<usize>,
        b: Vec<Triangle>,
        nodes: u64,
        max_nodes: u64,
        max_pool: usize,
    }
    impl St<'_> {
        fn openers(&self, e: (Vertex, Vertex)) -> Vec<usize> {
            self.by_edge
                .get(&e)
                .map(|v| {
                    v.iter()
                        .copied()
                        .filter(|&i| {
                            triangle_edges(&self.pool[i])
                                .iter()
                                .all(|&(x, y)| !self.blocked.has_edge(x, y))
                        })
                        .collect()
                })
                .unwrap_or_default()
        }

        fn open(&mut self, i: usize) {
            let t = self.pool[i];
            self.blocked.add_triangle(&t);
            self.todo.add_triangle(&t);
            self.a.push(i);
        }

        fn close(&mut self, i: usize) {
            let t = self.pool[i];
            self.blocked.remove_triangle(&t);
            self.todo.remove_triangle(&t);
            self.a.pop();
        }

        fn go(&mut self) -> Result<bool> {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return Err(Error::TooLarge("absorber search node cap reached".into()));
            }
            let Some((u, v)) = self.todo.edges().into_iter().next() else {
                return Ok(true);
            };
            // Third vertices needing no new pool triangle come first.
            let mut cands: Vec<(usize, Vertex)> = (0..self.todo.n())
                .filter(|&w| w != u && w != v)
                .map(|w| {
                    let need = [(u, w), (v, w)]
                        .iter()
                        .filter(|&&(a, b)| !self.todo.has_edge(a, b))
                        .count();
                    (need, w)
                })
                .collect();
            cands.sort_unstable();
            for (need, w) in cands {
                if self.a.len() + need > self.max_pool {
                    continue;
                }
                let missing: Vec<(Vertex, Vertex)> = [pair(u, w), pair(v, w)]
                    .into_iter()
                    .filter(|&(a, b)| !self.todo.has_edge(a, b))
                    .collect();
                if missing.iter().any(|&(a, b)| self.blocked.has_edge(a, b)) {
                    continue;
                }
                let t = triangle(u, v, w);
                match missing.len() {
                    0 => {
                        if self.place(t)? {
                            return Ok(true);
                        }
                    }
                    1 => {
                        for i in self.openers(missing[0]) {
                            self.open(i);
                            if self.place(t)? {
                                return Ok(true);
                            }
                            self.close(i);
                        }
                    }
                    _ => {
                        for i in self.openers(missing[0]) {
                            self.open(i);
                            for j in self.openers(missing[1]) {
                                self.open(j);
                                if self.place(t)? {
                                    return Ok(true);
                                }
                                self.close(j);
                            }
                            self.close(i);
                        }
                    }
                }
            }
            Ok(false)
        }

        fn place(&mut self, t: Triangle) -> Result<bool> {
            self.todo.remove_triangle(&t);
            self.b.push(t);
            if self.go()? {
                return Ok(true);
            }
            self.b.pop();
            self.todo.add_triangle(&t);
            Ok(false)
        }
    }
    let mut st = St {
        pool,
        by_edge,
        blocked: target.clone(),
        todo: target.clone(),
        a: Vec::new(),
        b: Vec::new(),
        nodes: 0,
        max_nodes,
        max_pool,
    };
    debug_assert_eq!(st.blocked.n(), n);
    Ok(st
        .go()?
        .then(|| (st.a.iter().map(|&i| pool[i]).collect(), st.b)))
}

const ABSORBER_MAX_POOL: usize = 12;
const ABSORBER_MAX_NODES: u64 = 2_000_000;

/// Exclusive absorber for `s` (edges inside `vtau`) built from host
/// triangles that use no pair inside `vtau`.
pub fn exclusive_absorber(
    s: &SimpleGraph,
    vtau: &[Vertex],
    host: &SimpleGraph,
) -> Result<Option<ExclusiveAbsorber>> {
    if !s.is_tridivisible() {
        return Err(Error::InvalidInput(
            "absorbed graph must be tridivisible".into(),
        ));
    }
    let inside: BTreeSet<Vertex> = vtau.iter().copied().collect();
    if let Some((u, v)) = s
        .edges()
        .into_iter()
        .find(|(u, v)| !inside.contains(u) || !inside.contains(v))
    {
        return Err(Error::InvalidInput(format!(
            "edge {u}{v} leaves the final vortex set"
        )));
    }
    if !s.is_subgraph_of(host) {
        return Err(Error::InvalidInput(
            "absorbed graph must lie in the host".into(),
        ));
    }
    let pool: Vec<Triangle> = host
        .triangles()
        .into_iter()
        .filter(|t| t.iter().filter(|v| inside.contains(v)).count() <= 1)
        .collect();
    absorber_from_pool(s, &pool)
}

/// As [`exclusive_absorber`] with an explicit candidate pool.
pub fn absorber_from_pool(s: &SimpleGraph, pool: &[Triangle]) -> Result<Option<ExclusiveAbsorber>> {
    Ok(swap_search(s, pool, ABSORBER_MAX_POOL, ABSORBER_MAX_NODES)?
        .map(|(a, b)| ExclusiveAbsorber { s: s.edges(), a, b }))
}

/// Every tridivisible subgraph of `g` restricted to `vtau`.
pub fn tridivisible_subgraphs(g: &SimpleGraph, vtau: &[Vertex]) -> Vec<SimpleGraph> {
    let edges: Vec<(Vertex, Vertex)> = g
        .edges()
        .into_iter()
        .filter(|(u, v)| vtau.contains(u) && vtau.contains(v))
        .collect();
    assert!(edges.len() <= 20, "too many subgraphs to enumerate");
    (0u32..1 << edges.len())
        .map(|mask| {
            SimpleGraph::from_edges(
                g.n(),
                edges
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e),
            )
        })
        .filter(SimpleGraph::is_tridivisible)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterativeParams {
    pub theta: f64,
    /// Size at which the vortex stops.
    pub tau_cap: usize,
    /// Largest final set for which absorbers are reserved up front.
    pub eager_bound: usize,
    pub min_degree_fraction: f64,
    pub retries: usize,
    pub cover: CoverDownParams,
}

impl Default for IterativeParams {
    fn default() -> Self {
        IterativeParams {
            theta: 0.3,
            tau_cap: 6,
            eager_bound: 5,
            min_degree_fraction: 0.75,
            retries: 25,
            cover: CoverDownParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageTelemetry {
    pub stage: String,
    pub covered: usize,
    pub residual: usize,
    pub retries: usize,
    pub cover: Option<CoverDownTelemetry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IterativeReport {
    pub decomposition: TriangleDecomposition,
    pub vortex: Vortex,
    pub stages: Vec<StageTelemetry>,
    pub attempts: usize,
    pub eager_absorbers: usize,
    pub absorbed: ExclusiveAbsorber,
}

/// Extendability figures reported before the run: the least number of
/// common neighbours of an edge, and (for small graphs) the least number
/// of `K_5` copies on an edge.
fn preflight(g: &SimpleGraph) {
    let n = g.n();
    let mut common = usize::MAX;
    let mut k5 = usize::MAX;
    for (u, v) in g.edges() {
        let c: Vec<Vertex> = g.common_neighbors(u, v).collect();
        common = common.min(c.len());
        if n <= 30 {
            let mut count = 0;
            for i in 0..c.len() {
                for j in i + 1..c.len() {
                    if !g.has_edge(c[i], c[j]) {
                        continue;
                    }
                    count += c[j + 1..]
                        .iter()
                        .filter(|&&z| g.has_edge(c[i], z) && g.has_edge(c[j], z))
                        .count();
                }
            }
            k5 = k5.min(count);
        }
    }
    let nf = n as f64;
    if (common as f64) < 0.25 * nf {
        log::warn!("an edge has only {common} common neighbours");
    }
    if n <= 30 && (k5 as f64) < 0.01 * nf * nf * nf {
        log::warn!("an edge lies in only {k5} copies of K5");
    }
}

pub fn triangle_decompose_iterative(
    g: &SimpleGraph,
    prm: &IterativeParams,
    seed: u64,
) -> Result<IterativeReport> {
    if !g.is_tridivisible() {
        return Err(Error::InvalidInstance("graph is not tridivisible".into()));
    }
    let need = prm.min_degree_fraction * g.n() as f64;
    if (g.min_degree() as f64) < need {
        return Err(Error::InvalidInstance(format!(
            "minimum degree {} is below {need:.1}",
            g.min_degree()
        )));
    }
    prm.cover.validate()?;
    preflight(g);
    let mut last = None;
    for attempt in 0..prm.retries.max(1) {
        match attempt_once(
            g,
            prm,
            derive_seed(seed, "iterative-attempt", attempt as u64),
        ) {
            Ok(mut rep) => {
                rep.attempts = attempt + 1;
                return Ok(rep);
            }
            Err(Error::Failed(f)) => {
                log::debug!("iterative attempt {attempt} failed: {f}");
                last = Some(f);
            }
            Err(e) => return Err(e),
        }
    }
    let f = last.expect("at least one attempt");
    Err(Error::Failed(Failure {
        reason: format!("{} attempts failed; last: {}", prm.retries.max(1), f.reason),
        ..f
    }))
}

fn attempt_once(g: &SimpleGraph, prm: &IterativeParams, seed: u64) -> Result<IterativeReport> {
    let n = g.n();
    let vortex = build_vortex(g, prm.theta, prm.tau_cap, derive_seed(seed, "vortex", 0))?;
    let vtau = vortex.last().to_vec();
    let in_tau = |t: &Triangle| t.iter().filter(|v| vtau.contains(v)).count();

    // Eager absorbers for every possible leave on a small final set.
    let mut work = g.clone();
    let mut eager: Vec<ExclusiveAbsorber> = Vec::new();
    if vtau.len() <= prm.eager_bound {
        let mut host = g.clone();
        for (u, v) in g.edges() {
            if vtau.contains(&u) && vtau.contains(&v) {
                host.remove_edge(u, v);
            }
        }
        for s in tridivisible_subgraphs(g, &vtau) {
            let mut with_s = host.clone();
            with_s.union_with(&s);
            let Some(ab) = exclusive_absorber(&s, &vtau, &with_s)? else {
                return Err(Error::Failed(
                    Failure::new("absorbers", "no exclusive absorber for a possible leave")
                        .with_witness(s.edges()),
                ));
            };
            for t in &ab.a {
                host.remove_triangle(t);
                work.remove_triangle(t);
            }
            eager.push(ab);
        }
    }

    let mut used: Vec<Triangle> = Vec::new();
    let mut stages = Vec::new();
    for i in 1..vortex.levels.len() {
        let mut outcome = None;
        let mut last = None;
        let mut tries = 0;
        for k in 0..prm.retries.max(1) {
            tries = k + 1;
            let cp = CoverDownParams {
                seed: derive_seed(seed, "cover-down", (i * 1000 + k) as u64),
                ..prm.cover
            };
            match cover_down(&work, &vortex.levels[i], &cp) {
                Ok(o) => {
                    outcome = Some(o);
                    break;
                }
                Err(Error::Failed(f)) => last = Some(f),
                Err(e) => return Err(e),
            }
        }
        let Some(o) = outcome else {
            let f = last.expect("at least one try");
            return Err(Error::Failed(Failure {
                stage: format!("cover-down level {i}: {}", f.stage),
                ..f
            }));
        };
        stages.push(StageTelemetry {
            stage: format!("cover-down {i}"),
            covered: o.used.len(),
            residual: o.residual.num_edges(),
            retries: tries - 1,
            cover: Some(o.telemetry.clone()),
        });
        used.extend(o.used);
        work = o.residual;
        assert_edge_disjoint_in(g, &used);
    }

    // The leave sits inside the final set; swap in its absorber.
    let leave = work;
    let absorbed = if vtau.len() <= prm.eager_bound {
        let idx = eager
            .iter()
            .position(|ab| ab.s == leave.edges())
            .ok_or_else(|| {
                Error::ImpossibleState("leave is not one of the absorbed graphs".into())
            })?;
        let ab = eager[idx].clone();
        // Unused absorbers stay as they are.
        for (j, other) in eager.iter().enumerate() {
            if j != idx {
                used.extend(other.a.iter().copied());
            }
        }
        used.extend(ab.b.iter().copied());
        ab
    } else {
        let pool: Vec<Triangle> = used.iter().copied().filter(|t| in_tau(t) <= 1).collect();
        let ab = match absorber_from_pool(&leave, &pool) {
            Ok(Some(ab)) => ab,
            Ok(None) | Err(Error::TooLarge(_)) => {
                return Err(Error::Failed(
                    Failure::new("absorb", "no absorber among the used triangles")
                        .with_witness(leave.edges()),
                ))
            }
            Err(e) => return Err(e),
        };
        let removed: BTreeSet<Triangle> = ab.a.iter().copied().collect();
        used.retain(|t| !removed.contains(t));
        used.extend(ab.b.iter().copied());
        ab
    };
    stages.push(StageTelemetry {
        stage: "absorb".into(),
        covered: absorbed.b.len(),
        residual: 0,
        retries: 0,
        cover: None,
    });
    assert_edge_disjoint_in(g, &used);
    let d = TriangleDecomposition::new(used);
    let check = verify_triangle_decomposition(&g.to_hypergraph(), &d);
    if !check.accepted {
        return Err(Error::ImpossibleState(format!(
            "assembled decomposition rejected: {check:?}"
        )));
    }
    debug_assert_eq!(d.len() * 3, g.num_edges());
    let _ = n;
    Ok(IterativeReport {
        decomposition: d,
        vortex,
        stages,
        attempts: 0,
        eager_absorbers: eager.len(),
        absorbed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_triangle_decomposition;
    use num_traits::One;

    #[test]
    fn vortex_examples() {
        let v = build_vortex(&SimpleGraph::complete(100), 0.3, 16, 1).unwrap();
        assert_eq!(v.sizes(), vec![100, 30, 9]);
        for w in v.levels.windows(2) {
            assert!(w[1].iter().all(|x| w[0].contains(x)));
        }
        assert!(build_vortex(&SimpleGraph::complete(10), 0.99, 2, 1).is_err());
        assert!(build_vortex(&SimpleGraph::complete(10), 1.5, 2, 1).is_err());
        let v = build_vortex(&SimpleGraph::complete(50), 0.25, 16, 3).unwrap();
        let s = v.stats[1];
        assert_eq!(
            (s.min_triangle_degree, s.max_triangle_degree),
            (s.size - 2, s.size - 2)
        );
    }

    #[test]
    fn boost_examples() {
        let k7 = SimpleGraph::complete(7);
        let b = boost_triangles(&k7, &k7.triangles()).unwrap();
        assert_eq!(b.triangles.len(), 35);
        assert!(b
            .weights
            .iter()
            .all(|w| *w == BigRational::new(1.into(), 5.into())));
        let fano = exact_triangle_decomposition(&k7).unwrap().unwrap();
        let b = boost_triangles(&k7, fano.triangles()).unwrap();
        assert!(b.weights.iter().all(|w| w.is_one()));
        let missing: Vec<Triangle> = k7
            .triangles()
            .into_iter()
            .filter(|t| !(t.contains(&0) && t.contains(&1)))
            .collect();
        assert!(matches!(
            boost_triangles(&k7, &missing),
            Err(Error::Failed(_))
        ));
        assert!(boost_triangles(&k7, &[]).is_err());
    }

    #[test]
    fn cover_down_examples() {
        let g = SimpleGraph::complete(13);
        let v1 = [0, 1, 2, 3, 4];
        let prm = CoverDownParams {
            seed: 11,
            ..Default::default()
        };
        let mut ok = false;
        for k in 0..25 {
            let prm = CoverDownParams {
                seed: derive_seed(11, "t", k),
                ..prm
            };
            if let Ok(o) = cover_down(&g, &v1, &prm) {
                assert!(o
                    .residual
                    .edges()
                    .iter()
                    .all(|(u, v)| v1.contains(u) && v1.contains(v)));
                let covered: usize = o.used.len() * 3;
                assert_eq!(covered + o.residual.num_edges(), 78);
                ok = true;
                break;
            }
        }
        assert!(ok);
        let all: Vec<Vertex> = (0..13).collect();
        let o = cover_down(&g, &all, &prm).unwrap();
        assert!(o.used.is_empty());
        let mut bip = SimpleGraph::new(12);
        for u in 0..6 {
            for v in 6..12 {
                bip.add_edge(u, v);
            }
        }
        let e = cover_down(&bip, &[0, 6], &prm).unwrap_err();
        assert!(
            matches!(e, Error::Failed(ref f) if f.stage == "nibble"),
            "{e:?}"
        );
    }

    #[test]
    fn absorber_examples() {
        let host = SimpleGraph::complete(16);
        let tri = SimpleGraph::from_edges(16, [(0, 1), (1, 2), (0, 2)]);
        let ab = exclusive_absorber(&tri, &[0, 1, 2], &host)
            .unwrap()
            .unwrap();
        assert!(ab.a.is_empty() && ab.b == vec![[0, 1, 2]]);
        let c6 = SimpleGraph::from_edges(16, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]);
        let vt: Vec<Vertex> = (0..6).collect();
        let ab = exclusive_absorber(&c6, &vt, &host).unwrap().unwrap();
        assert!(!ab.a.is_empty());
        let mut all = c6.clone();
        for t in &ab.a {
            assert!(t.iter().filter(|v| vt.contains(v)).count() <= 1);
            all.add_triangle(t);
        }
        let d = TriangleDecomposition::new(ab.b.clone());
        assert!(verify_triangle_decomposition(&all.to_hypergraph(), &d).accepted);
        let edge = SimpleGraph::from_edges(16, [(0, 1)]);
        assert!(matches!(
            exclusive_absorber(&edge, &[0, 1], &host),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn pipeline_examples() {
        let r = triangle_decompose_iterative(
            &SimpleGraph::complete(13),
            &IterativeParams::default(),
            1,
        )
        .unwrap();
        assert_eq!(r.decomposition.len(), 26);
        assert!(matches!(
            triangle_decompose_iterative(&SimpleGraph::complete(4), &IterativeParams::default(), 1),
            Err(Error::InvalidInstance(_))
        ));
        let mut k6 = SimpleGraph::complete(6);
        for (a, b) in [(0, 1), (2, 3), (4, 5)] {
            k6.remove_edge(a, b);
        }
        let prm = IterativeParams {
            min_degree_fraction: 0.6,
            ..Default::default()
        };
        match triangle_decompose_iterative(&k6, &prm, 2) {
            Ok(r) => assert_eq!(r.decomposition.len(), 4),
            Err(e) => assert!(matches!(e, Error::Failed(_))),
        }
        assert!(exact_triangle_decomposition(&k6).unwrap().is_some());
    }
}
