//! Fractional and integral relaxations of perfect matching and triangle
//! decomposition, in exact arithmetic.

use crate::error::{Error, Result};
use crate::graph::SimpleGraph;
use crate::hypergraph::{triangle, triangle_edges, Hypergraph, Triangle, Vertex};
use crate::intlin::Hnf;
use crate::lp::{solve_feasibility, LpOptions, LpOutcome, SparseRow};
use crate::octahedron::{add_weight, edge_sums, flip, FlipStats, Octahedron, TriangleWeights};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::{BTreeMap, HashMap};

fn num_json(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(x.to_string()),
    }
}

/// Non-negative rational weights on edges (or triangles) of a host.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FractionalSolution {
    pub weights: BTreeMap<Vec<Vertex>, BigRational>,
}

impl Serialize for FractionalSolution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<serde_json::Value> = self
            .weights
            .iter()
            .map(|(k, w)| serde_json::json!([k, num_json(w.numer()), num_json(w.denom())]))
            .collect();
        let mut st = s.serialize_struct("FractionalSolution", 1)?;
        st.serialize_field("weights", &rows)?;
        st.end()
    }
}

impl FractionalSolution {
    pub fn weight(&self, key: &[Vertex]) -> BigRational {
        self.weights
            .get(key)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum FractionalOutcome {
    Feasible(FractionalSolution),
    Infeasible,
}

impl FractionalOutcome {
    pub fn solution(&self) -> Option<&FractionalSolution> {
        match self {
            FractionalOutcome::Feasible(s) => Some(s),
            FractionalOutcome::Infeasible => None,
        }
    }
}

fn run_lp(
    keys: Vec<Vec<Vertex>>,
    rows: Vec<SparseRow>,
    opts: &LpOptions,
) -> Result<FractionalOutcome> {
    let rhs = vec![BigRational::one(); rows.len()];
    Ok(match solve_feasibility(&rows, &rhs, keys.len(), opts)? {
        LpOutcome::Infeasible => FractionalOutcome::Infeasible,
        LpOutcome::Feasible(x) => FractionalOutcome::Feasible(FractionalSolution {
            weights: keys
                .into_iter()
                .zip(x)
                .filter(|(_, w)| !w.is_zero())
                .collect(),
        }),
    })
}

/// Weights with total 1 at every vertex.
pub fn fractional_pm(h: &Hypergraph) -> Result<FractionalOutcome> {
    fractional_pm_with(h, &LpOptions::default())
}

pub fn fractional_pm_with(h: &Hypergraph, opts: &LpOptions) -> Result<FractionalOutcome> {
    let mut rows: Vec<SparseRow> = vec![Vec::new(); h.n()];
    for (j, e) in h.edges().iter().enumerate() {
        for &v in e {
            rows[v].push((j, 1));
        }
    }
    run_lp(h.edges().to_vec(), rows, opts)
}

/// Triangle weights with total 1 on every edge of `g`.
pub fn fractional_triangle_decomposition(g: &SimpleGraph) -> Result<FractionalOutcome> {
    fractional_triangle_decomposition_on(g, &g.triangles(), &LpOptions::default())
}

/// As [`fractional_triangle_decomposition`] with the support restricted to
/// `support` (triangles not inside `g` are ignored).
pub fn fractional_triangle_decomposition_on(
    g: &SimpleGraph,
    support: &[Triangle],
    opts: &LpOptions,
) -> Result<FractionalOutcome> {
    let edges = g.edges();
    let index: HashMap<(Vertex, Vertex), usize> =
        edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut ts: Vec<Triangle> = support
        .iter()
        .copied()
        .filter(|t| g.has_triangle(t))
        .collect();
    ts.sort_unstable();
    ts.dedup();
    let mut rows: Vec<SparseRow> = vec![Vec::new(); edges.len()];
    for (j, t) in ts.iter().enumerate() {
        for e in triangle_edges(t) {
            rows[index[&e]].push((j, 1));
        }
    }
    run_lp(ts.iter().map(|t| t.to_vec()).collect(), rows, opts)
}

/// Integer weights on triangles.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IntegralSolution {
    pub weights: TriangleWeights,
}

impl Serialize for IntegralSolution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<serde_json::Value> = self
            .weights
            .iter()
            .map(|(t, w)| serde_json::json!([t, w, 1]))
            .collect();
        let mut st = s.serialize_struct("IntegralSolution", 1)?;
        st.serialize_field("weights", &rows)?;
        st.end()
    }
}

impl IntegralSolution {
    /// `Σ_{T ∋ v} |w_T|` per vertex.
    pub fn vertex_loads(&self, n: usize) -> Vec<i64> {
        let mut load = vec![0i64; n];
        for (t, w) in &self.weights {
            for &v in t {
                load[v] += w.abs();
            }
        }
        load
    }

    pub fn max_vertex_load(&self, n: usize) -> i64 {
        self.vertex_loads(n).into_iter().max().unwrap_or(0)
    }

    /// True iff the signed edge sums equal the indicator of `s`.
    pub fn represents(&self, s: &SimpleGraph) -> bool {
        let sums = edge_sums(&self.weights);
        sums.len() == s.num_edges() && sums.iter().all(|(&(u, v), &x)| x == 1 && s.has_edge(u, v))
    }
}

/// Precomputed lattice of triangle combinations of a host graph.
pub struct TriangleLattice {
    triangles: Vec<Triangle>,
    edge_index: HashMap<(Vertex, Vertex), usize>,
    hnf: Hnf,
}

impl TriangleLattice {
    pub fn new(host: &SimpleGraph) -> Self {
        let edges = host.edges();
        let edge_index: HashMap<(Vertex, Vertex), usize> =
            edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let triangles = host.triangles();
        let gens: Vec<Vec<i64>> = triangles
            .iter()
            .map(|t| {
                let mut row = vec![0i64; edges.len()];
                for e in triangle_edges(t) {
                    row[edge_index[&e]] = 1;
                }
                row
            })
            .collect();
        let hnf = Hnf::from_rows(&gens, edges.len(), true);
        TriangleLattice {
            triangles,
            edge_index,
            hnf,
        }
    }

    fn target(&self, s: &SimpleGraph) -> Option<Vec<BigInt>> {
        let mut v = vec![BigInt::zero(); self.edge_index.len()];
        for e in s.edges() {
            v[*self.edge_index.get(&e)?] = BigInt::one();
        }
        Some(v)
    }

    pub fn contains(&self, s: &SimpleGraph) -> bool {
        self.target(s).is_some_and(|v| self.hnf.contains(&v))
    }

    pub fn solve(&self, s: &SimpleGraph) -> Result<Option<IntegralSolution>> {
        let Some(v) = self.target(s) else {
            return Ok(None);
        };
        let Some(x) = self.hnf.generator_coefficients(&v) else {
            return Ok(None);
        };
        let mut weights = TriangleWeights::new();
        for (t, c) in self.triangles.iter().zip(x) {
            let c = c.to_i64().ok_or_else(|| {
                Error::ImpossibleState("triangle coefficient overflows i64".into())
            })?;
            add_weight(&mut weights, *t, c);
        }
        Ok(Some(IntegralSolution { weights }))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IntegralMethod {
    /// Constructive route on complete hosts with at least five vertices,
    /// lattice route otherwise.
    #[default]
    Auto,
    /// Hermite normal form of the triangle–edge incidence matrix.
    Lattice,
    /// Explicit combination of star gadgets; complete hosts, `n >= 5`.
    Constructive,
}

fn is_complete(g: &SimpleGraph) -> bool {
    let n = g.n();
    g.num_edges() == n * n.saturating_sub(1) / 2
}

/// Integer triangle weights over `host` whose edge sums are the indicator
/// of `s`, or `None` if there are none.
pub fn integral_triangle_decomposition(
    s: &SimpleGraph,
    host: &SimpleGraph,
) -> Result<Option<IntegralSolution>> {
    integral_triangle_decomposition_with(s, host, IntegralMethod::Auto)
}

pub fn integral_triangle_decomposition_with(
    s: &SimpleGraph,
    host: &SimpleGraph,
    method: IntegralMethod,
) -> Result<Option<IntegralSolution>> {
    if s.n() != host.n() || !s.is_subgraph_of(host) {
        return Err(Error::InvalidInput(
            "S must be a subgraph of the host".into(),
        ));
    }
    if s.is_empty() {
        return Ok(Some(IntegralSolution::default()));
    }
    let constructive_ok = is_complete(host) && host.n() >= 5;
    let sol = match method {
        IntegralMethod::Lattice => TriangleLattice::new(host).solve(s)?,
        IntegralMethod::Auto if !constructive_ok => TriangleLattice::new(host).solve(s)?,
        _ => {
            if !constructive_ok {
                return Err(Error::InvalidInput(
                    "constructive route needs a complete host on at least 5 vertices".into(),
                ));
            }
            constructive_solution(s)
        }
    };
    if let Some(sol) = &sol {
        if !sol.represents(s) {
            return Err(Error::ImpossibleState(
                "integral solution has wrong edge sums".into(),
            ));
        }
    }
    Ok(sol)
}

/// Over `K_n` (`n >= 5`): peel every edge away from vertex 0 with the
/// triangle through 0, then move the even star residue onto the edge 01
/// with the gadget `X(a,b,c) = T0ab + T0bc + T0ca − Tabc = 2(e0a + e0b + e0c)`.
fn constructive_solution(s: &SimpleGraph) -> Option<IntegralSolution> {
    if !s.is_tridivisible() {
        return None;
    }
    let n = s.n();
    let mut w = TriangleWeights::new();
    let mut star = vec![0i64; n];
    for (u, v) in s.edges() {
        if u == 0 {
            star[v] += 1;
        } else {
            add_weight(&mut w, triangle(0, u, v), 1);
            star[u] -= 1;
            star[v] -= 1;
        }
    }
    // Residue is Σ star[x]·e0x with every star[x] even.
    let gadget = |w: &mut TriangleWeights, a: Vertex, b: Vertex, c: Vertex, k: i64| {
        add_weight(w, triangle(0, a, b), k);
        add_weight(w, triangle(0, b, c), k);
        add_weight(w, triangle(0, c, a), k);
        add_weight(w, triangle(a, b, c), -k);
    };
    let others = |x: Vertex| -> (Vertex, Vertex) {
        let mut it = (2..n).filter(move |&y| y != x);
        (it.next().unwrap(), it.next().unwrap())
    };
    let mut total_half = 0i64;
    for (x, &a) in star.iter().enumerate().skip(2) {
        debug_assert!(a % 2 == 0);
        let b = a / 2;
        total_half += b;
        if b != 0 {
            // b·(2e0x − 2e01) = b·(X(x,c,d) − X(1,c,d)).
            let (c, d) = others(x);
            gadget(&mut w, x, c, d, b);
            gadget(&mut w, 1, c, d, -b);
        }
    }
    total_half += star[1] / 2;
    debug_assert!(total_half % 3 == 0);
    let k = total_half / 3;
    if k != 0 {
        // 6e01 = X(1,2,3) − (2e02 − 2e01) − (2e03 − 2e01).
        gadget(&mut w, 1, 2, 3, k);
        for x in [2, 3] {
            let (c, d) = others(x);
            gadget(&mut w, x, c, d, -k);
            gadget(&mut w, 1, c, d, k);
        }
    }
    Some(IntegralSolution { weights: w })
}

#[derive(Clone, Debug)]
pub struct BoundedSolution {
    pub solution: IntegralSolution,
    pub max_vertex_load: i64,
    pub flips: FlipStats,
}

#[derive(Clone, Debug)]
pub enum BoundedOutcome {
    Solved(BoundedSolution),
    /// Local moves stalled above the bound; carries the best state reached.
    Failed(BoundedSolution),
    NoIntegralSolution,
}

#[derive(Clone, Copy, Debug)]
pub struct BoundedOptions {
    pub method: IntegralMethod,
    pub max_sweeps: usize,
}

impl Default for BoundedOptions {
    fn default() -> Self {
        BoundedOptions {
            method: IntegralMethod::Auto,
            max_sweeps: 200,
        }
    }
}

/// Lexicographic greedy packing of `s` by its own triangles.
pub fn greedy_packing(s: &SimpleGraph) -> Vec<Triangle> {
    let mut rest = s.clone();
    let mut out = Vec::new();
    for t in s.triangles() {
        if rest.has_triangle(&t) {
            rest.remove_triangle(&t);
            out.push(t);
        }
    }
    out
}

pub fn bounded_integral_decomposition(
    s: &SimpleGraph,
    host: &SimpleGraph,
    bound: i64,
) -> Result<BoundedOutcome> {
    bounded_integral_decomposition_with(s, host, bound, &BoundedOptions::default())
}

pub fn bounded_integral_decomposition_with(
    s: &SimpleGraph,
    host: &SimpleGraph,
    bound: i64,
    opts: &BoundedOptions,
) -> Result<BoundedOutcome> {
    if s.n() != host.n() || !s.is_subgraph_of(host) {
        return Err(Error::InvalidInput(
            "S must be a subgraph of the host".into(),
        ));
    }
    let packed = greedy_packing(s);
    let mut rest = s.clone();
    for t in &packed {
        rest.remove_triangle(t);
    }
    let Some(mut sol) = integral_triangle_decomposition_with(&rest, host, opts.method)? else {
        return Ok(BoundedOutcome::NoIntegralSolution);
    };
    for t in packed {
        add_weight(&mut sol.weights, t, 1);
    }
    let mut flips = FlipStats::default();
    reduce_load(&mut sol.weights, host, opts.max_sweeps, &mut flips);
    if !sol.represents(s) {
        return Err(Error::ImpossibleState(
            "local moves changed edge sums".into(),
        ));
    }
    let max = sol.max_vertex_load(s.n());
    let out = BoundedSolution {
        solution: sol,
        max_vertex_load: max,
        flips,
    };
    Ok(if max <= bound {
        BoundedOutcome::Solved(out)
    } else {
        BoundedOutcome::Failed(out)
    })
}

fn octahedron_in(host: &SimpleGraph, o: &Octahedron) -> bool {
    o.edges().iter().all(|&(u, v)| host.has_edge(u, v))
}

/// Change of `Σ_v load_v²` (and of total mass) if `o` is flipped by `dir`.
fn flip_delta(w: &TriangleWeights, load: &[i64], o: &Octahedron, dir: i64) -> (i64, i64) {
    let (a, b) = o.groups();
    let verts = o.vertices();
    let mut dload = [0i64; 6];
    let mut dmass = 0;
    for (group, d) in [(a, dir), (b, -dir)] {
        for t in group {
            let old = w.get(&t).copied().unwrap_or(0);
            let change = (old + d).abs() - old.abs();
            if change == 0 {
                continue;
            }
            dmass += change;
            for v in t {
                let i = verts
                    .iter()
                    .position(|&x| x == v)
                    .expect("octahedron vertex");
                dload[i] += change;
            }
        }
    }
    let dsq = verts
        .iter()
        .zip(dload)
        .map(|(&v, d)| (load[v] + d) * (load[v] + d) - load[v] * load[v])
        .sum();
    (dsq, dmass)
}

/// Greedy octahedron flips that lower `Σ_v load_v²` (ties broken by total
/// mass), heaviest triangles first, until a sweep finds nothing or
/// `max_sweeps` sweeps have run.
pub fn reduce_load(
    w: &mut TriangleWeights,
    host: &SimpleGraph,
    max_sweeps: usize,
    stats: &mut FlipStats,
) {
    let n = host.n();
    let mut load = vec![0i64; n];
    for (t, x) in w.iter() {
        for &v in t {
            load[v] += x.abs();
        }
    }
    for _ in 0..max_sweeps {
        let mut support: Vec<(Triangle, i64)> = w.iter().map(|(&t, &x)| (t, x)).collect();
        support.sort_by_key(|&(t, x)| (-x.abs(), t));
        let mut improved = false;
        for (t, _) in support {
            let Some(&x) = w.get(&t) else { continue };
            let dir = -x.signum();
            let mut best: Option<(Octahedron, (i64, i64))> = None;
            for a2 in 0..n {
                if t.contains(&a2) {
                    continue;
                }
                for b2 in 0..n {
                    if t.contains(&b2) || b2 == a2 {
                        continue;
                    }
                    for c2 in 0..n {
                        if t.contains(&c2) || c2 == a2 || c2 == b2 {
                            continue;
                        }
                        let o = Octahedron {
                            parts: [[t[0], a2], [t[1], b2], [t[2], c2]],
                        };
                        let d = flip_delta(w, &load, &o, dir);
                        if d.0 >= 0 && !(d.0 == 0 && d.1 < 0) {
                            continue;
                        }
                        if best.as_ref().is_some_and(|(_, bd)| *bd <= d) {
                            continue;
                        }
                        if !octahedron_in(host, &o) {
                            continue;
                        }
                        best = Some((o, d));
                    }
                }
            }
            if let Some((o, _)) = best {
                let (a, b) = o.groups();
                for (group, d) in [(a, dir), (b, -dir)] {
                    for tri in group {
                        let old = w.get(&tri).copied().unwrap_or(0);
                        let change = (old + d).abs() - old.abs();
                        for &v in &tri {
                            load[v] += change;
                        }
                    }
                }
                flip(w, &o, dir, stats);
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barriers::{space_barrier, SpaceBarrierSpec};

    fn frac(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn fractional_pm_examples() {
        let k6 = Hypergraph::complete(6, 3);
        let sol = fractional_pm(&k6).unwrap();
        let s = sol.solution().unwrap();
        assert!(s.weights.values().all(|w| *w == frac(1, 10)));
        let sb = space_barrier(&SpaceBarrierSpec {
            n: 6,
            r: 3,
            i: 1,
            s: vec![0],
        })
        .unwrap();
        assert_eq!(fractional_pm(&sb).unwrap(), FractionalOutcome::Infeasible);
        let one = Hypergraph::complete(3, 3);
        assert_eq!(
            fractional_pm(&one)
                .unwrap()
                .solution()
                .unwrap()
                .weight(&[0, 1, 2]),
            frac(1, 1)
        );
    }

    #[test]
    fn fractional_triangle_examples() {
        for n in 3..9 {
            let s = fractional_triangle_decomposition(&SimpleGraph::complete(n)).unwrap();
            let s = s.solution().unwrap().clone();
            assert!(s.weights.values().all(|w| *w == frac(1, n as i64 - 2)));
        }
        let c4 = SimpleGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]);
        assert_eq!(
            fractional_triangle_decomposition(&c4).unwrap(),
            FractionalOutcome::Infeasible
        );
    }

    #[test]
    fn fractional_solution_serializes_as_triples() {
        let s = fractional_triangle_decomposition(&SimpleGraph::complete(4)).unwrap();
        let j = serde_json::to_string(s.solution().unwrap()).unwrap();
        assert!(j.starts_with("{\"weights\":[[[0,1,2],1,2]"), "{j}");
    }

    #[test]
    fn integral_examples() {
        let k4 = SimpleGraph::complete(4);
        assert!(integral_triangle_decomposition(&k4, &k4).unwrap().is_none());
        let e = SimpleGraph::new(4);
        assert!(integral_triangle_decomposition(&e, &k4)
            .unwrap()
            .unwrap()
            .weights
            .is_empty());
        let k7 = SimpleGraph::complete(7);
        for m in [IntegralMethod::Lattice, IntegralMethod::Constructive] {
            let sol = integral_triangle_decomposition_with(&k7, &k7, m)
                .unwrap()
                .unwrap();
            assert!(sol.represents(&k7));
        }
    }

    #[test]
    fn constructive_matches_tridivisibility() {
        let k6 = SimpleGraph::complete(6);
        let c = SimpleGraph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]);
        let sol = integral_triangle_decomposition_with(&c, &k6, IntegralMethod::Constructive)
            .unwrap()
            .unwrap();
        assert!(sol.represents(&c));
        let p = SimpleGraph::from_edges(6, [(1, 2), (2, 3), (3, 4)]);
        assert!(integral_triangle_decomposition(&p, &k6).unwrap().is_none());
    }

    #[test]
    fn bounded_examples() {
        let k7 = SimpleGraph::complete(7);
        let BoundedOutcome::Solved(b) = bounded_integral_decomposition(&k7, &k7, 3).unwrap() else {
            panic!("K7 within 3");
        };
        assert_eq!(b.max_vertex_load, 3);
        let e = SimpleGraph::new(7);
        let BoundedOutcome::Solved(b) = bounded_integral_decomposition(&e, &k7, 0).unwrap() else {
            panic!("empty");
        };
        assert!(b.solution.weights.is_empty());
        let t = SimpleGraph::from_triangles(7, &[[1, 3, 5]]);
        let BoundedOutcome::Solved(b) = bounded_integral_decomposition(&t, &k7, 1).unwrap() else {
            panic!("triangle");
        };
        assert_eq!(b.solution.weights.get(&[1, 3, 5]), Some(&1));
    }

    #[test]
    fn local_moves_reduce_constructive_weights() {
        let k9 = SimpleGraph::complete(9);
        let c = SimpleGraph::from_edges(9, [(2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 2)]);
        let raw = integral_triangle_decomposition_with(&c, &k9, IntegralMethod::Constructive)
            .unwrap()
            .unwrap();
        let raw_load = raw.max_vertex_load(9);
        let out = bounded_integral_decomposition(&c, &k9, 1_000).unwrap();
        let BoundedOutcome::Solved(b) = out else {
            panic!()
        };
        assert!(b.max_vertex_load <= raw_load);
        assert!(b.solution.represents(&c));
    }
}
