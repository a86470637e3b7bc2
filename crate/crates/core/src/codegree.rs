//! Perfect matchings in 3-graphs of large minimum codegree by the absorbing
//! method: absorber sampling, a near-perfect matching by exchange, and the
//! final absorption of the leftover triple.

use crate::degrees::min_codegree;
use crate::error::{Error, Failure, Result};
use crate::hypergraph::{Hypergraph, Matching, Vertex};
use crate::rng::rng_from;
use crate::verify::verify_perfect_matching;
use rand::seq::index::sample;
use rand::Rng as _;
use serde::Serialize;

/// Dense membership table for the edges of a 3-graph.
struct TripleSet {
    n: usize,
    bits: Vec<bool>,
}

impl TripleSet {
    fn new(g: &Hypergraph) -> Self {
        let n = g.n();
        let mut bits = vec![false; n * n * n];
        for e in g.edges() {
            bits[(e[0] * n + e[1]) * n + e[2]] = true;
        }
        TripleSet { n, bits }
    }

    fn has(&self, a: Vertex, b: Vertex, c: Vertex) -> bool {
        let mut t = [a, b, c];
        t.sort_unstable();
        self.bits[(t[0] * self.n + t[1]) * self.n + t[2]]
    }
}

fn require_3graph(g: &Hypergraph) -> Result<()> {
    if g.r() != 3 {
        return Err(Error::InvalidInstance(format!(
            "expected a 3-graph, got r = {}",
            g.r()
        )));
    }
    Ok(())
}

/// A split of `T ∪ e` into two edges of `g`, if any.
fn split(set: &TripleSet, six: &[Vertex; 6]) -> Option<([Vertex; 3], [Vertex; 3])> {
    // The part holding six[0] picks two of the other five.
    for i in 1..6 {
        for j in i + 1..6 {
            let a = [six[0], six[i], six[j]];
            let rest: Vec<Vertex> = (1..6)
                .filter(|&k| k != i && k != j)
                .map(|k| six[k])
                .collect();
            let b = [rest[0], rest[1], rest[2]];
            if set.has(a[0], a[1], a[2]) && set.has(b[0], b[1], b[2]) {
                return Some((a, b));
            }
        }
    }
    None
}

fn six_of(e: &[Vertex], t: &[Vertex]) -> Option<[Vertex; 6]> {
    if e.len() != 3 || t.len() != 3 || e.iter().any(|v| t.contains(v)) {
        return None;
    }
    let mut s = [e[0], e[1], e[2], t[0], t[1], t[2]];
    s.sort_unstable();
    if s.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(s)
}

/// Whether `t ∪ e` splits into two disjoint edges of `g`.
pub fn absorbs(e: &[Vertex], t: &[Vertex], g: &Hypergraph) -> bool {
    if g.r() != 3 || e.iter().chain(t).any(|&v| v >= g.n()) {
        return false;
    }
    let set = TripleSet::new(g);
    six_of(e, t).is_some_and(|s| split(&set, &s).is_some())
}

pub fn count_absorbers(t: &[Vertex], g: &Hypergraph) -> usize {
    if g.r() != 3 {
        return 0;
    }
    let set = TripleSet::new(g);
    g.edges()
        .iter()
        .filter(|e| six_of(e, t).is_some_and(|s| split(&set, &s).is_some()))
        .count()
}

#[derive(Clone, Debug, Serialize)]
pub struct AbsorberFamily {
    pub edges: Matching,
    pub c: f64,
    /// Sampling attempts used (1 = first try).
    pub attempts: usize,
    /// Whether every triple was checked, or a random sample of them.
    pub exhaustive_certificate: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct AbsorberOptions {
    pub max_retries: usize,
    /// Up to this many vertices the certificate enumerates all triples.
    pub exhaustive_bound: usize,
    pub sampled_triples: usize,
    /// Lower bound on the expected number of sampled edges; the raw rate
    /// `c/(4n²)` samples nothing at small `n`.
    pub min_expected_edges: f64,
}

impl Default for AbsorberOptions {
    fn default() -> Self {
        AbsorberOptions {
            max_retries: 50,
            exhaustive_bound: 60,
            sampled_triples: 10_000,
            min_expected_edges: 1.0,
        }
    }
}

/// Codegree of the pair `uv` inside the vertex set `keep`.
fn pair_codegree_within(set: &TripleSet, keep: &[Vertex], u: Vertex, v: Vertex) -> usize {
    keep.iter()
        .filter(|&&w| w != u && w != v && set.has(u, v, w))
        .count()
}

fn min_codegree_within(set: &TripleSet, keep: &[Vertex]) -> usize {
    let mut best = usize::MAX;
    for (i, &u) in keep.iter().enumerate() {
        for &v in &keep[i + 1..] {
            best = best.min(pair_codegree_within(set, keep, u, v));
        }
    }
    best
}

/// First triple inside `free` that no family member absorbs.
fn uncovered_triple(
    set: &TripleSet,
    family: &[Vec<Vertex>],
    free: &[Vertex],
    opts: &AbsorberOptions,
    n: usize,
    seed: u64,
    attempt: usize,
) -> (Option<[Vertex; 3]>, bool) {
    let covered = |t: [Vertex; 3]| {
        family
            .iter()
            .any(|e| six_of(e, &t).is_some_and(|s| split(set, &s).is_some()))
    };
    if free.len() < 3 {
        return (None, true);
    }
    if n <= opts.exhaustive_bound {
        for i in 0..free.len() {
            for j in i + 1..free.len() {
                for k in j + 1..free.len() {
                    let t = [free[i], free[j], free[k]];
                    if !covered(t) {
                        return (Some(t), true);
                    }
                }
            }
        }
        (None, true)
    } else {
        let mut r = rng_from(seed, "absorber-certificate", attempt as u64);
        for _ in 0..opts.sampled_triples {
            let idx = sample(&mut r, free.len(), 3);
            let mut t = [free[idx.index(0)], free[idx.index(1)], free[idx.index(2)]];
            t.sort_unstable();
            if !covered(t) {
                return (Some(t), false);
            }
        }
        (None, false)
    }
}

/// Samples edges independently, drops every edge meeting another sampled
/// edge, and certifies that each triple outside the family's vertices has
/// an absorber in it and that the rest keeps codegree at least a third of
/// its size. Retries with fresh streams.
pub fn sample_absorber_family(g: &Hypergraph, c: f64, seed: u64) -> Result<AbsorberFamily> {
    sample_absorber_family_with(g, c, seed, &AbsorberOptions::default())
}

pub fn sample_absorber_family_with(
    g: &Hypergraph,
    c: f64,
    seed: u64,
    opts: &AbsorberOptions,
) -> Result<AbsorberFamily> {
    require_3graph(g)?;
    let n = g.n();
    let set = TripleSet::new(g);
    let m = g.num_edges();
    let prob = if c <= 0.0 || m == 0 {
        0.0
    } else {
        (c / (4.0 * (n * n) as f64))
            .max(opts.min_expected_edges / m as f64)
            .min(1.0)
    };
    let mut last = Failure::new("absorber", "no attempt made");
    for attempt in 0..opts.max_retries.max(1) {
        let mut r = rng_from(seed, "absorber-sample", attempt as u64);
        let picked: Vec<&Vec<Vertex>> =
            g.edges().iter().filter(|_| r.gen::<f64>() < prob).collect();
        let mut hits = vec![0usize; n];
        for e in &picked {
            for &v in e.iter() {
                hits[v] += 1;
            }
        }
        let family: Vec<Vec<Vertex>> = picked
            .into_iter()
            .filter(|e| e.iter().all(|&v| hits[v] == 1))
            .cloned()
            .collect();
        let mut in_family = vec![false; n];
        for e in &family {
            for &v in e {
                in_family[v] = true;
            }
        }
        let free: Vec<Vertex> = (0..n).filter(|&v| !in_family[v]).collect();
        if free.len() >= 2 && 3 * min_codegree_within(&set, &free) < free.len() {
            last = Failure::new(
                "absorber",
                "remaining codegree below a third of the remaining vertices",
            )
            .with_witness(family.clone());
            continue;
        }
        let (bad, exhaustive) = uncovered_triple(&set, &family, &free, opts, n, seed, attempt);
        match bad {
            None => {
                return Ok(AbsorberFamily {
                    edges: Matching::new(family),
                    c,
                    attempts: attempt + 1,
                    exhaustive_certificate: exhaustive,
                })
            }
            Some(t) => {
                last = Failure::new(
                    "absorber",
                    format!(
                        "{} sampled absorbers leave a triple unabsorbed",
                        family.len()
                    ),
                )
                .with_witness(t);
            }
        }
    }
    last.reason = format!("{} after {} attempts", last.reason, opts.max_retries.max(1));
    Err(Error::Failed(last))
}

/// Greedy lexicographic extension of `m` to a maximal matching.
fn extend_maximal(g: &Hypergraph, used: &mut [bool], m: &mut Vec<[Vertex; 3]>) {
    for e in g.edges() {
        if e.iter().all(|&v| !used[v]) {
            for &v in e {
                used[v] = true;
            }
            m.push([e[0], e[1], e[2]]);
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct ExchangeStats {
    pub exchanges: usize,
}

/// Matching of size at least `n/3 − 1` by repeated two-for-one exchanges.
pub fn near_perfect_matching_third(g: &Hypergraph) -> Result<Matching> {
    near_perfect_matching_third_stats(g).map(|(m, _)| m)
}

pub fn near_perfect_matching_third_stats(g: &Hypergraph) -> Result<(Matching, ExchangeStats)> {
    require_3graph(g)?;
    let n = g.n();
    if n % 3 != 0 {
        return Err(Error::InvalidInstance(format!("3 must divide n = {n}")));
    }
    if n < 3 {
        return Ok((Matching::default(), ExchangeStats::default()));
    }
    let delta = min_codegree(g)?;
    if 3 * delta < n {
        return Err(Error::InvalidInstance(format!(
            "minimum codegree {delta} is below n/3 = {}",
            n / 3
        )));
    }
    let set = TripleSet::new(g);
    let mut used = vec![false; n];
    let mut m: Vec<[Vertex; 3]> = Vec::new();
    extend_maximal(g, &mut used, &mut m);
    let mut stats = ExchangeStats::default();
    loop {
        let free: Vec<Vertex> = (0..n).filter(|&v| !used[v]).collect();
        if free.len() <= 3 {
            break;
        }
        let pairs = [(free[0], free[1]), (free[2], free[3]), (free[4], free[5])];
        let mut done = false;
        for (ei, e) in m.iter().enumerate() {
            // Incidences between the three pairs and the vertices of e.
            let mut inc = [[false; 3]; 3];
            let mut weight = 0;
            for (pi, &(a, b)) in pairs.iter().enumerate() {
                for (xi, &x) in e.iter().enumerate() {
                    if set.has(a, b, x) {
                        inc[pi][xi] = true;
                        weight += 1;
                    }
                }
            }
            if weight < 4 {
                continue;
            }
            let mut swap = None;
            'find: for p1 in 0..3 {
                for x1 in 0..3 {
                    if !inc[p1][x1] {
                        continue;
                    }
                    for p2 in 0..3 {
                        for x2 in 0..3 {
                            if p2 != p1 && x2 != x1 && inc[p2][x2] {
                                swap = Some((p1, x1, p2, x2));
                                break 'find;
                            }
                        }
                    }
                }
            }
            let Some((p1, x1, p2, x2)) = swap else {
                return Err(Error::ImpossibleState(
                    "weight 4 without two disjoint incidences".into(),
                ));
            };
            let old = m.swap_remove(ei);
            for v in old {
                used[v] = false;
            }
            for (p, x) in [(p1, x1), (p2, x2)] {
                let (a, b) = pairs[p];
                let mut t = [a, b, old[x]];
                t.sort_unstable();
                for v in t {
                    used[v] = true;
                }
                m.push(t);
            }
            stats.exchanges += 1;
            done = true;
            break;
        }
        if !done {
            return Err(Error::ImpossibleState(
                "no matching edge of weight at least 4; the codegree condition must fail".into(),
            ));
        }
        assert!(stats.exchanges <= n / 3, "exchange count exceeded n/3");
        extend_maximal(g, &mut used, &mut m);
    }
    let out = Matching::new(m.into_iter().map(|t| t.to_vec()).collect());
    debug_assert!(out.is_disjoint());
    Ok((out, stats))
}

#[derive(Clone, Debug, Serialize)]
pub struct CodegreeReport {
    pub matching: Matching,
    pub absorbers: usize,
    pub absorber_attempts: usize,
    pub exchanges: usize,
    /// Whether the final triple had to be absorbed.
    pub absorbed_leftover: bool,
}

/// Absorbers, then a near-perfect matching of the rest, then the leftover
/// triple swapped in through its first absorber in canonical order.
pub fn perfect_matching_codegree(g: &Hypergraph, c: f64, seed: u64) -> Result<CodegreeReport> {
    perfect_matching_codegree_with(g, c, seed, &AbsorberOptions::default())
}

pub fn perfect_matching_codegree_with(
    g: &Hypergraph,
    c: f64,
    seed: u64,
    opts: &AbsorberOptions,
) -> Result<CodegreeReport> {
    require_3graph(g)?;
    let n = g.n();
    if n % 3 != 0 {
        return Err(Error::InvalidInstance(format!("3 must divide n = {n}")));
    }
    let delta = min_codegree(g)?;
    if (delta as f64) < (0.5 + c) * n as f64 {
        return Err(Error::InvalidInstance(format!(
            "minimum codegree {delta} is below (1/2 + {c})·{n}"
        )));
    }
    let family = sample_absorber_family_with(g, c, seed, opts)?;
    let mut in_family = vec![false; n];
    for e in family.edges.edges() {
        for &v in e {
            in_family[v] = true;
        }
    }
    let rest: Vec<Vertex> = (0..n).filter(|&v| !in_family[v]).collect();
    let sub = g.induced(&rest);
    let (near, stats) = near_perfect_matching_third_stats(&sub).map_err(|e| match e {
        Error::InvalidInstance(msg) | Error::ImpossibleState(msg) => {
            Error::Failed(Failure::new("near-perfect", msg))
        }
        other => other,
    })?;
    let mut edges: Vec<Vec<Vertex>> = near
        .edges()
        .iter()
        .map(|e| e.iter().map(|&v| rest[v]).collect())
        .collect();
    let mut covered = vec![false; n];
    for e in &edges {
        for &v in e {
            covered[v] = true;
        }
    }
    let left: Vec<Vertex> = rest.iter().copied().filter(|&v| !covered[v]).collect();
    let set = TripleSet::new(g);
    let mut absorbed_leftover = false;
    let mut absorbers: Vec<Vec<Vertex>> = family.edges.edges().to_vec();
    match left.len() {
        0 => {}
        3 => {
            let pos = absorbers
                .iter()
                .position(|e| six_of(e, &left).is_some_and(|s| split(&set, &s).is_some()));
            let Some(pos) = pos else {
                return Err(Error::Failed(
                    Failure::new("final-absorption", "no absorber for the leftover triple")
                        .with_witness(&left),
                ));
            };
            let e = absorbers.remove(pos);
            let (a, b) = split(&set, &six_of(&e, &left).expect("disjoint")).expect("absorbs");
            edges.push(a.to_vec());
            edges.push(b.to_vec());
            absorbed_leftover = true;
        }
        k => {
            return Err(Error::Failed(
                Failure::new("near-perfect", format!("{k} vertices left uncovered"))
                    .with_witness(&left),
            ))
        }
    }
    edges.extend(absorbers);
    let matching = Matching::new(edges);
    let check = verify_perfect_matching(g, &matching);
    if !check.accepted {
        return Err(Error::ImpossibleState(format!(
            "assembled matching rejected: {check:?}"
        )));
    }
    Ok(CodegreeReport {
        matching,
        absorbers: family.edges.len(),
        absorber_attempts: family.attempts,
        exchanges: stats.exchanges,
        absorbed_leftover,
    })
}
