//! Codegrees and degree sequences of simplicial complexes.

use crate::error::{Error, Result};
use crate::hypergraph::{for_each_subset, Hypergraph, Vertex};
use std::collections::{BTreeSet, HashMap};

/// Minimum over all (r−1)-subsets of the number of edges containing it.
pub fn min_codegree(h: &Hypergraph) -> Result<usize> {
    let r = h.r();
    if r < 2 {
        return Err(Error::InvalidInstance("codegree needs r >= 2".into()));
    }
    if h.n() < r {
        return Err(Error::InvalidInstance(format!(
            "n = {} is smaller than r = {r}",
            h.n()
        )));
    }
    let mut counts: HashMap<Vec<Vertex>, usize> = HashMap::new();
    for e in h.edges() {
        for skip in 0..r {
            let key: Vec<Vertex> = e
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect();
            *counts.entry(key).or_default() += 1;
        }
    }
    let total = crate::hypergraph::binomial(h.n() as u64, (r - 1) as u64);
    if (counts.len() as u64) < total {
        return Ok(0);
    }
    Ok(counts.values().copied().min().unwrap_or(0))
}

/// Codegree of each pair in a 3-graph, as a dense `n × n` table.
pub fn pair_codegrees(h: &Hypergraph) -> Vec<Vec<usize>> {
    let n = h.n();
    let mut c = vec![vec![0usize; n]; n];
    for e in h.edges() {
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                c[e[i]][e[j]] += 1;
                c[e[j]][e[i]] += 1;
            }
        }
    }
    c
}

/// All subsets of the given sets, the empty set included.
pub fn downward_closure(sets: &[Vec<Vertex>]) -> Vec<Vec<Vertex>> {
    let mut out: BTreeSet<Vec<Vertex>> = BTreeSet::new();
    for s in sets {
        let mut s = s.clone();
        s.sort_unstable();
        s.dedup();
        for k in 0..=s.len() {
            for_each_subset(s.len(), k, |idx| {
                out.insert(idx.iter().map(|&i| s[i]).collect());
            });
        }
    }
    out.into_iter().collect()
}

/// Degree sequence `(δ_0, …, δ_{r−1})` of a downward-closed family:
/// `δ_i` is the least number of `(i+1)`-sets containing an `i`-set of the
/// family. The empty set is always taken to be present.
pub fn delta_sequence(family: &[Vec<Vertex>], r: usize) -> Result<Vec<usize>> {
    let mut layers: Vec<BTreeSet<Vec<Vertex>>> = vec![BTreeSet::new(); r + 1];
    layers[0].insert(Vec::new());
    for s in family {
        let mut s = s.clone();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInstance(format!(
                "set {s:?} repeats a vertex"
            )));
        }
        if s.len() <= r {
            layers[s.len()].insert(s);
        }
    }
    for i in 1..=r {
        for s in &layers[i] {
            for skip in 0..s.len() {
                let mut sub = s.clone();
                sub.remove(skip);
                if !layers[i - 1].contains(&sub) {
                    return Err(Error::InvalidInstance(format!(
                        "family is not closed under subsets: {sub:?} missing below {s:?}"
                    )));
                }
            }
        }
    }
    let mut seq = Vec::with_capacity(r);
    for i in 0..r {
        let mut counts: HashMap<&[Vertex], usize> =
            layers[i].iter().map(|s| (s.as_slice(), 0)).collect();
        let mut subs = Vec::new();
        for f in &layers[i + 1] {
            subs.clear();
            for skip in 0..f.len() {
                let mut sub = f.clone();
                sub.remove(skip);
                subs.push(sub);
            }
            for sub in &subs {
                if let Some(c) = counts.get_mut(sub.as_slice()) {
                    *c += 1;
                }
            }
        }
        seq.push(counts.values().copied().min().unwrap_or(0));
    }
    Ok(seq)
}

/// `δ^c_i = (1 − i/r)·n`, rounded down.
pub fn critical_degree_sequence(n: usize, r: usize) -> Vec<usize> {
    (0..r).map(|i| (r - i) * n / r).collect()
}
