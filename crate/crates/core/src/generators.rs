//! Seeded instance generators and the tridivisibility repair.

use crate::error::{Error, Failure, Result};
use crate::graph::SimpleGraph;
use crate::hypergraph::{Hypergraph, Vertex};
use crate::rng::rng_from;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Random deletion from `K_n`, keeping every degree at least
/// `⌈fraction·n⌉`.
pub fn generate_dense_graph(n: usize, min_degree_fraction: f64, seed: u64) -> Result<SimpleGraph> {
    if !(min_degree_fraction > 0.0 && min_degree_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "degree fraction must lie in (0,1], got {min_degree_fraction}"
        )));
    }
    let mut g = SimpleGraph::complete(n);
    let target = (min_degree_fraction * n as f64).ceil() as usize;
    if target >= n.saturating_sub(1) {
        return Ok(g);
    }
    let mut edges = g.edges();
    edges.shuffle(&mut rng_from(seed, "dense-graph", 0));
    let mut deg = g.degrees();
    for (u, v) in edges {
        if deg[u] > target && deg[v] > target {
            g.remove_edge(u, v);
            deg[u] -= 1;
            deg[v] -= 1;
        }
    }
    Ok(g)
}

/// Random deletion from the complete 3-graph keeping every pair's
/// codegree at least `⌈fraction·n⌉`.
pub fn generate_codegree_3graph(n: usize, codegree_fraction: f64, seed: u64) -> Result<Hypergraph> {
    if n % 3 != 0 {
        return Err(Error::InvalidInput(format!("3 must divide n = {n}")));
    }
    if !(0.0..=1.0).contains(&codegree_fraction) {
        return Err(Error::InvalidInput(format!(
            "codegree fraction must lie in [0,1], got {codegree_fraction}"
        )));
    }
    let full = Hypergraph::complete(n, 3);
    let target = (codegree_fraction * n as f64).ceil() as usize;
    if target >= n.saturating_sub(2) {
        return Ok(full);
    }
    let mut codeg = vec![n - 2; n * n];
    let mut order: Vec<usize> = (0..full.num_edges()).collect();
    order.shuffle(&mut rng_from(seed, "codegree-3graph", 0));
    let mut keep = vec![true; full.num_edges()];
    for i in order {
        let e = &full.edges()[i];
        let pairs = [(e[0], e[1]), (e[0], e[2]), (e[1], e[2])];
        if pairs.iter().all(|&(a, b)| codeg[a * n + b] > target) {
            keep[i] = false;
            for (a, b) in pairs {
                codeg[a * n + b] -= 1;
            }
        }
    }
    let mut idx = 0;
    Ok(full.filter(|_| {
        idx += 1;
        keep[idx - 1]
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Delete,
    Add,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub kind: EditKind,
    pub edge: (Vertex, Vertex),
}

/// Short cycle of a length in `lengths` through edges of `g`, lexicographic
/// first by a depth-first search from each start vertex.
fn find_cycle(g: &SimpleGraph, lengths: &[usize]) -> Option<Vec<Vertex>> {
    fn dfs(g: &SimpleGraph, len: usize, path: &mut Vec<Vertex>, on: &mut [bool]) -> bool {
        let last = *path.last().unwrap();
        if path.len() == len {
            return g.has_edge(last, path[0]);
        }
        for w in g.neighbors(last).collect::<Vec<_>>() {
            // The start is the smallest vertex on the cycle.
            if w <= path[0] || on[w] {
                continue;
            }
            path.push(w);
            on[w] = true;
            if dfs(g, len, path, on) {
                return true;
            }
            on[w] = false;
            path.pop();
        }
        false
    }
    for &len in lengths {
        for s in 0..g.n() {
            let mut path = vec![s];
            let mut on = vec![false; g.n()];
            on[s] = true;
            if dfs(g, len, &mut path, &mut on) {
                return Some(path);
            }
        }
    }
    None
}

/// Greedy edits towards even degrees and `3 | e(G)`. Odd vertices are
/// paired off (deleting an edge between them if one exists, adding one
/// otherwise); then a short cycle of suitable length is deleted, or added
/// in the complement, to fix the edge count mod 3.
pub fn make_tridivisible(g: &SimpleGraph) -> Result<(SimpleGraph, Vec<Edit>)> {
    make_tridivisible_with_budget(g, 2 * g.n())
}

pub fn make_tridivisible_with_budget(
    g: &SimpleGraph,
    budget: usize,
) -> Result<(SimpleGraph, Vec<Edit>)> {
    let mut h = g.clone();
    let mut edits = Vec::new();
    loop {
        let odd: Vec<Vertex> = (0..h.n()).filter(|&v| h.degree(v) % 2 == 1).collect();
        let Some(&u) = odd.first() else { break };
        let v = odd[1..].iter().copied().find(|&v| h.has_edge(u, v));
        match v {
            Some(v) => {
                h.remove_edge(u, v);
                edits.push(Edit {
                    kind: EditKind::Delete,
                    edge: (u, v),
                });
            }
            None => {
                let v = odd[1];
                h.add_edge(u, v);
                edits.push(Edit {
                    kind: EditKind::Add,
                    edge: (u, v),
                });
            }
        }
    }
    let k = h.num_edges() % 3;
    if k != 0 {
        // Deleting a cycle of length L changes e by −L; adding one by +L.
        let del: &[usize] = if k == 1 { &[4, 7] } else { &[5, 8] };
        let add: &[usize] = if k == 1 { &[5, 8] } else { &[4, 7] };
        if let Some(c) = find_cycle(&h, del) {
            for i in 0..c.len() {
                let (a, b) = (c[i], c[(i + 1) % c.len()]);
                h.remove_edge(a, b);
                edits.push(Edit {
                    kind: EditKind::Delete,
                    edge: (a.min(b), a.max(b)),
                });
            }
        } else {
            let comp = SimpleGraph::complete(h.n()).difference(&h);
            let Some(c) = find_cycle(&comp, add) else {
                return Err(Error::Failed(Failure::new(
                    "make-tridivisible",
                    "no cycle of a suitable length to fix the edge count",
                )));
            };
            for i in 0..c.len() {
                let (a, b) = (c[i], c[(i + 1) % c.len()]);
                h.add_edge(a, b);
                edits.push(Edit {
                    kind: EditKind::Add,
                    edge: (a.min(b), a.max(b)),
                });
            }
        }
    }
    if edits.len() > budget {
        return Err(Error::Failed(
            Failure::new(
                "make-tridivisible",
                format!("{} edits exceed the budget {budget}", edits.len()),
            )
            .with_witness(edits.len()),
        ));
    }
    debug_assert!(h.is_tridivisible());
    Ok((h, edits))
}
