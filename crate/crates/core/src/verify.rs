//! Certificate checkers. Both are total: malformed input yields a rejecting
//! report, never an error.

use crate::hypergraph::{
    pair, triangle_edges, Hypergraph, Matching, TriangleDecomposition, Vertex,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};

type Pair = (Vertex, Vertex);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    pub accepted: bool,
    pub triangles: usize,
    /// Host edges covered by no triangle.
    pub uncovered: Vec<Pair>,
    /// Edges covered more than once, with their multiplicity.
    pub overcovered: Vec<(Pair, usize)>,
    /// Triangle edges missing from the host.
    pub foreign: Vec<Pair>,
    /// Triangles with a repeated or out-of-range vertex.
    pub malformed: Vec<[Vertex; 3]>,
    /// Set when the host is not a graph.
    pub host_not_graph: bool,
}

pub fn verify_triangle_decomposition(
    g: &Hypergraph,
    d: &TriangleDecomposition,
) -> DecompositionCheck {
    let mut counts: BTreeMap<Pair, usize> = BTreeMap::new();
    let mut malformed = Vec::new();
    for t in d.triangles() {
        if t[0] == t[1] || t[1] == t[2] || t[2] >= g.n() {
            malformed.push(*t);
            continue;
        }
        for (u, v) in triangle_edges(t) {
            *counts.entry(pair(u, v)).or_default() += 1;
        }
    }
    let host_not_graph = g.r() != 2;
    let host: HashSet<Pair> = if host_not_graph {
        HashSet::new()
    } else {
        g.edges().iter().map(|e| (e[0], e[1])).collect()
    };
    let mut uncovered: Vec<Pair> = host
        .iter()
        .filter(|e| !counts.contains_key(e))
        .copied()
        .collect();
    uncovered.sort_unstable();
    let overcovered: Vec<(Pair, usize)> = counts
        .iter()
        .filter(|(_, &c)| c > 1)
        .map(|(&e, &c)| (e, c))
        .collect();
    let foreign: Vec<Pair> = counts
        .keys()
        .filter(|e| !host.contains(e))
        .copied()
        .collect();
    let accepted = !host_not_graph
        && malformed.is_empty()
        && uncovered.is_empty()
        && overcovered.is_empty()
        && foreign.is_empty();
    DecompositionCheck {
        accepted,
        triangles: d.len(),
        uncovered,
        overcovered,
        foreign,
        malformed,
        host_not_graph,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingCheck {
    pub accepted: bool,
    pub size: usize,
    /// Matching edges that are not edges of the host.
    pub foreign: Vec<Vec<Vertex>>,
    /// Vertices used by more than one matching edge.
    pub overlapping: Vec<Vertex>,
    pub uncovered: Vec<Vertex>,
}

pub fn verify_perfect_matching(h: &Hypergraph, m: &Matching) -> MatchingCheck {
    let mut uses = vec![0usize; h.n()];
    let mut foreign = Vec::new();
    for e in m.edges() {
        if !h.contains_edge(e) {
            foreign.push(e.clone());
        }
        for &v in e {
            if v < h.n() {
                uses[v] += 1;
            }
        }
    }
    let overlapping: Vec<Vertex> = (0..h.n()).filter(|&v| uses[v] > 1).collect();
    let uncovered: Vec<Vertex> = (0..h.n()).filter(|&v| uses[v] == 0).collect();
    MatchingCheck {
        accepted: foreign.is_empty() && overlapping.is_empty() && uncovered.is_empty(),
        size: m.len(),
        foreign,
        overlapping,
        uncovered,
    }
}

/// Checks that `m` is a (not necessarily perfect) matching of `h`.
pub fn is_matching_in(h: &Hypergraph, m: &Matching) -> bool {
    m.is_disjoint() && m.edges().iter().all(|e| h.contains_edge(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SimpleGraph;

    #[test]
    fn fano_decomposes_k7() {
        // Zero-sum triples of GF(8) labels v + 1.
        let mut ts = Vec::new();
        for a in 1..8usize {
            for b in a + 1..8 {
                let c = a ^ b;
                if c > b {
                    ts.push([a - 1, b - 1, c - 1]);
                }
            }
        }
        assert_eq!(ts.len(), 7);
        let k7 = SimpleGraph::complete(7).to_hypergraph();
        let check = verify_triangle_decomposition(&k7, &TriangleDecomposition::new(ts));
        assert!(check.accepted, "{check:?}");
        assert_eq!(check.triangles, 7);
    }

    #[test]
    fn partial_cover_of_k4_is_rejected() {
        let k4 = SimpleGraph::complete(4).to_hypergraph();
        let check = verify_triangle_decomposition(&k4, &TriangleDecomposition::new([[0, 1, 2]]));
        assert!(!check.accepted);
        assert_eq!(check.uncovered.len(), 3);
    }

    #[test]
    fn empty_cases() {
        let g = Hypergraph::empty(5, 2);
        assert!(verify_triangle_decomposition(&g, &TriangleDecomposition::default()).accepted);
        let check = verify_triangle_decomposition(&g, &TriangleDecomposition::new([[0, 1, 2]]));
        assert_eq!(check.foreign.len(), 3);
    }

    #[test]
    fn overlap_and_foreign_are_reported() {
        let k5 = SimpleGraph::complete(5).to_hypergraph();
        let d = TriangleDecomposition::new([[0, 1, 2], [0, 1, 3]]);
        let check = verify_triangle_decomposition(&k5, &d);
        assert_eq!(check.overcovered, vec![((0, 1), 2)]);
        let k3 = Hypergraph::new(4, 2, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let check = verify_triangle_decomposition(&k3, &TriangleDecomposition::new([[0, 1, 2]]));
        assert_eq!(check.foreign, vec![(0, 2)]);
    }

    #[test]
    fn perfect_matching_checks() {
        let h = Hypergraph::new(6, 3, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let both = Matching::new(h.edges().to_vec());
        assert!(verify_perfect_matching(&h, &both).accepted);
        let one = Matching::new(vec![vec![0, 1, 2]]);
        let check = verify_perfect_matching(&h, &one);
        assert!(!check.accepted);
        assert_eq!(check.uncovered, vec![3, 4, 5]);
        // 3 does not divide 7, so nothing can be perfect.
        let k7 = Hypergraph::complete(7, 3);
        let m = Matching::new(vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert!(!verify_perfect_matching(&k7, &m).accepted);
        let clash = Matching::new(vec![vec![0, 1, 2], vec![2, 3, 4]]);
        assert_eq!(verify_perfect_matching(&k7, &clash).overlapping, vec![2]);
    }
}
