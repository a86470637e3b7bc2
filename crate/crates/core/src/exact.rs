//! Exhaustive triangle decomposition, the oracle for small graphs.

use crate::error::{Error, Result};
use crate::graph::SimpleGraph;
use crate::hypergraph::{Triangle, TriangleDecomposition};

pub const EXACT_DECOMPOSITION_BOUND: usize = 20;

/// Complete backtracking search: the smallest uncovered edge is covered by
/// each available triangle in turn. `None` iff no decomposition exists.
pub fn exact_triangle_decomposition(g: &SimpleGraph) -> Result<Option<TriangleDecomposition>> {
    exact_triangle_decomposition_bounded(g, EXACT_DECOMPOSITION_BOUND, None)
}

/// As [`exact_triangle_decomposition`], with a vertex bound and an optional
/// cap on search nodes (exceeding it is reported as too-large).
pub fn exact_triangle_decomposition_bounded(
    g: &SimpleGraph,
    max_vertices: usize,
    max_nodes: Option<u64>,
) -> Result<Option<TriangleDecomposition>> {
    if g.n() > max_vertices {
        return Err(Error::TooLarge(format!(
            "exact decomposition is limited to {max_vertices} vertices, got {}",
            g.n()
        )));
    }
    if !g.is_tridivisible() {
        return Ok(None);
    }
    struct Search {
        nodes: u64,
        cap: Option<u64>,
        out: Vec<Triangle>,
    }
    fn go(g: &mut SimpleGraph, s: &mut Search) -> Result<bool> {
        s.nodes += 1;
        if s.cap.is_some_and(|c| s.nodes > c) {
            return Err(Error::TooLarge("search node cap reached".into()));
        }
        let n = g.n();
        let Some((u, v)) = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .find(|&(u, v)| g.has_edge(u, v))
        else {
            return Ok(true);
        };
        let ws: Vec<usize> = g.common_neighbors(u, v).filter(|&w| w > v).collect();
        for w in ws {
            let t = [u, v, w];
            g.remove_triangle(&t);
            s.out.push(t);
            if go(g, s)? {
                return Ok(true);
            }
            s.out.pop();
            g.add_triangle(&t);
        }
        Ok(false)
    }
    let mut work = g.clone();
    let mut s = Search {
        nodes: 0,
        cap: max_nodes,
        out: Vec::new(),
    };
    Ok(go(&mut work, &mut s)?.then(|| TriangleDecomposition::new(s.out)))
}
