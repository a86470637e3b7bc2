//! Adjacency-matrix graphs used by the triangle pipelines.

use crate::error::{Error, Result};
use crate::hypergraph::{pair, triangle, Hypergraph, Triangle, Vertex};

/// A simple undirected graph on `0..n` backed by a dense adjacency matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SimpleGraph {
    n: usize,
    adj: Vec<bool>,
    m: usize,
}

impl std::fmt::Debug for SimpleGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SimpleGraph")
            .field("n", &self.n)
            .field("edges", &self.edges())
            .finish()
    }
}

impl SimpleGraph {
    pub fn new(n: usize) -> Self {
        SimpleGraph {
            n,
            adj: vec![false; n * n],
            m: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = SimpleGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Self {
        let mut g = SimpleGraph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn from_hypergraph(h: &Hypergraph) -> Result<Self> {
        if h.r() != 2 {
            return Err(Error::InvalidInstance(format!(
                "expected a graph (r = 2), got r = {}",
                h.r()
            )));
        }
        Ok(SimpleGraph::from_edges(
            h.n(),
            h.edges().iter().map(|e| (e[0], e[1])),
        ))
    }

    pub fn to_hypergraph(&self) -> Hypergraph {
        Hypergraph::from_sorted_unchecked(
            self.n,
            2,
            self.edges().into_iter().map(|(u, v)| vec![u, v]).collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    #[inline]
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u != v && self.adj[u * self.n + v]
    }

    /// Returns false if the edge was already present or is a loop.
    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> bool {
        if u == v || self.adj[u * self.n + v] {
            return false;
        }
        self.adj[u * self.n + v] = true;
        self.adj[v * self.n + u] = true;
        self.m += 1;
        true
    }

    /// Returns false if the edge was absent.
    pub fn remove_edge(&mut self, u: Vertex, v: Vertex) -> bool {
        if u == v || !self.adj[u * self.n + v] {
            return false;
        }
        self.adj[u * self.n + v] = false;
        self.adj[v * self.n + u] = false;
        self.m -= 1;
        true
    }

    pub fn has_triangle(&self, t: &Triangle) -> bool {
        self.has_edge(t[0], t[1]) && self.has_edge(t[0], t[2]) && self.has_edge(t[1], t[2])
    }

    pub fn remove_triangle(&mut self, t: &Triangle) {
        self.remove_edge(t[0], t[1]);
        self.remove_edge(t[0], t[2]);
        self.remove_edge(t[1], t[2]);
    }

    pub fn add_triangle(&mut self, t: &Triangle) {
        self.add_edge(t[0], t[1]);
        self.add_edge(t[0], t[2]);
        self.add_edge(t[1], t[2]);
    }

    pub fn neighbors(&self, u: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        let row = &self.adj[u * self.n..(u + 1) * self.n];
        row.iter()
            .enumerate()
            .filter_map(|(v, &b)| if b { Some(v) } else { None })
    }

    pub fn degree(&self, u: Vertex) -> usize {
        self.adj[u * self.n..(u + 1) * self.n]
            .iter()
            .filter(|&&b| b)
            .count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|u| self.degree(u)).collect()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).min().unwrap_or(0)
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.adj[u * self.n + v] {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// All triangles in lexicographic order.
    pub fn triangles(&self) -> Vec<Triangle> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                if !self.has_edge(a, b) {
                    continue;
                }
                for c in b + 1..self.n {
                    if self.has_edge(a, c) && self.has_edge(b, c) {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }

    /// Third vertices `w` with `uw` and `vw` both present.
    pub fn common_neighbors(&self, u: Vertex, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.n).filter(move |&w| w != u && w != v && self.has_edge(u, w) && self.has_edge(v, w))
    }

    pub fn triangles_on_edge(&self, u: Vertex, v: Vertex) -> Vec<Triangle> {
        self.common_neighbors(u, v)
            .map(|w| triangle(u, v, w))
            .collect()
    }

    pub fn is_tridivisible(&self) -> bool {
        self.m % 3 == 0 && (0..self.n).all(|u| self.degree(u) % 2 == 0)
    }

    pub fn union_with(&mut self, other: &SimpleGraph) {
        for (u, v) in other.edges() {
            self.add_edge(u, v);
        }
    }

    pub fn difference(&self, other: &SimpleGraph) -> SimpleGraph {
        let mut g = self.clone();
        for (u, v) in other.edges() {
            g.remove_edge(u, v);
        }
        g
    }

    pub fn is_subgraph_of(&self, other: &SimpleGraph) -> bool {
        self.edges().into_iter().all(|(u, v)| other.has_edge(u, v))
    }

    /// Keeps only edges with both ends in `vertices` (vertex ids unchanged).
    pub fn restricted_to(&self, vertices: &[Vertex]) -> SimpleGraph {
        let mut inside = vec![false; self.n];
        for &v in vertices {
            inside[v] = true;
        }
        let mut g = SimpleGraph::new(self.n);
        for (u, v) in self.edges() {
            if inside[u] && inside[v] {
                g.add_edge(u, v);
            }
        }
        g
    }

    /// Graph formed by the edges of the given triangles (shared edges once).
    pub fn from_triangles<'a>(n: usize, ts: impl IntoIterator<Item = &'a Triangle>) -> SimpleGraph {
        let mut g = SimpleGraph::new(n);
        for t in ts {
            g.add_triangle(t);
        }
        g
    }

    pub fn edge_key(&self, u: Vertex, v: Vertex) -> (Vertex, Vertex) {
        pair(u, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_facts() {
        let k7 = SimpleGraph::complete(7);
        assert_eq!(k7.num_edges(), 21);
        assert_eq!(k7.triangles().len(), 35);
        assert!(k7.is_tridivisible());
        assert!(!SimpleGraph::complete(4).is_tridivisible());
        assert!(SimpleGraph::new(5).is_tridivisible());
        assert_eq!(k7.triangles_on_edge(0, 1).len(), 5);
    }

    #[test]
    fn round_trips_through_hypergraph() {
        let g = SimpleGraph::from_edges(5, [(0, 1), (3, 2), (4, 0)]);
        let h = g.to_hypergraph();
        assert_eq!(h.edges(), &[vec![0, 1], vec![0, 4], vec![2, 3]]);
        assert_eq!(SimpleGraph::from_hypergraph(&h).unwrap(), g);
        assert!(SimpleGraph::from_hypergraph(&Hypergraph::complete(4, 3)).is_err());
    }
}
