//! Octahedra (`K_{2,2,2}`) and the edge-sum preserving flip between their
//! two triangle decompositions.

use crate::hypergraph::{pair, triangle, triangle_edges, Triangle, Vertex};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Integer weights on triangles; zero weights are never stored.
pub type TriangleWeights = BTreeMap<Triangle, i64>;

pub fn add_weight(w: &mut TriangleWeights, t: Triangle, delta: i64) {
    if delta == 0 {
        return;
    }
    let e = w.entry(t).or_insert(0);
    *e += delta;
    if *e == 0 {
        w.remove(&t);
    }
}

/// Signed weight on every edge touched by `w`.
pub fn edge_sums(w: &TriangleWeights) -> BTreeMap<(Vertex, Vertex), i64> {
    let mut sums = BTreeMap::new();
    for (t, &x) in w {
        for e in triangle_edges(t) {
            *sums.entry(e).or_insert(0) += x;
        }
    }
    sums.retain(|_, s| *s != 0);
    sums
}

/// Complete tripartite graph with parts `{a0,a1}`, `{b0,b1}`, `{c0,c1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Octahedron {
    pub parts: [[Vertex; 2]; 3],
}

impl Octahedron {
    /// `None` unless the six vertices are distinct.
    pub fn new(parts: [[Vertex; 2]; 3]) -> Option<Self> {
        let mut vs: Vec<Vertex> = parts.iter().flatten().copied().collect();
        vs.sort_unstable();
        vs.dedup();
        (vs.len() == 6).then_some(Octahedron { parts })
    }

    pub fn vertices(&self) -> [Vertex; 6] {
        let p = self.parts;
        [p[0][0], p[0][1], p[1][0], p[1][1], p[2][0], p[2][1]]
    }

    /// Triangle taking vertex `i`, `j`, `k` from the three parts.
    fn tri(&self, i: usize, j: usize, k: usize) -> Triangle {
        triangle(self.parts[0][i], self.parts[1][j], self.parts[2][k])
    }

    /// The two edge-disjoint 4-triangle decompositions. Group one holds the
    /// choices with an even number of second vertices.
    pub fn groups(&self) -> ([Triangle; 4], [Triangle; 4]) {
        (
            [
                self.tri(0, 0, 0),
                self.tri(0, 1, 1),
                self.tri(1, 0, 1),
                self.tri(1, 1, 0),
            ],
            [
                self.tri(0, 0, 1),
                self.tri(0, 1, 0),
                self.tri(1, 0, 0),
                self.tri(1, 1, 1),
            ],
        )
    }

    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::with_capacity(12);
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            for &u in &self.parts[x] {
                for &v in &self.parts[y] {
                    out.push(pair(u, v));
                }
            }
        }
        out
    }

    /// Which group holds `t`, if any.
    pub fn side_of(&self, t: &Triangle) -> Option<bool> {
        let (a, b) = self.groups();
        if a.contains(t) {
            Some(true)
        } else if b.contains(t) {
            Some(false)
        } else {
            None
        }
    }
}

/// Running tally of flips and of the edge-sum assertion made on each.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipStats {
    pub flips: u64,
    pub checks: u64,
    pub violations: u64,
}

impl FlipStats {
    pub fn absorb(&mut self, other: &FlipStats) {
        self.flips += other.flips;
        self.checks += other.checks;
        self.violations += other.violations;
    }
}

fn local_sums(w: &TriangleWeights, edges: &[(Vertex, Vertex)]) -> Vec<i64> {
    edges
        .iter()
        .map(|&(u, v)| {
            w.iter()
                .filter(|(t, _)| t.contains(&u) && t.contains(&v))
                .map(|(_, &x)| x)
                .sum()
        })
        .collect()
}

/// Adds `dir` to group one and `-dir` to group two, then checks that the
/// weight on each of the twelve octahedron edges is unchanged.
pub fn flip(w: &mut TriangleWeights, o: &Octahedron, dir: i64, stats: &mut FlipStats) {
    let edges = o.edges();
    let before = local_sums(w, &edges);
    let (a, b) = o.groups();
    for t in a {
        add_weight(w, t, dir);
    }
    for t in b {
        add_weight(w, t, -dir);
    }
    let after = local_sums(w, &edges);
    stats.flips += 1;
    stats.checks += 1;
    if before != after {
        stats.violations += 1;
    }
    assert_eq!(before, after, "octahedron flip changed an edge sum");
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oct() -> Octahedron {
        Octahedron::new([[1, 2], [3, 4], [5, 6]]).unwrap()
    }

    #[test]
    fn groups_match_hand_enumeration() {
        let (a, b) = oct().groups();
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        a.sort();
        b.sort();
        assert_eq!(a, vec![[1, 3, 5], [1, 4, 6], [2, 3, 6], [2, 4, 5]]);
        assert_eq!(b, vec![[1, 3, 6], [1, 4, 5], [2, 3, 5], [2, 4, 6]]);
        for e in oct().edges() {
            let on = |g: &[Triangle]| {
                g.iter()
                    .filter(|t| t.contains(&e.0) && t.contains(&e.1))
                    .count()
            };
            assert_eq!((on(&a), on(&b)), (1, 1));
        }
    }

    #[test]
    fn flip_is_edge_neutral_and_reversible() {
        let mut w = TriangleWeights::new();
        let mut stats = FlipStats::default();
        flip(&mut w, &oct(), 1, &mut stats);
        assert_eq!(w.len(), 8);
        assert!(edge_sums(&w).is_empty());
        flip(&mut w, &oct(), -1, &mut stats);
        assert!(w.is_empty());
        assert_eq!(
            stats,
            FlipStats {
                flips: 2,
                checks: 2,
                violations: 0
            }
        );
        assert!(Octahedron::new([[1, 2], [2, 3], [4, 5]]).is_none());
    }
}
