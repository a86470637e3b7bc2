//! The instance types shared by every pipeline.
//!
//! Vertices are dense ids `0..n`. Edges are stored with their vertices in
//! increasing order and the edge list itself is kept in lexicographic order,
//! which is the canonical order used for deterministic iteration and for the
//! JSON serialization.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub type Vertex = usize;
pub type Triangle = [Vertex; 3];

/// Sorted pair.
#[inline]
pub fn pair(a: Vertex, b: Vertex) -> (Vertex, Vertex) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Sorted triple.
#[inline]
pub fn triangle(a: Vertex, b: Vertex, c: Vertex) -> Triangle {
    let mut t = [a, b, c];
    t.sort_unstable();
    t
}

#[inline]
pub fn triangle_edges(t: &Triangle) -> [(Vertex, Vertex); 3] {
    [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])]
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// An r-uniform hypergraph on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Hypergraph {
    n: usize,
    r: usize,
    edges: Vec<Vec<Vertex>>,
}

#[derive(Deserialize)]
struct RawHypergraph {
    n: usize,
    r: usize,
    edges: Vec<Vec<Vertex>>,
}

impl<'de> Deserialize<'de> for Hypergraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawHypergraph::deserialize(d)?;
        Hypergraph::new(raw.n, raw.r, raw.edges).map_err(serde::de::Error::custom)
    }
}

impl Hypergraph {
    /// Validates and canonicalizes an edge list. Duplicate edges are rejected.
    pub fn new(n: usize, r: usize, edges: Vec<Vec<Vertex>>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidInstance("uniformity must be positive".into()));
        }
        let mut canon = Vec::with_capacity(edges.len());
        for mut e in edges {
            if e.len() != r {
                return Err(Error::InvalidInstance(format!(
                    "edge {e:?} has {} vertices, expected {r}",
                    e.len()
                )));
            }
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInstance(format!(
                    "edge {e:?} repeats a vertex"
                )));
            }
            if let Some(&v) = e.last() {
                if v >= n {
                    return Err(Error::InvalidInstance(format!(
                        "edge {e:?} leaves the vertex range 0..{n}"
                    )));
                }
            }
            canon.push(e);
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidInstance(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Hypergraph { n, r, edges: canon })
    }

    /// Edges already sorted, unique and in range.
    pub(crate) fn from_sorted_unchecked(n: usize, r: usize, edges: Vec<Vec<Vertex>>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        Hypergraph { n, r, edges }
    }

    pub fn empty(n: usize, r: usize) -> Self {
        Hypergraph {
            n,
            r,
            edges: Vec::new(),
        }
    }

    /// All r-subsets of `0..n`, in lexicographic order.
    pub fn complete(n: usize, r: usize) -> Self {
        let edges = k_subsets(n, r);
        Hypergraph { n, r, edges }
    }

    /// Keeps the edges of the complete r-graph accepted by `keep`.
    pub fn complete_filtered(n: usize, r: usize, mut keep: impl FnMut(&[Vertex]) -> bool) -> Self {
        let mut edges = Vec::new();
        for_each_subset(n, r, |s| {
            if keep(s) {
                edges.push(s.to_vec());
            }
        });
        Hypergraph { n, r, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn edges(&self) -> &[Vec<Vertex>] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains_edge(&self, e: &[Vertex]) -> bool {
        let mut key = e.to_vec();
        key.sort_unstable();
        self.edges.binary_search(&key).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg
    }

    /// For each vertex, the indices of the edges containing it.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            for &v in e {
                inc[v].push(i);
            }
        }
        inc
    }

    /// Sub-hypergraph of the edges accepted by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&[Vertex]) -> bool) -> Hypergraph {
        Hypergraph {
            n: self.n,
            r: self.r,
            edges: self.edges.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }

    /// Induced sub-hypergraph on `vertices`, relabelled to `0..vertices.len()`
    /// in the given order. Returns the relabelled hypergraph.
    pub fn induced(&self, vertices: &[Vertex]) -> Hypergraph {
        let mut map = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            map[v] = i;
        }
        let mut edges: Vec<Vec<Vertex>> = self
            .edges
            .iter()
            .filter(|e| e.iter().all(|&v| map[v] != usize::MAX))
            .map(|e| {
                let mut f: Vec<Vertex> = e.iter().map(|&v| map[v]).collect();
                f.sort_unstable();
                f
            })
            .collect();
        edges.sort_unstable();
        Hypergraph {
            n: vertices.len(),
            r: self.r,
            edges,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("hypergraph serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// A set of pairwise disjoint edges of some host hypergraph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Matching {
    edges: Vec<Vec<Vertex>>,
}

impl Matching {
    pub fn new(edges: Vec<Vec<Vertex>>) -> Self {
        let mut edges: Vec<Vec<Vertex>> = edges
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e
            })
            .collect();
        edges.sort_unstable();
        Matching { edges }
    }

    pub fn edges(&self) -> &[Vec<Vertex>] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn covered(&self, n: usize) -> Vec<bool> {
        let mut c = vec![false; n];
        for e in &self.edges {
            for &v in e {
                if v < n {
                    c[v] = true;
                }
            }
        }
        c
    }

    /// True when the edges are pairwise vertex-disjoint.
    pub fn is_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges.iter().flatten().all(|&v| seen.insert(v))
    }
}

/// A set of triangles, meant to be pairwise edge-disjoint.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct TriangleDecomposition {
    triangles: Vec<Triangle>,
}

impl TriangleDecomposition {
    pub fn new(triangles: impl IntoIterator<Item = Triangle>) -> Self {
        let mut triangles: Vec<Triangle> = triangles
            .into_iter()
            .map(|t| triangle(t[0], t[1], t[2]))
            .collect();
        triangles.sort_unstable();
        TriangleDecomposition { triangles }
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
struct MatchingFile {
    n: usize,
    r: usize,
    matching: Vec<Vec<Vertex>>,
}

#[derive(Serialize, Deserialize)]
struct TrianglesFile {
    n: usize,
    r: usize,
    triangles: Vec<Triangle>,
}

impl Matching {
    pub fn to_json(&self, n: usize, r: usize) -> String {
        serde_json::to_string(&MatchingFile {
            n,
            r,
            matching: self.edges.clone(),
        })
        .expect("matching serializes")
    }

    /// Returns `(n, r, matching)`.
    pub fn from_json(s: &str) -> Result<(usize, usize, Matching)> {
        let f: MatchingFile = serde_json::from_str(s)?;
        Ok((f.n, f.r, Matching::new(f.matching)))
    }
}

impl TriangleDecomposition {
    pub fn to_json(&self, n: usize) -> String {
        serde_json::to_string(&TrianglesFile {
            n,
            r: 3,
            triangles: self.triangles.clone(),
        })
        .expect("decomposition serializes")
    }

    /// Returns `(n, decomposition)`.
    pub fn from_json(s: &str) -> Result<(usize, TriangleDecomposition)> {
        let f: TrianglesFile = serde_json::from_str(s)?;
        if f.r != 3 {
            return Err(Error::InvalidInput(format!(
                "triangle certificate declares r = {}",
                f.r
            )));
        }
        Ok((f.n, TriangleDecomposition::new(f.triangles)))
    }
}

/// Calls `f` on every k-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[Vertex])) {
    if k > n {
        return;
    }
    if k == 0 {
        f(&[]);
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<Vertex>> {
    let mut out = Vec::with_capacity(binomial(n as u64, k as u64) as usize);
    for_each_subset(n, k, |s| out.push(s.to_vec()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalizes_and_validates() {
        let h = Hypergraph::new(6, 3, vec![vec![5, 4, 3], vec![2, 0, 1]]).unwrap();
        assert_eq!(h.edges(), &[vec![0, 1, 2], vec![3, 4, 5]]);
        assert!(Hypergraph::new(3, 3, vec![vec![0, 1, 3]]).is_err());
        assert!(Hypergraph::new(3, 3, vec![vec![0, 1, 1]]).is_err());
        assert!(Hypergraph::new(4, 3, vec![vec![0, 1]]).is_err());
        assert!(Hypergraph::new(4, 3, vec![vec![0, 1, 2], vec![2, 1, 0]]).is_err());
    }

    #[test]
    fn complete_counts() {
        assert_eq!(Hypergraph::complete(7, 3).num_edges(), 35);
        assert_eq!(Hypergraph::complete(5, 2).num_edges(), 10);
        assert_eq!(binomial(99, 3), 156_849);
    }

    #[test]
    fn json_is_canonical() {
        let h = Hypergraph::new(4, 2, vec![vec![3, 1], vec![1, 0]]).unwrap();
        assert_eq!(h.to_json(), r#"{"n":4,"r":2,"edges":[[0,1],[1,3]]}"#);
        let back = Hypergraph::from_json(r#"{"n":4,"r":2,"edges":[[3,1],[0,1]]}"#).unwrap();
        assert_eq!(back, h);
        let d = TriangleDecomposition::new([[2, 1, 0]]);
        assert_eq!(d.to_json(3), r#"{"n":3,"r":3,"triangles":[[0,1,2]]}"#);
        let m = Matching::new(vec![vec![5, 3, 4], vec![0, 1, 2]]);
        assert_eq!(
            m.to_json(6, 3),
            r#"{"n":6,"r":3,"matching":[[0,1,2],[3,4,5]]}"#
        );
    }
}
