//! Design-theory arithmetic and the Steiner-system auxiliary hypergraph.

use crate::error::{Error, Result};
use crate::hypergraph::{binomial, for_each_subset, k_subsets, Hypergraph, Matching, Vertex};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Parameters `(n, q, r, λ)` of a design: q-subsets of an n-set covering
/// every r-subset exactly λ times.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignParams {
    pub n: u64,
    pub q: u64,
    pub r: u64,
    pub lambda: u64,
}

impl DesignParams {
    pub fn new(n: u64, q: u64, r: u64, lambda: u64) -> Result<Self> {
        if n == 0 || q == 0 || r == 0 || lambda == 0 {
            return Err(Error::InvalidInput(
                "design parameters must be positive".into(),
            ));
        }
        if !(r <= q && q <= n) {
            return Err(Error::InvalidInput(format!(
                "need r <= q <= n, got (n, q, r) = ({n}, {q}, {r})"
            )));
        }
        Ok(DesignParams { n, q, r, lambda })
    }
}

/// `C(q−i, r−i)` divides `λ·C(n−i, r−i)` for every `0 <= i < r`.
pub fn design_divisibility(p: &DesignParams) -> bool {
    (0..p.r).all(|i| {
        let d = u128::from(binomial(p.q - i, p.r - i));
        let m = u128::from(p.lambda) * u128::from(binomial(p.n - i, p.r - i));
        m % d == 0
    })
}

fn binomial_f64(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0f64, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn ln_factorial(m: u64) -> f64 {
    (2..=m).map(|k| (k as f64).ln()).sum()
}

/// Natural log of the leading term `λ!^{−C(n,r)} ((λ/e)^{Q−1} N)^{λ C(n,r)/Q}`
/// of the design count, with `Q = C(q,r)` and `N = C(n−r, q−r)`. The `o(N)`
/// correction inside the power is dropped.
pub fn design_count_leading(p: &DesignParams) -> Result<f64> {
    if !design_divisibility(p) {
        return Err(Error::InvalidInstance(format!(
            "{p:?} fails the divisibility conditions"
        )));
    }
    let cnr = binomial_f64(p.n, p.r);
    let q = binomial_f64(p.q, p.r);
    let big_n = binomial_f64(p.n - p.r, p.q - p.r);
    let lambda = p.lambda as f64;
    let inner = (q - 1.0) * (lambda.ln() - 1.0) + big_n.ln();
    Ok(-cnr * ln_factorial(p.lambda) + lambda * cnr / q * inner)
}

/// The C(q,r)-uniform hypergraph whose vertices are the r-subsets of `0..n`
/// and whose edges are the families `C(Q, r)` for q-subsets Q.
#[derive(Clone, Debug)]
pub struct SteinerAuxiliary {
    pub hypergraph: Hypergraph,
    /// `r_subsets[i]` is the r-subset behind auxiliary vertex `i`.
    pub r_subsets: Vec<Vec<Vertex>>,
    pub params: DesignParams,
}

pub fn steiner_auxiliary(p: &DesignParams) -> Result<SteinerAuxiliary> {
    if p.lambda != 1 {
        return Err(Error::InvalidInput(
            "the auxiliary hypergraph needs λ = 1".into(),
        ));
    }
    if p.r >= p.q {
        return Err(Error::InvalidInput(
            "the auxiliary hypergraph needs r < q".into(),
        ));
    }
    let (n, q, r) = (p.n as usize, p.q as usize, p.r as usize);
    let r_subsets = k_subsets(n, r);
    let index: HashMap<&[Vertex], usize> = r_subsets
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_slice(), i))
        .collect();
    let mut edges = Vec::with_capacity(binomial(n as u64, q as u64) as usize);
    let mut sub = Vec::with_capacity(r);
    for_each_subset(n, q, |big| {
        let mut e = Vec::with_capacity(binomial(q as u64, r as u64) as usize);
        for_each_subset(q, r, |idx| {
            sub.clear();
            sub.extend(idx.iter().map(|&i| big[i]));
            e.push(index[sub.as_slice()]);
        });
        e.sort_unstable();
        edges.push(e);
    });
    edges.sort_unstable();
    let hypergraph = Hypergraph::from_sorted_unchecked(
        r_subsets.len(),
        binomial(q as u64, r as u64) as usize,
        edges,
    );
    Ok(SteinerAuxiliary {
        hypergraph,
        r_subsets,
        params: *p,
    })
}

impl SteinerAuxiliary {
    /// The q-subsets of `0..n` behind the edges of a matching.
    pub fn blocks(&self, m: &Matching) -> Vec<Vec<Vertex>> {
        let mut out: Vec<Vec<Vertex>> = m
            .edges()
            .iter()
            .map(|e| {
                let mut b: Vec<Vertex> = e
                    .iter()
                    .flat_map(|&i| self.r_subsets[i].iter().copied())
                    .collect();
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Inverse of [`blocks`](Self::blocks) for a family of q-subsets.
    pub fn matching_of_blocks(&self, blocks: &[Vec<Vertex>]) -> Result<Matching> {
        let index: HashMap<&[Vertex], usize> = self
            .r_subsets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i))
            .collect();
        let r = self.params.r as usize;
        let mut edges = Vec::new();
        for b in blocks {
            let mut b = b.clone();
            b.sort_unstable();
            if b.len() != self.params.q as usize {
                return Err(Error::InvalidInput(format!(
                    "block {b:?} has the wrong size"
                )));
            }
            let mut e = Vec::new();
            for_each_subset(b.len(), r, |idx| {
                let s: Vec<Vertex> = idx.iter().map(|&i| b[i]).collect();
                e.push(index[s.as_slice()]);
            });
            edges.push(e);
        }
        Ok(Matching::new(edges))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisibility_examples() {
        assert!(design_divisibility(&DesignParams::new(7, 3, 2, 1).unwrap()));
        assert!(!design_divisibility(
            &DesignParams::new(6, 3, 2, 1).unwrap()
        ));
        for (q, r) in [(3, 2), (5, 3), (4, 1)] {
            assert!(design_divisibility(&DesignParams::new(q, q, r, 1).unwrap()));
        }
        assert!(DesignParams::new(3, 4, 2, 1).is_err());
    }

    #[test]
    fn steiner_triple_divisibility_matches_mod_six() {
        for n in 3..=200u64 {
            let p = DesignParams::new(n, 3, 2, 1).unwrap();
            assert_eq!(design_divisibility(&p), n % 6 == 1 || n % 6 == 3, "n = {n}");
        }
    }

    #[test]
    fn leading_term_values() {
        let v = design_count_leading(&DesignParams::new(7, 3, 2, 1).unwrap()).unwrap();
        assert!((v - 7.0 * (5.0f64 / std::f64::consts::E.powi(2)).ln()).abs() < 1e-9);
        assert!((v + 2.734).abs() < 1e-3);
        let v = design_count_leading(&DesignParams::new(9, 3, 2, 1).unwrap()).unwrap();
        assert!((v - 12.0 * (7.0f64 / std::f64::consts::E.powi(2)).ln()).abs() < 1e-9);
        assert!((v + 0.649).abs() < 1e-3);
        // q = r: Q = 1, N = 1, so the term is exactly 1 for λ = 1.
        let v = design_count_leading(&DesignParams::new(9, 2, 2, 1).unwrap()).unwrap();
        assert_eq!(v, 0.0);
        // Q = 10, N = 1: ln = 1·(9·(−1) + 0) = −9.
        let v = design_count_leading(&DesignParams::new(5, 5, 2, 1).unwrap()).unwrap();
        assert!((v + 9.0).abs() < 1e-9);
        assert!(design_count_leading(&DesignParams::new(6, 3, 2, 1).unwrap()).is_err());
    }

    #[test]
    fn auxiliary_shapes() {
        let aux = steiner_auxiliary(&DesignParams::new(7, 3, 2, 1).unwrap()).unwrap();
        assert_eq!(aux.hypergraph.n(), 21);
        assert_eq!(aux.hypergraph.num_edges(), 35);
        assert_eq!(aux.hypergraph.r(), 3);
        let single = steiner_auxiliary(&DesignParams::new(5, 5, 2, 1).unwrap()).unwrap();
        assert_eq!(single.hypergraph.num_edges(), 1);
        assert_eq!(single.hypergraph.edges()[0].len(), 10);
        assert_eq!(single.hypergraph.n(), 10);
    }
}
