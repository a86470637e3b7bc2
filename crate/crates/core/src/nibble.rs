//! Semi-random nibble and random greedy matching processes.

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Matching, Vertex};
use crate::rng::{rng, rng_from};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NibbleParams {
    /// Expected fraction of surviving vertices hit by a marked edge per round.
    pub bite: f64,
    /// Nibbling stops once at most this fraction of vertices is uncovered.
    pub stop_threshold: f64,
    pub seed: u64,
    pub max_rounds: usize,
}

impl Default for NibbleParams {
    fn default() -> Self {
        NibbleParams {
            bite: 0.1,
            stop_threshold: 0.0,
            seed: 0,
            max_rounds: 400,
        }
    }
}

impl NibbleParams {
    pub fn with_seed(seed: u64) -> Self {
        NibbleParams {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bite > 0.0 && self.bite < 1.0) {
            return Err(Error::InvalidInput(format!(
                "bite must lie in (0,1), got {}",
                self.bite
            )));
        }
        if !(0.0..1.0).contains(&self.stop_threshold) {
            return Err(Error::InvalidInput(format!(
                "stop threshold must lie in [0,1), got {}",
                self.stop_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStat {
    pub round: usize,
    pub surviving_vertices: usize,
    pub surviving_edges: usize,
    pub matched: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct NibbleOutcome {
    pub matching: Matching,
    /// Vertices left uncovered after the greedy finish.
    pub leave: Vec<Vertex>,
    pub rounds: Vec<RoundStat>,
    /// Edges added by the greedy finish.
    pub greedy_added: usize,
}

impl NibbleOutcome {
    pub fn leave_fraction(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.leave.len() as f64 / n as f64
        }
    }

    /// Round statistics as a JSON array.
    pub fn rounds_json(&self) -> String {
        serde_json::to_string(&self.rounds).expect("plain data")
    }
}

pub fn rodl_nibble(h: &Hypergraph, p: &NibbleParams) -> Result<NibbleOutcome> {
    rodl_nibble_weighted(h, None, p)
}

/// Nibble where an edge is marked with probability proportional to its
/// weight: `bite · w_e / D`, with `D` the mean weighted degree of the
/// surviving vertices. Uniform weights give `bite / (mean degree)`.
pub fn rodl_nibble_weighted(
    h: &Hypergraph,
    weights: Option<&[f64]>,
    p: &NibbleParams,
) -> Result<NibbleOutcome> {
    p.validate()?;
    if h.is_empty() {
        return Err(Error::InvalidInstance(
            "nibble needs at least one edge".into(),
        ));
    }
    if let Some(w) = weights {
        if w.len() != h.num_edges() || w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidInput(
                "one finite non-negative weight per edge".into(),
            ));
        }
    }
    let n = h.n();
    let edges = h.edges();
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);
    let mut alive = vec![true; n];
    let mut alive_count = n;
    let mut chosen: Vec<usize> = Vec::new();
    let mut stamp = vec![usize::MAX; n];
    let mut rounds = Vec::new();
    let mut surviving: Vec<usize> = (0..edges.len()).filter(|&i| weight(i) > 0.0).collect();
    let mut idle = 0;
    for round in 0..p.max_rounds {
        surviving.retain(|&i| edges[i].iter().all(|&v| alive[v]));
        if surviving.is_empty() || (alive_count as f64) <= p.stop_threshold * n as f64 {
            break;
        }
        let total_w: f64 = surviving.iter().map(|&i| weight(i)).sum();
        let mean_deg = total_w * h.r() as f64 / alive_count as f64;
        let mut r = rng_from(p.seed, "nibble-round", round as u64);
        let mut marked: Vec<usize> = surviving
            .iter()
            .copied()
            .filter(|&i| r.gen::<f64>() < (p.bite * weight(i) / mean_deg).min(1.0))
            .collect();
        marked.shuffle(&mut r);
        let before = chosen.len();
        for i in marked {
            let e = &edges[i];
            if e.iter().any(|&v| stamp[v] == round) {
                continue;
            }
            for &v in e {
                stamp[v] = round;
                alive[v] = false;
            }
            alive_count -= e.len();
            chosen.push(i);
        }
        rounds.push(RoundStat {
            round,
            surviving_vertices: alive_count,
            surviving_edges: surviving.len(),
            matched: chosen.len(),
        });
        if chosen.len() == before {
            idle += 1;
            if idle >= 50 {
                break;
            }
        } else {
            idle = 0;
        }
    }
    let before = chosen.len();
    for (i, e) in edges.iter().enumerate() {
        if weight(i) > 0.0 && e.iter().all(|&v| alive[v]) {
            for &v in e {
                alive[v] = false;
            }
            chosen.push(i);
        }
    }
    let greedy_added = chosen.len() - before;
    let matching = Matching::new(chosen.iter().map(|&i| edges[i].clone()).collect());
    assert!(matching.is_disjoint(), "nibble produced overlapping edges");
    let leave = (0..n).filter(|&v| alive[v]).collect();
    Ok(NibbleOutcome {
        matching,
        leave,
        rounds,
        greedy_added,
    })
}

/// Edges in a uniformly random order, each kept if disjoint from those
/// kept before: the random greedy process. The result is maximal.
pub fn random_greedy_matching(h: &Hypergraph, seed: u64) -> Result<Matching> {
    if h.is_empty() {
        return Err(Error::InvalidInstance(
            "random greedy needs at least one edge".into(),
        ));
    }
    let mut order: Vec<usize> = (0..h.num_edges()).collect();
    order.shuffle(&mut rng(seed));
    let mut used = vec![false; h.n()];
    let mut out = Vec::new();
    for i in order {
        let e = &h.edges()[i];
        if e.iter().all(|&v| !used[v]) {
            for &v in e {
                used[v] = true;
            }
            out.push(e.clone());
        }
    }
    Ok(Matching::new(out))
}

/// True if no edge of `h` is disjoint from `m`.
pub fn is_maximal(h: &Hypergraph, m: &Matching) -> bool {
    let covered = m.covered(h.n());
    h.edges().iter().all(|e| e.iter().any(|&v| covered[v]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::is_matching_in;

    #[test]
    fn matching_input_is_fully_covered() {
        let h = Hypergraph::new(6, 3, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let out = rodl_nibble(&h, &NibbleParams::with_seed(3)).unwrap();
        assert!(out.leave.is_empty());
        assert_eq!(out.matching.len(), 2);
    }

    #[test]
    fn complete_nine_is_perfect() {
        let h = Hypergraph::complete(9, 3);
        for seed in 0..20 {
            let out = rodl_nibble(&h, &NibbleParams::with_seed(seed)).unwrap();
            assert_eq!(out.matching.len(), 3);
            assert!(out.leave.is_empty());
        }
    }

    #[test]
    fn coverage_is_monotone_and_deterministic() {
        let h = Hypergraph::complete(12, 3);
        let a = rodl_nibble(&h, &NibbleParams::with_seed(9)).unwrap();
        let b = rodl_nibble(&h, &NibbleParams::with_seed(9)).unwrap();
        assert_eq!(a.matching, b.matching);
        assert!(a
            .rounds
            .windows(2)
            .all(|w| w[0].surviving_vertices >= w[1].surviving_vertices));
        assert!(is_matching_in(&h, &a.matching));
    }

    #[test]
    fn bad_params_are_rejected() {
        let h = Hypergraph::complete(6, 3);
        let p = NibbleParams {
            bite: 1.5,
            ..Default::default()
        };
        assert!(rodl_nibble(&h, &p).is_err());
        assert!(rodl_nibble(&Hypergraph::empty(6, 3), &NibbleParams::default()).is_err());
    }

    #[test]
    fn random_greedy_examples() {
        let one = Hypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(random_greedy_matching(&one, 1).unwrap().len(), 1);
        let path =
            Hypergraph::new(6, 3, vec![vec![0, 1, 2], vec![2, 3, 4], vec![3, 4, 5]]).unwrap();
        let k6 = Hypergraph::complete(6, 3);
        for seed in 0..50 {
            let m = random_greedy_matching(&path, seed).unwrap();
            assert!((1..=2).contains(&m.len()) && is_maximal(&path, &m));
            assert_eq!(random_greedy_matching(&k6, seed).unwrap().len(), 2);
        }
    }
}
