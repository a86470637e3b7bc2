//! Latin squares and their tripartite 3-graphs.

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatinSquare {
    cells: Vec<Vec<usize>>,
}

impl LatinSquare {
    pub fn new(cells: Vec<Vec<usize>>) -> Result<Self> {
        let k = cells.len();
        for row in &cells {
            if row.len() != k {
                return Err(Error::InvalidInput("latin square must be k × k".into()));
            }
        }
        for i in 0..k {
            let mut row_seen = vec![false; k];
            let mut col_seen = vec![false; k];
            for j in 0..k {
                let (a, b) = (cells[i][j], cells[j][i]);
                if a >= k || b >= k || row_seen[a] || col_seen[b] {
                    return Err(Error::InvalidInput(format!(
                        "row or column {i} repeats a symbol or uses one outside 0..{k}"
                    )));
                }
                row_seen[a] = true;
                col_seen[b] = true;
            }
        }
        Ok(LatinSquare { cells })
    }

    /// `L[i][j] = (i + j) mod k`.
    pub fn cyclic(k: usize) -> Self {
        LatinSquare {
            cells: (0..k)
                .map(|i| (0..k).map(|j| (i + j) % k).collect())
                .collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, i: usize, j: usize) -> usize {
        self.cells[i][j]
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }
}

/// Rows are vertices `0..k`, columns `k..2k`, symbols `2k..3k`; every cell
/// `(i, j)` becomes the edge `{i, k + j, 2k + L[i][j]}`. Perfect matchings
/// are exactly the transversals.
pub fn latin_to_3graph(l: &LatinSquare) -> Hypergraph {
    let k = l.order();
    let edges = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| vec![i, k + j, 2 * k + l.cell(i, j)])
        .collect();
    Hypergraph::new(3 * k, 3, edges).expect("cells give distinct edges")
}

/// All Latin squares of order `k`, by row-wise backtracking. Feasible for
/// `k <= 5`.
pub fn all_latin_squares(k: usize) -> Vec<LatinSquare> {
    fn fill(
        k: usize,
        pos: usize,
        cells: &mut Vec<Vec<usize>>,
        rows: &mut [Vec<bool>],
        cols: &mut [Vec<bool>],
        out: &mut Vec<LatinSquare>,
    ) {
        if pos == k * k {
            out.push(LatinSquare {
                cells: cells.clone(),
            });
            return;
        }
        let (i, j) = (pos / k, pos % k);
        for s in 0..k {
            if rows[i][s] || cols[j][s] {
                continue;
            }
            rows[i][s] = true;
            cols[j][s] = true;
            cells[i][j] = s;
            fill(k, pos + 1, cells, rows, cols, out);
            rows[i][s] = false;
            cols[j][s] = false;
        }
    }
    let mut out = Vec::new();
    let mut cells = vec![vec![0; k]; k];
    let mut rows = vec![vec![false; k]; k];
    let mut cols = vec![vec![false; k]; k];
    fill(k, 0, &mut cells, &mut rows, &mut cols, &mut out);
    out
}

/// Transversals as column permutations `σ` (cell `(i, σ(i))`), found by
/// trying every permutation.
pub fn transversals(l: &LatinSquare) -> Vec<Vec<usize>> {
    fn go(
        l: &LatinSquare,
        i: usize,
        perm: &mut Vec<usize>,
        used_col: &mut [bool],
        used_sym: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let k = l.order();
        if i == k {
            out.push(perm.clone());
            return;
        }
        for j in 0..k {
            let s = l.cell(i, j);
            if used_col[j] || used_sym[s] {
                continue;
            }
            used_col[j] = true;
            used_sym[s] = true;
            perm.push(j);
            go(l, i + 1, perm, used_col, used_sym, out);
            perm.pop();
            used_col[j] = false;
            used_sym[s] = false;
        }
    }
    let k = l.order();
    let mut out = Vec::new();
    go(
        l,
        0,
        &mut Vec::new(),
        &mut vec![false; k],
        &mut vec![false; k],
        &mut out,
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(LatinSquare::new(vec![vec![0, 1], vec![1, 0]]).is_ok());
        assert!(LatinSquare::new(vec![vec![0, 1], vec![0, 1]]).is_err());
        assert!(LatinSquare::new(vec![vec![0, 2], vec![2, 0]]).is_err());
    }

    #[test]
    fn reduction_shapes() {
        let h = latin_to_3graph(&LatinSquare::cyclic(3));
        assert_eq!((h.n(), h.num_edges()), (9, 9));
        let h1 = latin_to_3graph(&LatinSquare::cyclic(1));
        assert_eq!(h1.edges(), &[vec![0, 1, 2]]);
    }

    #[test]
    fn counts_of_small_squares() {
        assert_eq!(all_latin_squares(1).len(), 1);
        assert_eq!(all_latin_squares(2).len(), 2);
        assert_eq!(all_latin_squares(3).len(), 12);
        assert_eq!(all_latin_squares(4).len(), 576);
        assert!(transversals(&LatinSquare::cyclic(2)).is_empty());
        assert_eq!(transversals(&LatinSquare::cyclic(3)).len(), 3);
    }
}
