//! Exact rational feasibility LP: find `x >= 0` with `A x = b`.
//!
//! Phase one of the simplex method over `BigRational`, pivoting by Bland's
//! rule (smallest eligible column, ties in the ratio test to the smallest
//! basic variable), so it terminates and is deterministic.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

#[derive(Clone, Debug, Default)]
pub struct LpOptions {
    /// Cooperative cancellation, polled once per pivot.
    pub cancel: Option<Arc<AtomicBool>>,
    /// Hard cap on pivots; `None` means unbounded (Bland's rule terminates).
    pub max_pivots: Option<usize>,
    /// Skip the uniform-solution shortcut for row-regular 0/1 systems.
    pub no_shortcut: bool,
}

impl LpOptions {
    fn cancelled(&self) -> bool {
        self.cancel
            .as_ref()
            .is_some_and(|c| c.load(Ordering::Relaxed))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Feasible(Vec<BigRational>),
    Infeasible,
}

/// A sparse row: `(column, coefficient)` pairs.
pub type SparseRow = Vec<(usize, i64)>;

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// All-ones rows with right-hand side 1 and the same support size `t` in
/// every row admit the uniform point `1/t`.
fn uniform_shortcut(
    rows: &[SparseRow],
    rhs: &[BigRational],
    ncols: usize,
) -> Option<Vec<BigRational>> {
    let t = rows.first()?.len();
    if t == 0 || !rhs.iter().all(|b| b.is_one()) {
        return None;
    }
    if !rows
        .iter()
        .all(|r| r.len() == t && r.iter().all(|&(_, a)| a == 1))
    {
        return None;
    }
    let mut used = vec![false; ncols];
    for r in rows {
        for &(j, _) in r {
            used[j] = true;
        }
    }
    let w = BigRational::new(BigInt::one(), BigInt::from(t));
    Some(
        used.into_iter()
            .map(|u| if u { w.clone() } else { BigRational::zero() })
            .collect(),
    )
}

/// Solves `A x = b, x >= 0` exactly. `rhs` must be non-negative.
pub fn solve_feasibility(
    rows: &[SparseRow],
    rhs: &[BigRational],
    ncols: usize,
    opts: &LpOptions,
) -> Result<LpOutcome> {
    assert_eq!(rows.len(), rhs.len());
    if rhs.iter().any(|b| b.is_negative()) {
        return Err(Error::InvalidInput(
            "right-hand side must be non-negative".into(),
        ));
    }
    if !opts.no_shortcut {
        if let Some(x) = uniform_shortcut(rows, rhs, ncols) {
            debug_assert!(check(rows, rhs, &x));
            return Ok(LpOutcome::Feasible(x));
        }
    }
    let m = rows.len();
    // Dense tableau [A | b]; artificial columns are implicit (the basis
    // starts with artificial i in row i, and they never re-enter).
    let mut tab: Vec<Vec<BigRational>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = vec![BigRational::zero(); ncols + 1];
            for &(j, a) in r {
                row[j] += rat(a);
            }
            row[ncols] = b.clone();
            row
        })
        .collect();
    // Basic variable per row; artificials are ncols + i.
    let mut basis: Vec<usize> = (ncols..ncols + m).collect();
    // Reduced costs of the phase-one objective (sum of artificials).
    let mut cost = vec![BigRational::zero(); ncols + 1];
    for row in &tab {
        for (c, a) in cost.iter_mut().zip(row) {
            if !a.is_zero() {
                *c -= a;
            }
        }
    }
    let mut pivots = 0usize;
    loop {
        if opts.cancelled() {
            return Err(Error::Cancelled);
        }
        if opts.max_pivots.is_some_and(|cap| pivots >= cap) {
            return Err(Error::failed("lp", format!("pivot cap {pivots} reached")));
        }
        let Some(enter) = (0..ncols).find(|&j| cost[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for (i, row) in tab.iter().enumerate() {
            let a = &row[enter];
            if !a.is_positive() {
                continue;
            }
            let ratio = &row[ncols] / a;
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((pr, _)) = leave else {
            // Unbounded direction cannot occur in phase one: the objective
            // is bounded below by zero.
            return Err(Error::ImpossibleState(
                "unbounded phase-one objective".into(),
            ));
        };
        let piv = tab[pr][enter].clone();
        for x in tab[pr].iter_mut() {
            if !x.is_zero() {
                *x /= &piv;
            }
        }
        let prow = tab[pr].clone();
        let nz: Vec<usize> = (0..=ncols).filter(|&j| !prow[j].is_zero()).collect();
        for (i, row) in tab.iter_mut().enumerate() {
            if i == pr || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for &j in &nz {
                row[j] -= &f * &prow[j];
            }
        }
        if !cost[enter].is_zero() {
            let f = cost[enter].clone();
            for &j in &nz {
                cost[j] -= &f * &prow[j];
            }
        }
        basis[pr] = enter;
        pivots += 1;
    }
    // Objective value is -cost[ncols].
    if !cost[ncols].is_zero() {
        return Ok(LpOutcome::Infeasible);
    }
    let mut x = vec![BigRational::zero(); ncols];
    for (i, &b) in basis.iter().enumerate() {
        if b < ncols {
            x[b] = tab[i][ncols].clone();
        }
    }
    if !check(rows, rhs, &x) {
        return Err(Error::ImpossibleState(
            "simplex returned a point violating A x = b".into(),
        ));
    }
    Ok(LpOutcome::Feasible(x))
}

/// Exact check of `A x = b, x >= 0`.
pub fn check(rows: &[SparseRow], rhs: &[BigRational], x: &[BigRational]) -> bool {
    x.iter().all(|v| !v.is_negative())
        && rows.iter().zip(rhs).all(|(r, b)| {
            let s: BigRational = r.iter().map(|&(j, a)| rat(a) * &x[j]).sum();
            s == *b
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(m: usize) -> Vec<BigRational> {
        vec![BigRational::one(); m]
    }

    #[test]
    fn small_feasible_system() {
        // x0 + x1 = 1, x1 + x2 = 1, x0 + x2 = 1 -> all 1/2.
        let rows = vec![
            vec![(0, 1), (1, 1)],
            vec![(1, 1), (2, 1)],
            vec![(0, 1), (2, 1)],
        ];
        for no_shortcut in [false, true] {
            let opts = LpOptions {
                no_shortcut,
                ..Default::default()
            };
            let LpOutcome::Feasible(x) = solve_feasibility(&rows, &ones(3), 3, &opts).unwrap()
            else {
                panic!("feasible");
            };
            let half = BigRational::new(1.into(), 2.into());
            assert_eq!(x, vec![half.clone(), half.clone(), half]);
        }
    }

    #[test]
    fn detects_infeasibility() {
        // x0 = 1, x0 + x1 = 0 has no non-negative solution.
        let rows = vec![vec![(0, 1)], vec![(0, 1), (1, 1)]];
        let rhs = vec![BigRational::one(), BigRational::zero()];
        assert_eq!(
            solve_feasibility(&rows, &rhs, 2, &LpOptions::default()).unwrap(),
            LpOutcome::Infeasible
        );
        // An empty row with rhs 1.
        let rows = vec![vec![]];
        assert_eq!(
            solve_feasibility(&rows, &ones(1), 1, &LpOptions::default()).unwrap(),
            LpOutcome::Infeasible
        );
    }

    #[test]
    fn cancellation_is_observed() {
        let flag = Arc::new(AtomicBool::new(true));
        let opts = LpOptions {
            cancel: Some(flag),
            no_shortcut: true,
            ..Default::default()
        };
        let rows = vec![vec![(0, 1), (1, 1)]];
        assert!(matches!(
            solve_feasibility(&rows, &ones(1), 2, &opts),
            Err(Error::Cancelled)
        ));
    }

    #[test]
    fn degenerate_redundant_rows() {
        let rows = vec![
            vec![(0, 1), (1, 1)],
            vec![(0, 1), (1, 1)],
            vec![(0, 2), (1, 2)],
        ];
        let rhs = vec![rat(1), rat(1), rat(2)];
        let out = solve_feasibility(&rows, &rhs, 2, &LpOptions::default()).unwrap();
        assert!(matches!(out, LpOutcome::Feasible(ref x) if check(&rows, &rhs, x)));
    }
}
