//! Integer row reduction: Hermite normal form with an optional unimodular
//! transform, and exact membership / coefficient recovery.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Row-style Hermite normal form of the lattice spanned by some generators.
///
/// `basis` is in row echelon form with strictly increasing pivot columns,
/// positive pivots and entries above each pivot reduced into `[0, pivot)`.
#[derive(Clone, Debug)]
pub struct Hnf {
    pub basis: Vec<Vec<BigInt>>,
    pub pivots: Vec<usize>,
    /// `basis[k] = Σ_j transform[k][j] · generator[j]`, when tracked.
    pub transform: Option<Vec<Vec<BigInt>>>,
    pub dim: usize,
}

fn axpy(dst: &mut [BigInt], coef: &BigInt, src: &[BigInt]) {
    if coef.is_zero() {
        return;
    }
    for (d, s) in dst.iter_mut().zip(src) {
        if !s.is_zero() {
            *d += coef * s;
        }
    }
}

/// `(row_a, row_b) ← (s·a + t·b, u·a + v·b)` for a unimodular 2×2 matrix.
fn combine(a: &mut [BigInt], b: &mut [BigInt], s: &BigInt, t: &BigInt, u: &BigInt, v: &BigInt) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        if x.is_zero() && y.is_zero() {
            continue;
        }
        let nx = s * &*x + t * &*y;
        let ny = u * &*x + v * &*y;
        *x = nx;
        *y = ny;
    }
}

impl Hnf {
    pub fn from_rows(generators: &[Vec<i64>], dim: usize, track: bool) -> Hnf {
        let rows: Vec<Vec<BigInt>> = generators
            .iter()
            .map(|g| {
                assert_eq!(g.len(), dim, "generator dimension mismatch");
                g.iter().map(|&x| BigInt::from(x)).collect()
            })
            .collect();
        Hnf::from_big_rows(rows, dim, track)
    }

    pub fn from_big_rows(mut rows: Vec<Vec<BigInt>>, dim: usize, track: bool) -> Hnf {
        let m = rows.len();
        let mut trans: Option<Vec<Vec<BigInt>>> = if track {
            Some(
                (0..m)
                    .map(|i| {
                        let mut r = vec![BigInt::zero(); m];
                        r[i] = BigInt::one();
                        r
                    })
                    .collect(),
            )
        } else {
            None
        };
        let mut pivots = Vec::new();
        let mut top = 0usize;
        for col in 0..dim {
            if top == m {
                break;
            }
            for i in top + 1..m {
                if rows[i][col].is_zero() {
                    continue;
                }
                if rows[top][col].is_zero() {
                    rows.swap(top, i);
                    if let Some(t) = trans.as_mut() {
                        t.swap(top, i);
                    }
                    continue;
                }
                let a = rows[top][col].clone();
                let b = rows[i][col].clone();
                let e = a.extended_gcd(&b);
                let g = e.gcd;
                let (s, t) = (e.x, e.y);
                let u = -(&b / &g);
                let v = &a / &g;
                let (lo, hi) = rows.split_at_mut(i);
                combine(&mut lo[top], &mut hi[0], &s, &t, &u, &v);
                if let Some(tr) = trans.as_mut() {
                    let (lo, hi) = tr.split_at_mut(i);
                    combine(&mut lo[top], &mut hi[0], &s, &t, &u, &v);
                }
            }
            if rows[top][col].is_zero() {
                continue;
            }
            if rows[top][col].is_negative() {
                for x in rows[top].iter_mut() {
                    *x = -&*x;
                }
                if let Some(t) = trans.as_mut() {
                    for x in t[top].iter_mut() {
                        *x = -&*x;
                    }
                }
            }
            let p = rows[top][col].clone();
            for k in 0..top {
                let q = rows[k][col].div_floor(&p);
                if q.is_zero() {
                    continue;
                }
                let neg = -q;
                let (lo, hi) = rows.split_at_mut(top);
                axpy(&mut lo[k], &neg, &hi[0]);
                if let Some(t) = trans.as_mut() {
                    let (lo, hi) = t.split_at_mut(top);
                    axpy(&mut lo[k], &neg, &hi[0]);
                }
            }
            pivots.push(col);
            top += 1;
        }
        rows.truncate(top);
        if let Some(t) = trans.as_mut() {
            t.truncate(top);
        }
        Hnf {
            basis: rows,
            pivots,
            transform: trans,
            dim,
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Coefficients `c` with `Σ c_k basis[k] = v`, or `None` if `v` is not
    /// in the lattice.
    pub fn basis_coefficients(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(v.len(), self.dim);
        let mut res: Vec<BigInt> = v.to_vec();
        let mut coefs = Vec::with_capacity(self.rank());
        for (k, &p) in self.pivots.iter().enumerate() {
            if res[..p].iter().any(|x| !x.is_zero()) {
                return None;
            }
            let (q, r) = res[p].div_rem(&self.basis[k][p]);
            if !r.is_zero() {
                return None;
            }
            let neg = -&q;
            axpy(&mut res, &neg, &self.basis[k]);
            coefs.push(q);
        }
        if res.iter().any(|x| !x.is_zero()) {
            return None;
        }
        Some(coefs)
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.basis_coefficients(v).is_some()
    }

    /// Coefficients over the original generators (needs the transform).
    pub fn generator_coefficients(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        let t = self.transform.as_ref().expect("transform not tracked");
        let c = self.basis_coefficients(v)?;
        let m = t.first().map_or(0, |r| r.len());
        let mut x = vec![BigInt::zero(); m];
        for (ck, row) in c.iter().zip(t) {
            axpy(&mut x, ck, row);
        }
        Some(x)
    }

    /// Product of the pivots: the index of the lattice in `Z^dim` when it
    /// has full rank.
    pub fn determinant(&self) -> Option<BigInt> {
        if self.rank() < self.dim {
            return None;
        }
        Some(
            self.basis
                .iter()
                .zip(&self.pivots)
                .map(|(r, &p)| r[p].clone())
                .product(),
        )
    }
}

pub fn to_big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(h: &Hnf) -> Vec<Vec<i64>> {
        h.basis
            .iter()
            .map(|r| r.iter().map(|x| i64::try_from(x).unwrap()).collect())
            .collect()
    }

    #[test]
    fn reduces_to_canonical_form() {
        let h = Hnf::from_rows(&[vec![1, 2], vec![3, 4]], 2, false);
        assert_eq!(small(&h), vec![vec![1, 0], vec![0, 2]]);
        let h = Hnf::from_rows(&[vec![2, 0], vec![0, 2]], 2, false);
        assert_eq!(small(&h), vec![vec![2, 0], vec![0, 2]]);
        let h = Hnf::from_rows(&[vec![0, 3], vec![2, 1]], 2, false);
        assert_eq!(small(&h), vec![vec![2, 1], vec![0, 3]]);
        assert_eq!(h.determinant(), Some(BigInt::from(6)));
    }

    #[test]
    fn transform_recovers_generator_combination() {
        let gens = vec![vec![4, 6, 0], vec![6, 9, 3], vec![2, 1, 1], vec![0, 0, 5]];
        let h = Hnf::from_rows(&gens, 3, true);
        let target = to_big(&[10, 13, 20]);
        let x = h.generator_coefficients(&target).expect("in lattice");
        let mut sum = vec![BigInt::zero(); 3];
        for (c, g) in x.iter().zip(&gens) {
            axpy(&mut sum, c, &to_big(g));
        }
        assert_eq!(sum, target);
    }

    #[test]
    fn rank_deficient_membership() {
        let h = Hnf::from_rows(&[vec![1, 1, 0], vec![2, 2, 0]], 3, false);
        assert_eq!(h.rank(), 1);
        assert!(h.contains(&to_big(&[3, 3, 0])));
        assert!(!h.contains(&to_big(&[3, 2, 0])));
        assert!(h.determinant().is_none());
    }
}
