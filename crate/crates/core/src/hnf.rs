//! Integer Hermite and Smith normal forms for small matrices.

use crate::error::{Error, Result};

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

/// Row-style Hermite normal form of an integer matrix with full column rank.
///
/// The rows of the input span a rank-`n` sublattice of `Z^n`; the result is
/// the `n x n` upper-triangular basis of that same row lattice whose pivots
/// are positive and whose entries above each pivot lie in `[0, pivot)`.
pub fn hermite_normal_form(rows: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let n = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("ragged integer matrix".into()));
    }
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let m = a.len();
    if m < n {
        return Err(Error::InvalidArgument("matrix does not have full column rank".into()));
    }
    for col in 0..n {
        // Euclid on the column below the current pivot row.
        loop {
            let pick = (col..m)
                .filter(|&r| a[r][col] != 0)
                .min_by_key(|&r| a[r][col].abs());
            let Some(p) = pick else {
                return Err(Error::InvalidArgument(
                    "matrix does not have full column rank".into(),
                ));
            };
            a.swap(col, p);
            let pivot = a[col][col];
            let mut done = true;
            for r in col + 1..m {
                if a[r][col] != 0 {
                    let f = floor_div(a[r][col], pivot);
                    let prow = a[col].clone();
                    for (x, y) in a[r].iter_mut().zip(&prow) {
                        *x -= f * y;
                    }
                    if a[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if a[col][col] < 0 {
            for x in a[col].iter_mut() {
                *x = -*x;
            }
        }
        let pivot = a[col][col];
        let prow = a[col].clone();
        for r in 0..col {
            let f = floor_div(a[r][col], pivot);
            if f != 0 {
                for (x, y) in a[r].iter_mut().zip(&prow) {
                    *x -= f * y;
                }
            }
        }
    }
    a.truncate(n);
    a.into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| {
                    i64::try_from(x)
                        .map_err(|_| Error::InvalidArgument("HNF entry overflow".into()))
                })
                .collect()
        })
        .collect()
}

/// Invariant factors `d_1 | d_2 | ... | d_n` of a non-singular square integer
/// matrix (its Smith normal form diagonal).
pub fn invariant_factors(matrix: &[Vec<i64>]) -> Result<Vec<i64>> {
    let n = matrix.len();
    let mut a: Vec<Vec<i128>> = matrix
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    for t in 0..n {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return Err(Error::InvalidArgument("singular integer matrix".into()));
            };
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..n {
                let f = floor_div(a[i][t], p);
                if f != 0 {
                    for j in t..n {
                        a[i][j] -= f * a[t][j];
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let f = floor_div(a[t][j], p);
                if f != 0 {
                    for i in t..n {
                        a[i][j] -= f * a[i][t];
                    }
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: fold any entry not divisible by the pivot into row t
            let mut fixed = true;
            'outer: for i in t + 1..n {
                for j in t + 1..n {
                    if a[i][j] % p != 0 {
                        for k in t..n {
                            a[t][k] += a[i][k];
                        }
                        fixed = false;
                        break 'outer;
                    }
                }
            }
            if fixed {
                break;
            }
        }
    }
    let mut d: Vec<i64> = (0..n).map(|i| a[i][i].abs() as i64).collect();
    d.sort_unstable();
    Ok(d)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended Euclid: returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b) >= 0`.
pub fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_a_stack() {
        let rows = vec![vec![1, 2], vec![5, 0], vec![0, 5]];
        let h = hermite_normal_form(&rows).unwrap();
        assert_eq!(h, vec![vec![1, 2], vec![0, 5]]);
    }

    #[test]
    fn hnf_of_negative_pivots() {
        let rows = vec![vec![-3, 1], vec![0, -2]];
        let h = hermite_normal_form(&rows).unwrap();
        assert!(h[0][0] > 0 && h[1][1] > 0 && h[1][0] == 0);
        assert_eq!(h[0][0] * h[1][1], 6);
        assert!(h[0][1] >= 0 && h[0][1] < h[1][1]);
    }

    #[test]
    fn rank_deficient_rejected() {
        assert!(hermite_normal_form(&[vec![1, 2], vec![2, 4]]).is_err());
    }

    #[test]
    fn smith_invariants() {
        assert_eq!(invariant_factors(&[vec![2, 0], vec![0, 3]]).unwrap(), vec![1, 6]);
        assert_eq!(invariant_factors(&[vec![2, 4], vec![6, 8]]).unwrap(), vec![2, 4]);
        assert_eq!(invariant_factors(&[vec![5]]).unwrap(), vec![5]);
    }

    #[test]
    fn bezout() {
        for (a, b) in [(2, 3), (3, 5), (7, -4), (-6, 35), (1, 7)] {
            let (g, x, y) = extended_gcd(a, b);
            assert_eq!(g, gcd(a, b));
            assert_eq!(a * x + b * y, g);
        }
    }
}
