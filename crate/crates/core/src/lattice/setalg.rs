//! Integer-multiple set algebra on a lattice: `{k1 u + k2 v} = L` for
//! co-prime `k1, k2`, and intersections of cosets of `k1 L` and `k2 L`.

use super::Lattice;
use crate::error::{Error, Result};
use crate::hnf::{extended_gcd, gcd};
use crate::linalg;
use crate::scalar::Real;

fn require_coprime(k1: i64, k2: i64) -> Result<(i64, i64)> {
    if k1 == 0 || k2 == 0 || gcd(k1, k2) != 1 {
        return Err(Error::NotCoprime { k1, k2 });
    }
    let (_, m, l) = extended_gcd(k1, k2);
    Ok((m, l))
}

/// Checks that every point of `lattice` within `radius` of the origin is
/// `k1 u + k2 v` for lattice points `u, v`.
///
/// Works coordinate-wise in the generator basis: for a coefficient `a` a
/// solution `k1 b + k2 c = a` is searched with `|b| <= |m a| + |k2|`, where
/// `k1 m + k2 l = 1` (Bezout).
pub fn combine_coprime_check<T: Real>(
    lattice: &Lattice<T>,
    k1: i64,
    k2: i64,
    radius: T,
) -> Result<bool> {
    let (m, _) = require_coprime(k1, k2)?;
    let zero = vec![T::zero(); lattice.dimension()];
    let mut all = true;
    lattice.for_each_in_ball(&zero, radius, |a, _| {
        if !all {
            return;
        }
        let mut u = Vec::with_capacity(a.len());
        let mut v = Vec::with_capacity(a.len());
        for &aj in a {
            let bound = (m * aj).abs() + k2.abs();
            let found = (0..=bound)
                .flat_map(|b| [b, -b])
                .find(|&b| (aj - k1 * b) % k2 == 0);
            match found {
                Some(b) => {
                    u.push(b);
                    v.push((aj - k1 * b) / k2);
                }
                None => {
                    all = false;
                    return;
                }
            }
        }
        // the decomposition must reproduce the point geometrically
        let lhs = linalg::add(
            &linalg::scaled(&lattice.point(&u), T::from_i64(k1).unwrap()),
            &linalg::scaled(&lattice.point(&v), T::from_i64(k2).unwrap()),
        );
        let target = lattice.point(a);
        let err = linalg::norm2(&linalg::sub(&lhs, &target)).sqrt();
        if err > T::int_tol() * (T::one() + linalg::norm2(&target).sqrt()) {
            all = false;
        }
    })?;
    Ok(all)
}

/// Result of intersecting `k1 L + w1` with `k2 L + w2`.
#[derive(Clone, Debug, PartialEq)]
pub enum CosetIntersection<T> {
    /// `w2 - w1` is not a lattice point.
    Empty { radius: T },
    /// The intersection is `k1 k2 L + shift`; `points` lists it on the window
    /// `|x| <= radius` and `verified` records that brute-force filtering of
    /// the window agrees with that description.
    Coset {
        shift: Vec<T>,
        modulus: i64,
        points: Vec<Vec<T>>,
        radius: T,
        verified: bool,
    },
}

pub fn coset_intersection<T: Real>(
    lattice: &Lattice<T>,
    k1: i64,
    k2: i64,
    w1: &[T],
    w2: &[T],
    radius: T,
) -> Result<CosetIntersection<T>> {
    let (m, _) = require_coprime(k1, k2)?;
    let diff = linalg::sub(w2, w1);
    let Some(a) = lattice.integer_coordinates(&diff, T::int_tol()) else {
        return Ok(CosetIntersection::Empty { radius });
    };
    let modulus = (k1 * k2).abs();
    // w = k1 (m w) + k2 (l w); the intersection is k1 k2 L + w1 + k1 m w
    let offset: Vec<i64> = a.iter().map(|&x| (k1 * m * x).rem_euclid(modulus)).collect();
    let shift = linalg::add(w1, &lattice.point(&offset));

    // window centred so that x = w1 + L(c) satisfies |x| <= radius
    let center: Vec<T> = w1.iter().map(|&x| -x).collect();
    let mut verified = true;
    let mut points = Vec::new();
    lattice.for_each_in_ball(&center, radius, |c, _| {
        let in_k1 = c.iter().all(|&x| x % k1 == 0);
        let in_k2 = c.iter().zip(&a).all(|(&x, &ai)| (x - ai) % k2 == 0);
        let in_claim = c.iter().zip(&offset).all(|(&x, &o)| (x - o) % modulus == 0);
        if (in_k1 && in_k2) != in_claim {
            verified = false;
        }
        if in_claim {
            points.push(linalg::add(w1, &lattice.point(c)));
        }
    })?;
    points.sort_by(|x, y| super::enumerate::cmp_points(x, y));
    Ok(CosetIntersection::Coset {
        shift,
        modulus,
        points,
        radius,
        verified,
    })
}
