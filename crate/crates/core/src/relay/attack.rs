use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg;
use crate::scalar::{lit, Real};

/// Matching tolerance on `|h1 u + h2 v - w|`.
const MATCH: f64 = 1e-6;

/// Candidate transmitted pair, by lattice coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointPair {
    pub u: Vec<i64>,
    pub v: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum Eavesdrop {
    Unique { pair: PointPair },
    Ambiguous { candidates: Vec<PointPair> },
}

/// All `(u, v)` with coefficients in `[-bound, bound]^n` and
/// `|h1 u + h2 v - w| <= 1e-6`. With `h2 / h1` irrational the map
/// `(u, v) -> h1 u + h2 v` is injective, so the relay recovers both points.
pub fn eavesdrop_irrational<T: Real>(lattice: &Lattice<T>, h1: T, h2: T, w: &[T], bound: i64) -> Result<Eavesdrop> {
    if h1 == T::zero() || h2 == T::zero() {
        return Err(Error::ZeroGain);
    }
    if bound < 0 {
        return Err(Error::InvalidArgument("box bound must be nonnegative".into()));
    }
    let n = lattice.dimension();
    if w.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: w.len() });
    }
    let radius = lit::<T>(MATCH) / h2.abs();
    let side = (2 * bound + 1) as usize;
    let total = side.pow(n as u32);
    let mut candidates = Vec::new();
    let mut u = vec![0i64; n];
    for idx in 0..total {
        let mut rem = idx;
        for ui in u.iter_mut().rev() {
            *ui = (rem % side) as i64 - bound;
            rem /= side;
        }
        let rest = linalg::sub(w, &linalg::scaled(&lattice.point(&u), h1));
        let target = linalg::scaled(&rest, T::one() / h2);
        lattice.for_each_in_ball(&target, radius, |v, _| {
            if v.iter().all(|&k| k.abs() <= bound) {
                candidates.push(PointPair {
                    u: u.clone(),
                    v: v.to_vec(),
                });
            }
        })?;
    }
    Ok(if candidates.len() == 1 {
        Eavesdrop::Unique {
            pair: candidates.pop().expect("one candidate"),
        }
    } else {
        Eavesdrop::Ambiguous { candidates }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_gains_are_ambiguous() {
        let z = Lattice::<f64>::integer(1);
        match eavesdrop_irrational(&z, 2.0, 3.0, &[12.0], 10).unwrap() {
            Eavesdrop::Ambiguous { candidates } => {
                assert!(candidates.contains(&PointPair { u: vec![3], v: vec![2] }));
                assert!(candidates.contains(&PointPair { u: vec![0], v: vec![4] }));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_observation() {
        let z2 = Lattice::<f64>::integer(2);
        let r = eavesdrop_irrational(&z2, 1.0, std::f64::consts::PI, &[0.0, 0.0], 10).unwrap();
        assert_eq!(
            r,
            Eavesdrop::Unique {
                pair: PointPair { u: vec![0, 0], v: vec![0, 0] }
            }
        );
    }
}
