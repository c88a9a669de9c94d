use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hnf::gcd;
use crate::scalar::{exact, lit, ExactRatio, Real};

/// Default tolerance on `|h1/h2 - k1/k2|`.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default bound on `|k2|`.
pub const DEFAULT_MAX_DEN: i64 = 1_000_000;

/// `h1 = h k1`, `h2 = h k2` with co-prime integers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reduced<T> {
    pub h: T,
    pub k1: i64,
    pub k2: i64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reduction<T> {
    Reduced(Reduced<T>),
    Irreducible,
}

/// `W = h1 U + h2 V + Z` with `Z ~ N(0, noise_var I)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelModel<T> {
    pub h1: T,
    pub h2: T,
    pub noise_var: T,
    #[serde(default)]
    pub reduced: Option<Reduced<T>>,
}

impl<T: Real> ChannelModel<T> {
    /// Channel with gains reduced at the default tolerance; `reduced` is
    /// `None` for irrational ratios.
    pub fn new(h1: T, h2: T, noise_var: T) -> Result<Self> {
        let reduced = match reduce_gains(h1, h2, DEFAULT_MAX_DEN, lit(DEFAULT_TOL))? {
            Reduction::Reduced(r) => Some(r),
            Reduction::Irreducible => None,
        };
        Self::with_reduction(h1, h2, noise_var, reduced)
    }

    /// Integer gains `h = 1`.
    pub fn integer(k1: i64, k2: i64, noise_var: T) -> Result<Self> {
        Self::with_reduction(
            lit(k1 as f64),
            lit(k2 as f64),
            noise_var,
            Some(Reduced { h: T::one(), k1, k2 }),
        )
    }

    pub fn with_reduction(h1: T, h2: T, noise_var: T, reduced: Option<Reduced<T>>) -> Result<Self> {
        if h1 == T::zero() || h2 == T::zero() {
            return Err(Error::ZeroGain);
        }
        if !(noise_var >= T::zero()) || !h1.is_finite() || !h2.is_finite() || !noise_var.is_finite() {
            return Err(Error::InvalidArgument("gains and noise variance must be finite, noise_var >= 0".into()));
        }
        let ch = ChannelModel {
            h1,
            h2,
            noise_var,
            reduced,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = &self.reduced {
            if r.k1 == 0 || r.k2 == 0 || gcd(r.k1, r.k2) != 1 {
                return Err(Error::NotCoprime { k1: r.k1, k2: r.k2 });
            }
            // a ratio tolerance of `DEFAULT_TOL` moves each gain by at most
            // about `DEFAULT_TOL (|h1| + |h2|)`
            let tol = lit::<T>(4.0 * DEFAULT_TOL) * (self.h1.abs() + self.h2.abs()).max(T::one());
            let off1 = (r.h * lit(r.k1 as f64) - self.h1).abs();
            let off2 = (r.h * lit(r.k2 as f64) - self.h2).abs();
            if off1 > tol || off2 > tol {
                return Err(Error::InvalidArgument("reduction does not reproduce the gains".into()));
            }
        }
        Ok(())
    }

    pub fn with_noise(&self, noise_var: T) -> Result<Self> {
        Self::with_reduction(self.h1, self.h2, noise_var, self.reduced)
    }
}

/// Smallest-denominator `k1 / k2` (`k2 > 0`) with `|h1/h2 - k1/k2| <= tol`
/// and `k2 <= max_den`, found exactly in the Stern-Brocot tree of the
/// tolerance interval; `h` is the least-squares fit of `(h1, h2)` by
/// `h (k1, k2)`.
pub fn reduce_gains<T: Real>(h1: T, h2: T, max_den: i64, tol: T) -> Result<Reduction<T>> {
    if h1 == T::zero() || h2 == T::zero() {
        return Err(Error::ZeroGain);
    }
    let x = exact(h1 / h2).ok_or(Error::NonFinite)?;
    let t = exact(tol.abs()).ok_or(Error::NonFinite)?;
    let negative = x.is_negative();
    let x = x.abs();
    let lo = &x - &t;
    let hi = &x + &t;
    if !lo.is_positive() {
        return Ok(Reduction::Irreducible);
    }
    let q = simplest_in(&lo, &hi);
    let (num, den) = (q.numer().clone(), q.denom().clone());
    let (Some(k1), Some(k2)) = (num.to_i64(), den.to_i64()) else {
        return Ok(Reduction::Irreducible);
    };
    if k2 > max_den {
        return Ok(Reduction::Irreducible);
    }
    let k1 = if negative { -k1 } else { k1 };
    let (a, b) = (lit::<T>(k1 as f64), lit::<T>(k2 as f64));
    Ok(Reduction::Reduced(Reduced {
        h: (h1 * a + h2 * b) / (a * a + b * b),
        k1,
        k2,
    }))
}

/// Simplest rational in `[lo, hi]`, `0 < lo <= hi`.
fn simplest_in(lo: &ExactRatio, hi: &ExactRatio) -> ExactRatio {
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    let ceil = &fl + ExactRatio::one();
    if &ceil <= hi {
        return ceil;
    }
    let one = ExactRatio::one();
    let inner = simplest_in(&(&one / (hi - &fl)), &(&one / (lo - &fl)));
    fl + one / inner
}
