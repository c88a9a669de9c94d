use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{convolve, scaled_bounds, Grid};
use super::mass::{mixture, LatticeMass};
use crate::encoding::{coset_pmf, CosetPmf, Density};
use crate::error::{Error, Result};
use crate::hnf::gcd;
use crate::lattice::NestedPair;
use crate::scalar::{lit, Real};

/// Which law of `W = h1 U + h2 V` to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conditioning {
    /// `p_W`, messages uniform.
    None,
    /// `p_{W|x}`, `y` uniform.
    X(usize),
    /// `p_{W|x,y}`.
    XY(usize, usize),
}

/// Exact noiseless laws of the relay observation `W = h1 U + h2 V` for
/// uniform messages, on a common coefficient box of the fine lattice.
#[derive(Clone, Debug)]
pub struct WAnalysis<T> {
    h1: i64,
    h2: i64,
    pmfs: Vec<CosetPmf<T>>,
    conditionals: Vec<LatticeMass<T>>,
    marginal: LatticeMass<T>,
}

pub(crate) fn check_gains(h1: i64, h2: i64) -> Result<()> {
    if h1 == 0 || h2 == 0 {
        return Err(Error::ZeroGain);
    }
    if gcd(h1, h2) != 1 {
        return Err(Error::NotCoprime { k1: h1, k2: h2 });
    }
    Ok(())
}

/// Coset pmfs of `d` on every coset of `pair.coarse()` in `pair.fine()`,
/// indexed by label.
pub fn message_pmfs<T: Real>(pair: &NestedPair<T>, d: &Density<T>, tail: T) -> Result<Vec<CosetPmf<T>>> {
    (0..pair.index())
        .into_par_iter()
        .map(|x| coset_pmf(d, pair.coarse(), &pair.rep(x).point, tail))
        .collect()
}

/// Map from coarse coefficients of `W - (h1 x + h2 y)` to fine
/// coefficients.
struct Placement {
    offset: Vec<i64>,
    relation: Vec<Vec<i64>>,
}

impl Placement {
    fn new<T: Real>(pair: &NestedPair<T>, h1: i64, h2: i64, x: usize, y: usize) -> Self {
        let offset = pair
            .rep(x)
            .coeffs
            .iter()
            .zip(&pair.rep(y).coeffs)
            .map(|(&a, &b)| h1 * a + h2 * b)
            .collect();
        Placement {
            offset,
            relation: pair.relation().to_vec(),
        }
    }

    fn map_into(&self, c: &[i64], out: &mut [i64]) {
        out.copy_from_slice(&self.offset);
        for (ci, row) in c.iter().zip(&self.relation) {
            if *ci != 0 {
                for (o, r) in out.iter_mut().zip(row) {
                    *o += ci * r;
                }
            }
        }
    }

    /// Fine-coefficient bounding box of the image of a coarse box.
    fn image_box(&self, lo: &[i64], hi: &[i64]) -> (Vec<i64>, Vec<i64>) {
        let n = lo.len();
        let mut min = vec![i64::MAX; n];
        let mut max = vec![i64::MIN; n];
        let mut out = vec![0i64; n];
        for mask in 0..(1usize << n) {
            let corner: Vec<i64> = (0..n)
                .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                .collect();
            self.map_into(&corner, &mut out);
            for i in 0..n {
                min[i] = min[i].min(out[i]);
                max[i] = max[i].max(out[i]);
            }
        }
        (min, max)
    }

    fn scatter<T: Real>(&self, src: &Grid<T>, weight: T, dst: &mut Grid<T>) {
        let n = src.dimension();
        let mut c = src.origin.clone();
        let mut f = vec![0i64; n];
        for &p in &src.data {
            if p != T::zero() {
                self.map_into(&c, &mut f);
                let idx = dst.index_of(&f).expect("inside placement box");
                dst.data[idx] += weight * p;
            }
            // odometer over the source box, last axis fastest
            for i in (0..n).rev() {
                c[i] += 1;
                if c[i] < src.origin[i] + src.shape[i] as i64 {
                    break;
                }
                c[i] = src.origin[i];
            }
        }
    }
}

fn coarse_box<T: Real>(px: &CosetPmf<T>, py: &CosetPmf<T>, h1: i64, h2: i64) -> (Vec<i64>, Vec<i64>) {
    let (alo, ahi) = scaled_bounds(px, h1);
    let (blo, bhi) = scaled_bounds(py, h2);
    let lo = alo.iter().zip(&blo).map(|(p, q)| p + q).collect();
    let hi = ahi.iter().zip(&bhi).map(|(p, q)| p + q).collect();
    (lo, hi)
}

impl<T: Real> WAnalysis<T> {
    /// Computes `p_{W|x}` for every `x` and `p_W`, with coset pmfs truncated
    /// at `tail`.
    pub fn new(pair: &NestedPair<T>, d: &Density<T>, h1: i64, h2: i64, tail: T) -> Result<Self> {
        check_gains(h1, h2)?;
        let pmfs = message_pmfs(pair, d, tail)?;
        Self::from_pmfs(pair, pmfs, h1, h2)
    }

    pub fn from_pmfs(pair: &NestedPair<T>, pmfs: Vec<CosetPmf<T>>, h1: i64, h2: i64) -> Result<Self> {
        check_gains(h1, h2)?;
        let m = pair.index();
        if pmfs.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                got: pmfs.len(),
            });
        }
        let n = pair.dimension();
        let mut lo = vec![i64::MAX; n];
        let mut hi = vec![i64::MIN; n];
        for x in 0..m {
            for y in 0..m {
                let (a, b) = coarse_box(&pmfs[x], &pmfs[y], h1, h2);
                let (min, max) = Placement::new(pair, h1, h2, x, y).image_box(&a, &b);
                for i in 0..n {
                    lo[i] = lo[i].min(min[i]);
                    hi[i] = hi[i].max(max[i]);
                }
            }
        }
        let shape: Vec<usize> = (0..n).map(|i| (hi[i] - lo[i] + 1) as usize).collect();
        let weight = T::one() / lit(m as f64);
        let second: Vec<Grid<T>> = pmfs.iter().map(|p| Grid::from_pmf(p, h2)).collect();
        let conditionals: Vec<LatticeMass<T>> = (0..m)
            .into_par_iter()
            .map(|x| {
                let mut grid = Grid::zeros(lo.clone(), shape.clone());
                let mut err = T::zero();
                let a = Grid::from_pmf(&pmfs[x], h1);
                for (y, b) in second.iter().enumerate() {
                    let (c, round) = convolve(&a, b);
                    Placement::new(pair, h1, h2, x, y).scatter(&c, weight, &mut grid);
                    err += weight * (pair_error(&pmfs[x], &pmfs[y]) + round);
                }
                LatticeMass::new(pair.fine().clone(), grid, err)
            })
            .collect();
        let prior = vec![weight; m];
        let marginal = mixture(&prior, &conditionals)?;
        Ok(WAnalysis {
            h1,
            h2,
            pmfs,
            conditionals,
            marginal,
        })
    }

    pub fn gains(&self) -> (i64, i64) {
        (self.h1, self.h2)
    }

    pub fn pmfs(&self) -> &[CosetPmf<T>] {
        &self.pmfs
    }

    /// `p_{W|x}` indexed by label.
    pub fn conditionals(&self) -> &[LatticeMass<T>] {
        &self.conditionals
    }

    pub fn marginal(&self) -> &LatticeMass<T> {
        &self.marginal
    }

    /// Largest tail bound among the coset pmfs.
    pub fn max_tail(&self) -> T {
        self.pmfs.iter().map(|p| p.tail_bound()).fold(T::zero(), T::max)
    }
}

/// L1 distance between the truncated and exact `p_{W|x,y}`: each truncated
/// pmf is within `2 tau` of its exact law.
fn pair_error<T: Real>(px: &CosetPmf<T>, py: &CosetPmf<T>) -> T {
    lit::<T>(2.0) * (px.tail_bound() + py.tail_bound())
}

/// `p_{W|x,y}` alone.
fn joint<T: Real>(
    pair: &NestedPair<T>,
    (x, px): (usize, &CosetPmf<T>),
    (y, py): (usize, &CosetPmf<T>),
    h1: i64,
    h2: i64,
) -> LatticeMass<T> {
    let a = Grid::from_pmf(px, h1);
    let b = Grid::from_pmf(py, h2);
    let (c, round) = convolve(&a, &b);
    let place = Placement::new(pair, h1, h2, x, y);
    let (lo, hi) = place.image_box(&c.origin, &c.end());
    let shape = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
    let mut grid = Grid::zeros(lo, shape);
    place.scatter(&c, T::one(), &mut grid);
    LatticeMass::new(pair.fine().clone(), grid, pair_error(px, py) + round)
}

/// Law of `W = h1 U + h2 V` on the fine lattice of `pair`, where `U` and
/// `V` are coset-encoded with density `d` and truncation `tail`.
pub fn w_distribution<T: Real>(
    pair: &NestedPair<T>,
    d: &Density<T>,
    h1: i64,
    h2: i64,
    conditioning: Conditioning,
    tail: T,
) -> Result<LatticeMass<T>> {
    check_gains(h1, h2)?;
    let m = pair.index();
    let check = |l: usize| {
        if l < m {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("message label {l} out of range 0..{m}")))
        }
    };
    match conditioning {
        Conditioning::XY(x, y) => {
            check(x)?;
            check(y)?;
            let px = coset_pmf(d, pair.coarse(), &pair.rep(x).point, tail)?;
            let py = coset_pmf(d, pair.coarse(), &pair.rep(y).point, tail)?;
            Ok(joint(pair, (x, &px), (y, &py), h1, h2))
        }
        Conditioning::X(x) => {
            check(x)?;
            let a = WAnalysis::new(pair, d, h1, h2, tail)?;
            Ok(a.conditionals[x].clone())
        }
        Conditioning::None => Ok(WAnalysis::new(pair, d, h1, h2, tail)?.marginal),
    }
}
