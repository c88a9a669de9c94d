use std::io::Write;

use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::scalar::{lit, Accumulator, Real};

/// A value with a symmetric error bar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

/// A finitely supported mass on a lattice, stored densely over a box of
/// coefficient vectors. `error` bounds the L1 distance to the exact
/// (untruncated) mass it approximates.
#[derive(Clone, Debug)]
pub struct LatticeMass<T> {
    lattice: Lattice<T>,
    pub(crate) grid: Grid<T>,
    error: T,
}

impl<T: Real> LatticeMass<T> {
    pub(crate) fn new(lattice: Lattice<T>, grid: Grid<T>, error: T) -> Self {
        LatticeMass {
            lattice,
            grid,
            error,
        }
    }

    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    pub fn error(&self) -> T {
        self.error
    }

    pub fn total(&self) -> T {
        self.grid.total()
    }

    /// Mass at the lattice point with coefficients `c`.
    pub fn get(&self, c: &[i64]) -> T {
        self.grid.get(c)
    }

    /// Mass at the point `x`, which must lie in the lattice.
    pub fn at(&self, x: &[T]) -> Result<T> {
        let c = self
            .lattice
            .integer_coordinates(x, lit(1e-6))
            .ok_or_else(|| Error::InvalidArgument("point is not in the lattice".into()))?;
        Ok(self.get(&c))
    }

    /// Coefficient box `(lowest corner, highest corner)`.
    pub fn bounds(&self) -> (Vec<i64>, Vec<i64>) {
        (self.grid.origin.clone(), self.grid.end())
    }

    /// Nonzero entries as `(coefficients, mass)`.
    pub fn support(&self) -> impl Iterator<Item = (Vec<i64>, T)> + '_ {
        self.grid
            .data
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > T::zero())
            .map(move |(i, &p)| (self.grid.coords_of(i), p))
    }

    pub fn support_size(&self) -> usize {
        self.grid.data.iter().filter(|&&p| p > T::zero()).count()
    }

    /// Writes `x1,...,xn,probability` rows for the nonzero entries.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.lattice.dimension();
        let header: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
        writeln!(out, "{},probability", header.join(","))?;
        for (c, p) in self.support() {
            let cols: Vec<String> = self.lattice.point(&c).iter().map(|x| x.to_string()).collect();
            writeln!(out, "{},{}", cols.join(","), p)?;
        }
        Ok(())
    }
}

/// Re-embeds grids into their common bounding box.
fn align<T: Real>(grids: &[&Grid<T>]) -> Vec<Grid<T>> {
    let n = grids[0].dimension();
    let same = grids
        .iter()
        .all(|g| g.origin == grids[0].origin && g.shape == grids[0].shape);
    if same {
        return grids.iter().map(|&g| g.clone()).collect();
    }
    let lo: Vec<i64> = (0..n)
        .map(|i| grids.iter().map(|g| g.origin[i]).min().unwrap())
        .collect();
    let hi: Vec<i64> = (0..n)
        .map(|i| grids.iter().map(|g| g.end()[i]).max().unwrap())
        .collect();
    let shape: Vec<usize> = (0..n).map(|i| (hi[i] - lo[i] + 1) as usize).collect();
    grids
        .iter()
        .map(|g| {
            let mut out = Grid::zeros(lo.clone(), shape.clone());
            for (i, &p) in g.data.iter().enumerate() {
                if p != T::zero() {
                    let idx = out.index_of(&g.coords_of(i)).expect("inside union box");
                    out.data[idx] = p;
                }
            }
            out
        })
        .collect()
}

/// `sum_w |p(w) - q(w)|`.
pub fn variational_distance<T: Real>(p: &LatticeMass<T>, q: &LatticeMass<T>) -> T {
    if p.grid.origin == q.grid.origin && p.grid.shape == q.grid.shape {
        l1(&p.grid.data, &q.grid.data)
    } else {
        let v = align(&[&p.grid, &q.grid]);
        l1(&v[0].data, &v[1].data)
    }
}

fn l1<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = Accumulator::new();
    for (&x, &y) in a.iter().zip(b) {
        acc.add((x - y).abs());
    }
    acc.value()
}

/// `sum_x prior(x) p_x`.
pub fn mixture<T: Real>(prior: &[T], conditionals: &[LatticeMass<T>]) -> Result<LatticeMass<T>> {
    check_prior(prior, conditionals)?;
    let grids: Vec<&Grid<T>> = conditionals.iter().map(|c| &c.grid).collect();
    let aligned = align(&grids);
    let mut out = Grid::zeros(aligned[0].origin.clone(), aligned[0].shape.clone());
    let mut err = T::zero();
    for ((g, &w), c) in aligned.iter().zip(prior).zip(conditionals) {
        for (o, &p) in out.data.iter_mut().zip(&g.data) {
            *o += w * p;
        }
        err += w * c.error;
    }
    Ok(LatticeMass::new(conditionals[0].lattice.clone(), out, err))
}

fn check_prior<T: Real>(prior: &[T], conditionals: &[LatticeMass<T>]) -> Result<()> {
    if prior.len() != conditionals.len() || prior.is_empty() {
        return Err(Error::LengthMismatch {
            expected: conditionals.len(),
            got: prior.len(),
        });
    }
    if prior.iter().any(|&p| p < T::zero() || !p.is_finite()) {
        return Err(Error::InvalidArgument("prior must be nonnegative".into()));
    }
    Ok(())
}

/// Binary entropy in bits.
fn h2<T: Real>(p: T) -> T {
    if p <= T::zero() || p >= T::one() {
        return T::zero();
    }
    -(p * p.log2() + (T::one() - p) * (T::one() - p).log2())
}

/// Plug-in `I(X; W)` in bits for `X ~ prior` and `W | X = x ~ conditionals[x]`.
///
/// The error bar combines the truncation errors of the conditionals through
/// the Alicki-Fannes-Winter continuity bound on `H(X | W)`, with `delta`
/// the total-variation distance between the computed and exact joints.
pub fn mutual_information<T: Real>(prior: &[T], conditionals: &[LatticeMass<T>]) -> Result<Estimate<T>> {
    check_prior(prior, conditionals)?;
    let grids: Vec<&Grid<T>> = conditionals.iter().map(|c| &c.grid).collect();
    let aligned = align(&grids);
    let len = aligned[0].len();
    let mut marginal = vec![T::zero(); len];
    for (g, &w) in aligned.iter().zip(prior) {
        for (m, &p) in marginal.iter_mut().zip(&g.data) {
            *m += w * p;
        }
    }
    let mut acc = Accumulator::new();
    for (g, &w) in aligned.iter().zip(prior) {
        if w == T::zero() {
            continue;
        }
        for (&p, &m) in g.data.iter().zip(&marginal) {
            if p > T::zero() && m > T::zero() {
                acc.add(w * p * (p / m).log2());
            }
        }
    }
    let value = acc.value().max(T::zero());
    let mut delta = T::zero();
    for (c, &w) in conditionals.iter().zip(prior) {
        delta += w * c.error;
    }
    let delta = (delta / lit(2.0)).min(T::one());
    let support = prior.iter().filter(|&&p| p > T::zero()).count();
    let log_m = lit::<T>(support as f64).log2();
    let error = (delta * log_m + (T::one() + delta) * h2(delta / (T::one() + delta))).min(log_m.max(T::one()));
    Ok(Estimate { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mass(origin: i64, data: Vec<f64>) -> LatticeMass<f64> {
        let shape = vec![data.len()];
        LatticeMass::new(Lattice::integer(1), Grid { origin: vec![origin], shape, data }, 0.0)
    }

    #[test]
    fn identical_and_disjoint() {
        let p = mass(0, vec![0.25, 0.5, 0.25]);
        assert_eq!(variational_distance(&p, &p), 0.0);
        let q = mass(10, vec![1.0]);
        assert_eq!(variational_distance(&p, &q), 2.0);
        let i = mutual_information(&[0.5, 0.5], &[p.clone(), p.clone()]).unwrap();
        assert_eq!(i.value, 0.0);
        let j = mutual_information(&[0.5, 0.5], &[p, q]).unwrap();
        assert!((j.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn misaligned_boxes() {
        let p = mass(-1, vec![0.5, 0.5]);
        let q = mass(0, vec![0.5, 0.5]);
        assert!((variational_distance(&p, &q) - 1.0).abs() < 1e-15);
        let m = mixture(&[0.5, 0.5], &[p, q]).unwrap();
        assert_eq!(m.get(&[0]), 0.5);
        assert_eq!(m.get(&[-1]), 0.25);
    }

    #[test]
    fn error_bar_grows_with_truncation() {
        let mut p = mass(0, vec![0.5, 0.5]);
        let e0 = mutual_information(&[1.0], &[p.clone()]).unwrap().error;
        p.error = 1e-6;
        let e1 = mutual_information(&[1.0], &[p]).unwrap().error;
        assert_eq!(e0, 0.0);
        assert!(e1 > 0.0 && e1 < 1e-4);
    }
}
