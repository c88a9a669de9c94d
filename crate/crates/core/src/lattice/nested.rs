use super::{Lattice, LatticePoint};
use crate::error::{Error, Result};
use crate::hnf::{hermite_normal_form, invariant_factors};
use crate::linalg;
use crate::scalar::{lit, Real};

/// Quotient tables are materialized up to this many cosets.
const MAX_TABLE_INDEX: usize = 1024;

/// A sublattice `coarse` of `fine` together with the finite Abelian group
/// `fine / coarse`.
///
/// Cosets are labelled `0..index` through a canonical residue box given by the
/// Hermite normal form of the coarse basis expressed in fine coordinates, so
/// labels are exact integer computations. Each label also owns a
/// representative point inside the Voronoi cell of `coarse`.
#[derive(Clone, Debug)]
pub struct NestedPair<T> {
    fine: Lattice<T>,
    coarse: Lattice<T>,
    relation: Vec<Vec<i64>>,
    residue: Vec<Vec<i64>>,
    index: usize,
    reps: Vec<LatticePoint<T>>,
    table: Option<Vec<u32>>,
}

impl<T: Real> NestedPair<T> {
    pub fn new(fine: Lattice<T>, coarse: Lattice<T>) -> Result<Self> {
        let n = fine.dimension();
        if coarse.dimension() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: coarse.dimension(),
            });
        }
        let mut relation = Vec::with_capacity(n);
        for g in coarse.generator() {
            let c = fine.coordinates(g);
            let mut row = Vec::with_capacity(n);
            for x in c {
                let r = x.round();
                if (x - r).abs() > T::int_tol() * (T::one() + r.abs()) {
                    return Err(Error::NotNested);
                }
                row.push(r.to_i64().ok_or(Error::NotNested)?);
            }
            relation.push(row);
        }
        let residue = hermite_normal_form(&relation).map_err(|_| Error::NotNested)?;
        let index: i64 = (0..n).map(|i| residue[i][i]).product();
        let index = usize::try_from(index).map_err(|_| Error::NotNested)?;
        let ratio = coarse.cell_volume() / fine.cell_volume();
        debug_assert!((ratio - lit::<T>(index as f64)).abs() <= lit::<T>(1e-6) * ratio);

        let mut pair = NestedPair {
            fine,
            coarse,
            relation,
            residue,
            index,
            reps: Vec::new(),
            table: None,
        };
        let mut reps = Vec::with_capacity(index);
        for label in 0..index {
            let b = pair.box_vector(label);
            let p = pair.fine.point(&b);
            let rep = pair.coarse.reduce(&p)?;
            let coeffs = pair
                .fine
                .integer_coordinates(&rep, lit(1e-6))
                .ok_or(Error::NotNested)?;
            debug_assert_eq!(pair.label_of_coeffs(&coeffs), label);
            reps.push(LatticePoint {
                point: pair.fine.point(&coeffs),
                coeffs,
            });
        }
        pair.reps = reps;
        if index <= MAX_TABLE_INDEX {
            let mut table = Vec::with_capacity(index * index);
            for a in 0..index {
                for b in 0..index {
                    table.push(pair.add_by_coeffs(a, b) as u32);
                }
            }
            pair.table = Some(table);
        }
        Ok(pair)
    }

    pub fn fine(&self) -> &Lattice<T> {
        &self.fine
    }

    pub fn coarse(&self) -> &Lattice<T> {
        &self.coarse
    }

    /// `M = |fine / coarse|`.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn dimension(&self) -> usize {
        self.fine.dimension()
    }

    /// Coarse basis in fine coordinates.
    pub fn relation(&self) -> &[Vec<i64>] {
        &self.relation
    }

    /// Coset representatives in the Voronoi cell of the coarse lattice,
    /// indexed by label.
    pub fn reps(&self) -> &[LatticePoint<T>] {
        &self.reps
    }

    pub fn rep(&self, label: usize) -> &LatticePoint<T> {
        &self.reps[label]
    }

    /// Residue-box vector of a label (mixed radix over the HNF diagonal).
    fn box_vector(&self, mut label: usize) -> Vec<i64> {
        let n = self.dimension();
        let mut b = vec![0i64; n];
        for (i, bi) in b.iter_mut().enumerate() {
            let d = self.residue[i][i] as usize;
            *bi = (label % d) as i64;
            label /= d;
        }
        b
    }

    /// Label of the coset containing the fine point with coefficients `c`.
    pub fn label_of_coeffs(&self, c: &[i64]) -> usize {
        let n = self.dimension();
        let mut v: Vec<i64> = c.to_vec();
        for i in 0..n {
            let d = self.residue[i][i];
            let q = v[i].div_euclid(d);
            if q != 0 {
                for j in i..n {
                    v[j] -= q * self.residue[i][j];
                }
            }
        }
        let mut label = 0usize;
        let mut radix = 1usize;
        for i in 0..n {
            label += v[i] as usize * radix;
            radix *= self.residue[i][i] as usize;
        }
        label
    }

    /// Label of the coset containing the fine-lattice point `x`.
    pub fn label(&self, x: &[T]) -> Result<usize> {
        let c = self
            .fine
            .integer_coordinates(x, lit(1e-6))
            .ok_or_else(|| Error::InvalidArgument("point is not in the fine lattice".into()))?;
        Ok(self.label_of_coeffs(&c))
    }

    fn add_by_coeffs(&self, a: usize, b: usize) -> usize {
        let s = linalg_add_i(&self.box_vector(a), &self.box_vector(b));
        self.label_of_coeffs(&s)
    }

    pub fn identity(&self) -> usize {
        0
    }

    /// Group operation on labels.
    pub fn add(&self, a: usize, b: usize) -> usize {
        match &self.table {
            Some(t) => t[a * self.index + b] as usize,
            None => self.add_by_coeffs(a, b),
        }
    }

    /// `k a` (negative `k` uses the inverse).
    pub fn mul(&self, k: i64, a: usize) -> usize {
        let v: Vec<i64> = self.box_vector(a).into_iter().map(|x| x * k).collect();
        self.label_of_coeffs(&v)
    }

    pub fn neg(&self, a: usize) -> usize {
        self.mul(-1, a)
    }

    /// Materialized `M x M` addition table, if `M` is small enough.
    pub fn add_table(&self) -> Option<&[u32]> {
        self.table.as_deref()
    }

    /// Order of the element `a`.
    pub fn order(&self, a: usize) -> usize {
        let mut acc = a;
        let mut k = 1;
        while acc != self.identity() {
            acc = self.add(acc, a);
            k += 1;
        }
        k
    }

    /// Whether some nonzero element has order dividing `|k|`; when this is
    /// `true` the secrecy precondition fails for gain `k`.
    pub fn order_divides(&self, k: i64) -> bool {
        let k = k.unsigned_abs() as usize;
        if k == 0 {
            return self.index > 1;
        }
        (0..self.index)
            .filter(|&a| a != self.identity())
            .any(|a| k % self.order(a) == 0)
    }

    /// Invariant factors of `fine / coarse` greater than one.
    pub fn elementary_divisors(&self) -> Vec<i64> {
        invariant_factors(&self.relation)
            .expect("relation matrix is non-singular")
            .into_iter()
            .filter(|&d| d > 1)
            .collect()
    }

    /// Number of elements of each order, sorted by order.
    pub fn order_statistics(&self) -> Vec<(usize, usize)> {
        let mut counts = std::collections::BTreeMap::new();
        for a in 0..self.index {
            *counts.entry(self.order(a)).or_insert(0usize) += 1;
        }
        counts.into_iter().collect()
    }

    /// The pair `(dual(coarse), dual(fine))`.
    pub fn dual_pair(&self) -> Result<NestedPair<T>> {
        NestedPair::new(self.coarse.fourier_dual()?, self.fine.fourier_dual()?)
    }

    /// Fine point `sum_i k_i * rep(labels_i)` (not reduced).
    pub fn combine_reps(&self, terms: &[(i64, usize)]) -> Vec<T> {
        let n = self.dimension();
        let mut c = vec![0i64; n];
        for &(k, l) in terms {
            for (ci, &r) in c.iter_mut().zip(&self.reps[l].coeffs) {
                *ci += k * r;
            }
        }
        self.fine.point(&c)
    }

    /// Squared norm of the largest representative (a lower bound on the
    /// squared covering radius of the coarse lattice).
    pub fn max_rep_norm(&self) -> T {
        self.reps
            .iter()
            .map(|r| linalg::norm2(&r.point).sqrt())
            .fold(T::zero(), T::max)
    }
}

fn linalg_add_i(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z5() -> NestedPair<f64> {
        NestedPair::new(
            Lattice::integer(1),
            Lattice::scaled_integer(1, 5.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn z_mod_5z() {
        let p = z5();
        assert_eq!(p.index(), 5);
        let mut reps: Vec<i64> = p.reps().iter().map(|r| r.coeffs[0]).collect();
        reps.sort();
        assert_eq!(reps, vec![-2, -1, 0, 1, 2]);
        // brute-force group check against Z_5
        let val = |l: usize| p.rep(l).coeffs[0].rem_euclid(5);
        for a in 0..5 {
            for b in 0..5 {
                assert_eq!(val(p.add(a, b)), (val(a) + val(b)) % 5);
            }
        }
        assert_eq!(p.rep(p.identity()).coeffs, vec![0]);
        for a in 0..5 {
            assert_eq!(p.add(a, p.neg(a)), p.identity());
        }
        assert_eq!(p.elementary_divisors(), vec![5]);
    }

    #[test]
    fn equal_lattices_trivial_group() {
        let p = NestedPair::new(Lattice::<f64>::integer(2), Lattice::integer(2)).unwrap();
        assert_eq!(p.index(), 1);
        assert_eq!(p.add(0, 0), 0);
        assert!(p.elementary_divisors().is_empty());
    }

    #[test]
    fn reversed_roles_not_nested() {
        let err = NestedPair::new(
            Lattice::<f64>::scaled_integer(1, 3.0).unwrap(),
            Lattice::integer(1),
        )
        .unwrap_err();
        assert_eq!(err, Error::NotNested);
    }

    #[test]
    fn group_axioms_non_cyclic() {
        // Z^2 / (2Z x 4Z) = Z2 x Z4
        let coarse = Lattice::<f64>::new(vec![vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let p = NestedPair::new(Lattice::integer(2), coarse).unwrap();
        assert_eq!(p.index(), 8);
        let m = p.index();
        for a in 0..m {
            assert_eq!(p.add(a, p.identity()), a);
            for b in 0..m {
                assert_eq!(p.add(a, b), p.add(b, a));
                for c in 0..m {
                    assert_eq!(p.add(p.add(a, b), c), p.add(a, p.add(b, c)));
                }
            }
        }
        assert_eq!(p.elementary_divisors(), vec![2, 4]);
        assert_eq!(p.order_statistics(), vec![(1, 1), (2, 3), (4, 4)]);
        // every rep is inside the coarse Voronoi cell
        for r in p.reps() {
            assert!(r.point[0].abs() <= 1.0 && r.point[1].abs() <= 2.0);
        }
    }

    #[test]
    fn quotient_duality() {
        let coarse = Lattice::<f64>::new(vec![vec![2.0, 1.0], vec![0.0, 6.0]]).unwrap();
        let fine = Lattice::<f64>::integer(2);
        let p = NestedPair::new(fine, coarse).unwrap();
        let d = p.dual_pair().unwrap();
        assert_eq!(p.index(), d.index());
        assert_eq!(p.elementary_divisors(), d.elementary_divisors());
        assert_eq!(p.order_statistics(), d.order_statistics());
    }

    #[test]
    fn order_condition_prime() {
        let p = z5();
        assert!(!p.order_divides(2));
        assert!(p.order_divides(5));
        assert!(p.order_divides(10));
        assert!(p.order_divides(-5));
    }
}
