//! Full-rank lattices in `R^n`: construction, Fourier duals, exact closest
//! vector search, packing radii, nested pairs and the integer set algebra used
//! by the relay analysis.

mod enumerate;
pub mod io;
mod nested;
mod setalg;

pub use enumerate::LatticePoint;
pub use nested::NestedPair;
pub use setalg::{combine_coprime_check, coset_intersection, CosetIntersection};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::{lit, Real};

/// Largest dimension handled by the exact enumeration routines.
pub const MAX_EXACT_DIM: usize = 8;

/// A full-rank lattice given by the rows of its generator matrix.
#[derive(Clone, Debug)]
pub struct Lattice<T> {
    generator: Matrix<T>,
    inverse: Matrix<T>,
    cell_volume: T,
    // Gram-Schmidt data for enumeration
    gs_q: Matrix<T>,
    gs_r: Matrix<T>,
}

impl<T: Real> Lattice<T> {
    /// Validates a square generator (rows are basis vectors).
    pub fn new(generator: Matrix<T>) -> Result<Self> {
        let n = generator.len();
        if n == 0 || generator.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: generator.first().map_or(0, |r| r.len()),
            });
        }
        if generator.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let det = linalg::determinant(&generator);
        if det.abs() <= T::singular_tol() {
            return Err(Error::SingularGenerator {
                det: crate::scalar::to_f64(det.abs()),
            });
        }
        let inverse = linalg::inverse(&generator).ok_or(Error::SingularGenerator { det: 0.0 })?;
        let (gs_q, gs_r) = linalg::gram_schmidt(&generator);
        Ok(Lattice {
            generator,
            inverse,
            cell_volume: det.abs(),
            gs_q,
            gs_r,
        })
    }

    /// `Z^n`.
    pub fn integer(n: usize) -> Self {
        Self::new(linalg::identity(n)).expect("identity is non-singular")
    }

    /// `a Z^n`.
    pub fn scaled_integer(n: usize, a: T) -> Result<Self> {
        Self::new(linalg::scale(&linalg::identity(n), a))
    }

    pub fn dimension(&self) -> usize {
        self.generator.len()
    }

    pub fn generator(&self) -> &Matrix<T> {
        &self.generator
    }

    /// `|det generator|`, the volume of the fundamental Voronoi cell.
    pub fn cell_volume(&self) -> T {
        self.cell_volume
    }

    /// The same lattice scaled by `a`.
    pub fn scaled(&self, a: T) -> Result<Self> {
        Self::new(linalg::scale(&self.generator, a))
    }

    /// `{x : <x, y> in 2 pi Z for all y in this lattice}`.
    pub fn fourier_dual(&self) -> Result<Self> {
        let two_pi = lit::<T>(2.0) * T::PI();
        Self::new(linalg::scale(&linalg::transpose(&self.inverse), two_pi))
    }

    /// The point `sum_i coeffs[i] * generator[i]`.
    pub fn point(&self, coeffs: &[i64]) -> Vec<T> {
        let c: Vec<T> = coeffs.iter().map(|&k| lit::<T>(k as f64)).collect();
        linalg::row_times(&c, &self.generator)
    }

    /// Real coordinates of `x` in the generator basis.
    pub fn coordinates(&self, x: &[T]) -> Vec<T> {
        linalg::row_times(x, &self.inverse)
    }

    /// Integer coordinates of `x` if it is a lattice point (within `tol`).
    pub fn integer_coordinates(&self, x: &[T], tol: T) -> Option<Vec<i64>> {
        self.coordinates(x)
            .into_iter()
            .map(|c| {
                let r = c.round();
                ((c - r).abs() <= tol).then(|| r.to_i64().unwrap_or(i64::MAX))
            })
            .collect()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.integer_coordinates(x, T::int_tol()).is_some()
    }

    /// Length of a shortest nonzero vector.
    pub fn minimum_distance(&self) -> Result<T> {
        self.check_exact()?;
        let bound = self
            .generator
            .iter()
            .map(|g| linalg::norm2(g).sqrt())
            .fold(T::infinity(), T::min);
        let zero = vec![T::zero(); self.dimension()];
        let mut best = bound;
        let slack = lit::<T>(1.0 + 1e-9);
        self.for_each_in_ball(&zero, bound * slack, |coeffs, _| {
            if coeffs.iter().any(|&c| c != 0) {
                let len = linalg::norm2(&self.point(coeffs)).sqrt();
                if len < best {
                    best = len;
                }
            }
        })?;
        Ok(best)
    }

    /// Half the minimum distance.
    pub fn packing_radius(&self) -> Result<T> {
        Ok(self.minimum_distance()? / lit(2.0))
    }

    fn check_exact(&self) -> Result<()> {
        if self.dimension() > MAX_EXACT_DIM {
            Err(Error::DimensionTooLarge {
                dim: self.dimension(),
                max: MAX_EXACT_DIM,
            })
        } else {
            Ok(())
        }
    }

    fn check_len(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dimension() {
            Err(Error::LengthMismatch {
                expected: self.dimension(),
                got: x.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Whether both lattices have the same point set.
    pub fn same_points(&self, other: &Lattice<T>) -> bool {
        self.dimension() == other.dimension()
            && self.generator.iter().all(|g| other.contains(g))
            && other.generator.iter().all(|g| self.contains(g))
    }

    /// Fundamental-domain mass check: the nonzero dual vectors of length at
    /// most `radius`, used when testing support containment.
    pub(crate) fn nonzero_points_within(&self, radius: T) -> Result<Vec<Vec<T>>> {
        let zero = vec![T::zero(); self.dimension()];
        let mut out = Vec::new();
        self.for_each_in_ball(&zero, radius, |c, _| {
            if c.iter().any(|&k| k != 0) {
                out.push(self.point(c));
            }
        })?;
        Ok(out)
    }
}

/// Whether a closed axis-aligned cube `[-half, half]^n` lies strictly inside
/// the Voronoi region of `lattice` (scaled by `dilation`).
///
/// The region `dilation * V` is `{t : <t, l> < dilation * |l|^2 / 2}`; only
/// vectors with `|l| <= 2 * half * sqrt(n) / dilation` can constrain it.
pub(crate) fn cube_inside_voronoi<T: Real>(
    lattice: &Lattice<T>,
    half: T,
    dilation: T,
) -> Result<bool> {
    let n = lattice.dimension();
    let reach = lit::<T>(2.0) * half * lit::<T>(n as f64).sqrt() / dilation;
    let slack = lit::<T>(1.0 + 1e-9);
    for l in lattice.nonzero_points_within(reach * slack)? {
        let l1: T = l.iter().map(|x| x.abs()).sum();
        let l2 = linalg::norm2(&l);
        if half * l1 >= dilation * l2 / lit(2.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_z2() {
        let z2 = Lattice::<f64>::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(z2.cell_volume(), 1.0);
    }

    #[test]
    fn volume_of_skew_generator() {
        let l = Lattice::<f64>::new(vec![vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!((l.cell_volume() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_rejected() {
        let err = Lattice::<f64>::new(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap_err();
        assert!(matches!(err, Error::SingularGenerator { .. }));
    }

    #[test]
    fn non_square_and_non_finite() {
        assert!(matches!(
            Lattice::<f64>::new(vec![vec![1.0, 2.0]]),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            Lattice::<f64>::new(vec![vec![f64::NAN]]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn dual_of_integers() {
        let d = Lattice::<f64>::integer(3).fourier_dual().unwrap();
        let two_pi = Lattice::scaled_integer(3, 2.0 * std::f64::consts::PI).unwrap();
        assert!(d.same_points(&two_pi));
        let five = Lattice::<f64>::scaled_integer(1, 5.0).unwrap();
        let d5 = five.fourier_dual().unwrap();
        assert!((d5.generator()[0][0] - 2.0 * std::f64::consts::PI / 5.0).abs() < 1e-15);
    }

    #[test]
    fn dual_is_involution() {
        let l = Lattice::<f64>::new(vec![vec![1.3, 0.2], vec![-0.4, 0.9]]).unwrap();
        let dd = l.fourier_dual().unwrap().fourier_dual().unwrap();
        assert!(l.same_points(&dd));
    }

    #[test]
    fn packing_radii() {
        for n in 1..=4 {
            let z = Lattice::<f64>::integer(n);
            assert!((z.packing_radius().unwrap() - 0.5).abs() < 1e-12);
        }
        let d = Lattice::<f64>::scaled_integer(1, 5.0).unwrap().fourier_dual().unwrap();
        assert!((d.packing_radius().unwrap() - std::f64::consts::PI / 5.0).abs() < 1e-12);
    }

    #[test]
    fn packing_radius_skewed_basis() {
        // A long skewed basis of Z^2: shortest vector still has length 1.
        let l = Lattice::<f64>::new(vec![vec![1.0, 7.0], vec![1.0, 8.0]]).unwrap();
        assert!((l.packing_radius().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cube_containment() {
        let dual = Lattice::<f64>::scaled_integer(1, 5.0).unwrap().fourier_dual().unwrap();
        // V(2pi/5 Z) = (-pi/5, pi/5)
        assert!(cube_inside_voronoi(&dual, 0.6, 1.0).unwrap());
        assert!(!cube_inside_voronoi(&dual, 0.63, 1.0).unwrap());
        // 2V/(1+2): half-width 2*pi/5/3 ~ 0.419
        assert!(cube_inside_voronoi(&dual, 0.4, 2.0 / 3.0).unwrap());
        assert!(!cube_inside_voronoi(&dual, 0.42, 2.0 / 3.0).unwrap());
    }

    #[test]
    fn works_in_single_precision() {
        let l = Lattice::<f32>::new(vec![vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!((l.cell_volume() - 2.0).abs() < 1e-6);
        let p = l.closest_point(&[0.9, 1.2]).unwrap();
        assert_eq!(p.coeffs, vec![0, 1]);
    }
}
