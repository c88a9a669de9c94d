//! Depth-first sphere enumeration over the Gram-Schmidt tree.

use std::cmp::Ordering;

use super::Lattice;
use crate::error::Result;
use crate::linalg;
use crate::scalar::{lit, Real};

/// A lattice point together with its integer coefficient vector.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticePoint<T> {
    pub coeffs: Vec<i64>,
    pub point: Vec<T>,
}

struct Search<'a, T> {
    lattice: &'a Lattice<T>,
    y: Vec<T>,
    coeffs: Vec<i64>,
    partial: Vec<T>,
    bound: T,
}

impl<'a, T: Real> Search<'a, T> {
    fn new(lattice: &'a Lattice<T>, target: &[T], bound: T) -> Self {
        let n = lattice.dimension();
        let y = lattice.gs_q.iter().map(|q| linalg::dot(q, target)).collect();
        Search {
            lattice,
            y,
            coeffs: vec![0; n],
            partial: vec![T::zero(); n + 1],
            bound,
        }
    }

    /// Visits every coefficient vector whose squared distance (as measured on
    /// the Gram-Schmidt tree) is at most the current bound. The visitor may
    /// return a tighter bound.
    fn run<F: FnMut(&[i64], T) -> Option<T>>(&mut self, visit: &mut F) {
        let n = self.lattice.dimension();
        self.level(n - 1, visit);
    }

    fn level<F: FnMut(&[i64], T) -> Option<T>>(&mut self, i: usize, visit: &mut F) {
        let r = &self.lattice.gs_r;
        let n = self.coeffs.len();
        let mut s = self.y[i];
        for j in i + 1..n {
            s -= r[i][j] * lit::<T>(self.coeffs[j] as f64);
        }
        let rii = r[i][i];
        let center = s / rii;
        let above = self.partial[i + 1];
        if self.bound < above {
            return;
        }
        // zig-zag outward from the nearest integer
        let start = center.round();
        let mut up = start;
        let mut down = start - T::one();
        let mut up_open = true;
        let mut down_open = true;
        while up_open || down_open {
            let take_up = match (up_open, down_open) {
                (true, false) => true,
                (false, true) => false,
                _ => (up - center).abs() <= (center - down).abs(),
            };
            let k = if take_up { up } else { down };
            let d = rii * (k - center);
            let total = above + d * d;
            if total > self.bound {
                if take_up {
                    up_open = false;
                } else {
                    down_open = false;
                }
                continue;
            }
            if take_up {
                up += T::one();
            } else {
                down -= T::one();
            }
            self.coeffs[i] = k.to_i64().expect("coefficient in range");
            if i == 0 {
                if let Some(b) = visit(&self.coeffs, total) {
                    self.bound = b;
                }
            } else {
                self.partial[i] = total;
                self.level(i - 1, visit);
            }
        }
        self.coeffs[i] = 0;
    }
}

impl<T: Real> Lattice<T> {
    /// Calls `f(coeffs, dist2)` for every lattice point with
    /// `|point - center| <= radius`, where `dist2` is computed directly from
    /// the point coordinates.
    pub fn for_each_in_ball<F: FnMut(&[i64], T)>(
        &self,
        center: &[T],
        radius: T,
        mut f: F,
    ) -> Result<()> {
        self.check_exact()?;
        self.check_len(center)?;
        let r2 = radius * radius;
        // loose tree bound, exact filter on the reconstructed point
        let slack = r2 * lit(1e-9) + lit::<T>(1e-12);
        let mut search = Search::new(self, center, r2 + slack);
        search.run(&mut |c: &[i64], _| {
            let d2 = linalg::norm2(&linalg::sub(&self.point(c), center));
            if d2 <= r2 {
                f(c, d2);
            }
            None
        });
        Ok(())
    }

    /// All lattice points within `radius` of `center`, sorted by coefficient
    /// vector.
    pub fn enumerate(&self, center: &[T], radius: T) -> Result<Vec<LatticePoint<T>>> {
        let mut out = Vec::new();
        self.for_each_in_ball(center, radius, |c, _| {
            out.push(LatticePoint {
                coeffs: c.to_vec(),
                point: self.point(c),
            })
        })?;
        out.sort_by(|a, b| a.coeffs.cmp(&b.coeffs));
        Ok(out)
    }

    /// Nearest-plane (Babai) coefficients.
    fn babai(&self, target: &[T]) -> Vec<i64> {
        let n = self.dimension();
        let y: Vec<T> = self.gs_q.iter().map(|q| linalg::dot(q, target)).collect();
        let mut c = vec![0i64; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.gs_r[i][j] * lit::<T>(c[j] as f64);
            }
            c[i] = (s / self.gs_r[i][i]).round().to_i64().expect("coefficient in range");
        }
        c
    }

    /// Exact closest lattice point to `target`.
    ///
    /// Among equidistant points (relative tolerance `int_tol`) the one with
    /// the lexicographically smallest coefficient vector wins.
    pub fn closest_point(&self, target: &[T]) -> Result<LatticePoint<T>> {
        self.check_exact()?;
        self.check_len(target)?;
        let dist2 = |c: &[i64]| linalg::norm2(&linalg::sub(&self.point(c), target));
        let tie = |d: T| d * T::int_tol() + T::int_tol() * T::int_tol();
        let babai = self.babai(target);
        let mut best = dist2(&babai);
        let mut candidates: Vec<(Vec<i64>, T)> = vec![(babai, best)];
        let mut search = Search::new(self, target, best + tie(best) * lit(4.0));
        search.run(&mut |c: &[i64], _| {
            let d = dist2(c);
            if d <= best + tie(best) {
                candidates.push((c.to_vec(), d));
                if d < best {
                    best = d;
                    return Some(best + tie(best) * lit(4.0));
                }
            }
            None
        });
        let cutoff = best + tie(best);
        let coeffs = candidates
            .into_iter()
            .filter(|(_, d)| *d <= cutoff)
            .map(|(c, _)| c)
            .min_by(|a, b| a.cmp(b))
            .expect("at least the Babai point");
        Ok(LatticePoint {
            point: self.point(&coeffs),
            coeffs,
        })
    }

    /// `x - closest_point(x)`: the representative of `x + L` in the Voronoi
    /// cell around the origin.
    pub fn reduce(&self, x: &[T]) -> Result<Vec<T>> {
        let p = self.closest_point(x)?;
        Ok(linalg::sub(x, &p.point))
    }
}

/// Lexicographic comparison helper for float vectors.
pub(crate) fn cmp_points<T: Real>(a: &[T], b: &[T]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_closest(l: &Lattice<f64>, w: &[f64], bound: i64) -> (Vec<i64>, f64) {
        let n = l.dimension();
        let mut best: Option<(Vec<i64>, f64)> = None;
        let side = (2 * bound + 1) as usize;
        let total = side.pow(n as u32);
        for idx in 0..total {
            let mut rem = idx;
            let c: Vec<i64> = (0..n)
                .map(|_| {
                    let v = (rem % side) as i64 - bound;
                    rem /= side;
                    v
                })
                .collect();
            let d = linalg::norm2(&linalg::sub(&l.point(&c), w));
            if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
                best = Some((c, d));
            }
        }
        best.unwrap()
    }

    #[test]
    fn rounding_in_z2() {
        let z2 = Lattice::<f64>::integer(2);
        let p = z2.closest_point(&[0.3, -0.6]).unwrap();
        assert_eq!(p.coeffs, vec![0, -1]);
    }

    #[test]
    fn tie_goes_to_smaller_coefficients() {
        let z = Lattice::<f64>::integer(1);
        assert_eq!(z.closest_point(&[0.5]).unwrap().coeffs, vec![0]);
        assert_eq!(z.closest_point(&[-0.5]).unwrap().coeffs, vec![-1]);
        let z2 = Lattice::<f64>::integer(2);
        assert_eq!(z2.closest_point(&[0.5, 0.5]).unwrap().coeffs, vec![0, 0]);
    }

    #[test]
    fn random_3d_matches_box_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // well-conditioned so that the +-20 box provably holds the optimum
        let g: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| f64::from(u8::from(i == j)) + rng.random_range(-0.4..0.4))
                    .collect()
            })
            .collect();
        let l = Lattice::new(g).unwrap();
        for _ in 0..100 {
            let w: Vec<f64> = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
            let got = l.closest_point(&w).unwrap();
            let dgot = linalg::norm2(&linalg::sub(&got.point, &w));
            let (_, dbest) = brute_closest(&l, &w, 20);
            assert!((dgot - dbest).abs() < 1e-9, "{dgot} vs {dbest}");
        }
    }

    #[test]
    fn enumerate_matches_brute_force() {
        let l = Lattice::<f64>::new(vec![vec![1.0, 0.3], vec![0.2, 1.1]]).unwrap();
        let center = [0.4, -0.7];
        let got = l.enumerate(&center, 3.0).unwrap();
        let mut want = Vec::new();
        for a in -20..=20 {
            for b in -20..=20 {
                let c = [a, b];
                if linalg::norm2(&linalg::sub(&l.point(&c), &center)) <= 9.0 {
                    want.push(c.to_vec());
                }
            }
        }
        want.sort();
        let got: Vec<Vec<i64>> = got.into_iter().map(|p| p.coeffs).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn dimension_limit() {
        let l = Lattice::<f64>::integer(9);
        assert!(l.closest_point(&[0.0; 9]).is_err());
        assert!(l.packing_radius().is_err());
    }
}
