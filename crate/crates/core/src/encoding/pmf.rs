use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Density;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg;
use crate::scalar::{lit, to_f64, Accumulator, Real};

/// Largest window a coset pmf may enumerate.
pub const MAX_WINDOW_POINTS: f64 = 1e8;

/// A truncated coset pmf `p(u) = f(u) / sum_{window} f` over points
/// `u = shift + lambda`, `lambda` in `lattice`.
///
/// Support points are stored by their lattice coefficients, sorted
/// lexicographically. `tail_bound` bounds the fraction of the full coset sum
/// of `f` that lies outside the window.
#[derive(Clone, Debug)]
pub struct CosetPmf<T> {
    lattice: Lattice<T>,
    shift: Vec<T>,
    density: Density<T>,
    coeffs: Vec<i64>,
    probs: Vec<T>,
    cdf: Vec<T>,
    window_sum: T,
    tail_bound: T,
}

/// Builds the coset pmf of `d` on `lattice + shift` with a window chosen so
/// that the missing relative mass is at most `tail_target / 2`.
///
/// Gaussian windows are balls of radius `t sigma sqrt(n)`, with the tail
/// certified by Banaszczyk's bound. Fejer windows are cubes `[-T, T]^n`,
/// starting from the per-coordinate bound `4 / (pi r T)`; the full coset
/// sum is known in closed form by Poisson summation, so the tail is measured
/// exactly and the cube grown until it meets the target.
pub fn coset_pmf<T: Real>(
    d: &Density<T>,
    lattice: &Lattice<T>,
    shift: &[T],
    tail_target: T,
) -> Result<CosetPmf<T>> {
    d.validate()?;
    if !(tail_target > T::zero() && tail_target <= lit(1e-3)) {
        return Err(Error::InvalidArgument(format!(
            "tail_target must lie in (0, 1e-3], got {tail_target}"
        )));
    }
    if shift.len() != lattice.dimension() {
        return Err(Error::LengthMismatch {
            expected: lattice.dimension(),
            got: shift.len(),
        });
    }
    if shift.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let goal = tail_target / lit(2.0);
    match *d {
        Density::Gaussian { sigma } => gaussian_window(d, sigma, lattice, shift, goal),
        Density::Fejer { r } => fejer_window(d, r, lattice, shift, goal),
    }
}

struct Window<T> {
    coeffs: Vec<Vec<i64>>,
    values: Vec<T>,
    sum: T,
}

fn collect<T: Real>(
    d: &Density<T>,
    lattice: &Lattice<T>,
    shift: &[T],
    radius: T,
    cube: Option<T>,
) -> Result<Window<T>> {
    let center: Vec<T> = shift.iter().map(|&s| -s).collect();
    let mut coeffs = Vec::new();
    let mut values = Vec::new();
    let mut acc = Accumulator::new();
    lattice.for_each_in_ball(&center, radius, |c, _| {
        let u = linalg::add(shift, &lattice.point(c));
        if let Some(half) = cube {
            if u.iter().any(|x| x.abs() > half) {
                return;
            }
        }
        let f = d.pdf(&u);
        if f > T::zero() {
            acc.add(f);
            coeffs.push(c.to_vec());
            values.push(f);
        }
    })?;
    Ok(Window {
        coeffs,
        values,
        sum: acc.value(),
    })
}

fn check_count<T: Real>(region_volume: f64, lattice: &Lattice<T>) -> Result<()> {
    let points = region_volume / to_f64(lattice.cell_volume());
    if points > MAX_WINDOW_POINTS {
        return Err(Error::WindowTooLarge {
            points,
            cap: MAX_WINDOW_POINTS,
        });
    }
    Ok(())
}

fn ball_volume(n: usize, radius: f64) -> f64 {
    let half = n as f64 / 2.0;
    std::f64::consts::PI.powf(half) * radius.powi(n as i32) / gamma(half + 1.0)
}

fn gamma(x: f64) -> f64 {
    // x is a positive multiple of 1/2 here
    if (x - 0.5).abs() < 1e-12 {
        std::f64::consts::PI.sqrt()
    } else if (x - 1.0).abs() < 1e-12 {
        1.0
    } else {
        (x - 1.0) * gamma(x - 1.0)
    }
}

fn gaussian_window<T: Real>(
    d: &Density<T>,
    sigma: T,
    lattice: &Lattice<T>,
    shift: &[T],
    goal: T,
) -> Result<CosetPmf<T>> {
    let n = lattice.dimension();
    let nf = n as f64;
    let zero = vec![T::zero(); n];
    let mut t = 1.5f64;
    loop {
        // rho((L + c) \ B(t sigma sqrt n)) <= 2 C^n rho(L), C = t sqrt(e) exp(-t^2 / 2)
        let c = t * 0.5f64.exp() * (-t * t / 2.0).exp();
        let spill = 2.0 * c.powf(nf);
        let radius = t * to_f64(sigma) * nf.sqrt();
        check_count(ball_volume(n, radius + to_f64(lattice.packing_radius()?)), lattice)?;
        if spill < 0.5 {
            let r = lit::<T>(radius);
            let centered = collect(d, lattice, &zero, r, None)?;
            let window = collect(d, lattice, shift, r, None)?;
            if window.sum > T::zero() {
                let full = centered.sum / (T::one() - lit(spill));
                let tail = lit::<T>(spill) * full / window.sum;
                if tail <= goal {
                    return Ok(finish(d, lattice, shift, window, tail));
                }
            }
        }
        t += 0.25;
        if t > 64.0 {
            return Err(Error::InvalidArgument("gaussian window did not converge".into()));
        }
    }
}

fn fejer_window<T: Real>(
    d: &Density<T>,
    r: T,
    lattice: &Lattice<T>,
    shift: &[T],
    goal: T,
) -> Result<CosetPmf<T>> {
    let n = lattice.dimension();
    let nf = n as f64;
    let full = fejer_coset_sum(r, lattice, shift)?;
    // n * 4 / (pi r T) <= 2 goal
    let mut half = 4.0 * nf / (std::f64::consts::PI * to_f64(r) * 2.0 * to_f64(goal));
    loop {
        let reach = half + to_f64(lattice.packing_radius()?) * 2.0;
        check_count((2.0 * reach).powf(nf), lattice)?;
        let h = lit::<T>(half);
        let radius = h * lit::<T>(nf.sqrt());
        let window = collect(d, lattice, shift, radius, Some(h))?;
        // roundoff of the compensated sums
        let slack = lit::<T>(window.values.len() as f64 + 1.0) * T::epsilon();
        let tail = (T::one() - window.sum / full).max(T::zero()) + slack;
        if tail <= goal || window.sum >= full {
            return Ok(finish(d, lattice, shift, window, tail));
        }
        half *= 1.25;
    }
}

/// `sum_{u in lattice + shift} f(u)` for the Fejer product, by Poisson
/// summation over the Fourier dual: only dual points inside the cube
/// `(-r, r)^n` contribute.
pub(crate) fn fejer_coset_sum<T: Real>(r: T, lattice: &Lattice<T>, shift: &[T]) -> Result<T> {
    let dual = lattice.fourier_dual()?;
    let n = lattice.dimension();
    let zero = vec![T::zero(); n];
    let d = Density::Fejer { r };
    let mut acc = Accumulator::new();
    dual.for_each_in_ball(&zero, r * lit::<T>(n as f64).sqrt(), |c, _| {
        let l = dual.point(c);
        let psi = d.characteristic(&l);
        if psi > T::zero() {
            acc.add(psi * linalg::dot(&l, shift).cos());
        }
    })?;
    Ok(acc.value() / lattice.cell_volume())
}

fn finish<T: Real>(
    d: &Density<T>,
    lattice: &Lattice<T>,
    shift: &[T],
    window: Window<T>,
    tail: T,
) -> CosetPmf<T> {
    let n = lattice.dimension();
    let mut order: Vec<usize> = (0..window.coeffs.len()).collect();
    order.sort_by(|&a, &b| window.coeffs[a].cmp(&window.coeffs[b]));
    let mut coeffs = Vec::with_capacity(order.len() * n);
    let mut probs = Vec::with_capacity(order.len());
    let mut cdf = Vec::with_capacity(order.len());
    let mut acc = Accumulator::new();
    for &i in &order {
        coeffs.extend_from_slice(&window.coeffs[i]);
        let p = window.values[i] / window.sum;
        probs.push(p);
        acc.add(p);
        cdf.push(acc.value());
    }
    CosetPmf {
        lattice: lattice.clone(),
        shift: shift.to_vec(),
        density: *d,
        coeffs,
        probs,
        cdf,
        window_sum: window.sum,
        tail_bound: tail,
    }
}

impl<T: Real> CosetPmf<T> {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.shift.len()
    }

    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    pub fn shift(&self) -> &[T] {
        &self.shift
    }

    pub fn density(&self) -> &Density<T> {
        &self.density
    }

    /// Lattice coefficients of the `i`-th support point (relative to the
    /// shift).
    pub fn coeffs(&self, i: usize) -> &[i64] {
        let n = self.dimension();
        &self.coeffs[i * n..(i + 1) * n]
    }

    pub fn point(&self, i: usize) -> Vec<T> {
        linalg::add(&self.shift, &self.lattice.point(self.coeffs(i)))
    }

    /// Componentwise minimum and maximum of the support coefficients.
    pub fn coeff_bounds(&self) -> (Vec<i64>, Vec<i64>) {
        let n = self.dimension();
        let mut lo = vec![i64::MAX; n];
        let mut hi = vec![i64::MIN; n];
        for c in self.coeffs.chunks(n) {
            for k in 0..n {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
        (lo, hi)
    }

    pub fn prob(&self, i: usize) -> T {
        self.probs[i]
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Certified relative mass outside the window.
    pub fn tail_bound(&self) -> T {
        self.tail_bound
    }

    /// `sum_{window} f(u)`.
    pub fn window_sum(&self) -> T {
        self.window_sum
    }

    pub fn total(&self) -> T {
        self.cdf.last().copied().unwrap_or(T::zero())
    }

    /// `(point, probability)` pairs in support order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<T>, T)> + '_ {
        (0..self.len()).map(move |i| (self.point(i), self.probs[i]))
    }

    /// Support index of the point with coefficients `c`, if present.
    pub fn index_of(&self, c: &[i64]) -> Option<usize> {
        let n = self.dimension();
        let mut lo = 0;
        let mut hi = self.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.coeffs[mid * n..(mid + 1) * n].cmp(c) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Draws a support index by inverse CDF.
    pub fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = lit::<T>(rng.random::<f64>()) * self.total();
        self.cdf.partition_point(|&c| c <= u).min(self.len() - 1)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<Vec<T>> {
        (0..count).map(|_| self.point(self.draw_index(rng))).collect()
    }

    /// `count` i.i.d. draws from a ChaCha8 stream seeded by `seed`.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<Vec<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, count)
    }

    /// `(1/n) sum p(u) |u|^2` over the support.
    pub fn average_power(&self) -> T {
        let mut acc = Accumulator::new();
        for i in 0..self.len() {
            acc.add(self.probs[i] * linalg::norm2(&self.point(i)));
        }
        acc.value() / lit(self.dimension() as f64)
    }

    /// Writes `x1,...,xn,probability` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.dimension();
        let header: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
        writeln!(out, "{},probability", header.join(","))?;
        for (u, p) in self.iter() {
            let cols: Vec<String> = u.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{},{}", cols.join(","), p)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_on_5z_plus_1() {
        let l = Lattice::<f64>::scaled_integer(1, 5.0).unwrap();
        let d = Density::gaussian(1.0).unwrap();
        let pmf = coset_pmf(&d, &l, &[1.0], 1e-9).unwrap();
        assert!((pmf.total() - 1.0).abs() < 1e-12);
        assert!(pmf.tail_bound() <= 5e-10);
        // nearest to zero is 1; symmetric about it means p(1 + 5k) decreasing in |.|
        let best = (0..pmf.len())
            .max_by(|&a, &b| pmf.prob(a).partial_cmp(&pmf.prob(b)).unwrap())
            .unwrap();
        assert_eq!(pmf.point(best), vec![1.0]);
    }

    #[test]
    fn rejects_bad_tail() {
        let l = Lattice::<f64>::integer(1);
        let d = Density::fejer(0.4).unwrap();
        assert!(coset_pmf(&d, &l, &[0.0], 0.0).is_err());
        assert!(coset_pmf(&d, &l, &[0.0], 2e-3).is_err());
    }

    #[test]
    fn window_cap() {
        let l = Lattice::<f64>::integer(2);
        let d = Density::fejer(0.4).unwrap();
        let err = coset_pmf(&d, &l, &[0.0, 0.0], 1e-6).unwrap_err();
        assert!(matches!(err, Error::WindowTooLarge { .. }));
    }

    #[test]
    fn sampling_is_deterministic_and_in_support() {
        let l = Lattice::<f64>::scaled_integer(1, 5.0).unwrap();
        let d = Density::gaussian(2.0).unwrap();
        let pmf = coset_pmf(&d, &l, &[1.0], 1e-9).unwrap();
        let a = pmf.sample(42, 1000);
        assert_eq!(a, pmf.sample(42, 1000));
        for u in &a {
            let c = l.integer_coordinates(&[u[0] - 1.0], 1e-9).unwrap();
            assert!(pmf.index_of(&c).is_some());
        }
    }

    #[test]
    fn csv_rows() {
        let l = Lattice::<f64>::scaled_integer(1, 5.0).unwrap();
        let d = Density::gaussian(0.5).unwrap();
        let pmf = coset_pmf(&d, &l, &[1.0], 1e-9).unwrap();
        let mut buf = Vec::new();
        pmf.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x1,probability\n"));
        assert_eq!(text.lines().count(), pmf.len() + 1);
    }
}
