//! Dense masses on boxes of `Z^n` and their convolution.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::encoding::CosetPmf;
use crate::scalar::{lit, Accumulator, Real};

/// Pairs of nonzero entries up to which convolution is done directly.
const DIRECT_LIMIT: f64 = 2e7;

/// A real array on the integer box `origin + [0, shape)`, row-major with the
/// last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Grid<T> {
    pub origin: Vec<i64>,
    pub shape: Vec<usize>,
    pub data: Vec<T>,
}

impl<T: Real> Grid<T> {
    pub fn zeros(origin: Vec<i64>, shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Grid {
            origin,
            shape,
            data: vec![T::zero(); len],
        }
    }

    pub fn dimension(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn index_of(&self, c: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for i in 0..self.dimension() {
            let k = c[i] - self.origin[i];
            if k < 0 || k as usize >= self.shape[i] {
                return None;
            }
            idx = idx * self.shape[i] + k as usize;
        }
        Some(idx)
    }

    pub fn coords_of(&self, mut idx: usize) -> Vec<i64> {
        let n = self.dimension();
        let mut c = vec![0i64; n];
        for i in (0..n).rev() {
            c[i] = self.origin[i] + (idx % self.shape[i]) as i64;
            idx /= self.shape[i];
        }
        c
    }

    pub fn get(&self, c: &[i64]) -> T {
        self.index_of(c).map_or(T::zero(), |i| self.data[i])
    }

    pub fn total(&self) -> T {
        let mut acc = Accumulator::new();
        for &x in &self.data {
            acc.add(x);
        }
        acc.value()
    }

    /// Last corner, inclusive.
    pub fn end(&self) -> Vec<i64> {
        self.origin
            .iter()
            .zip(&self.shape)
            .map(|(&o, &s)| o + s as i64 - 1)
            .collect()
    }

    /// The pmf placed at coordinates `h * coeffs`.
    pub fn from_pmf(pmf: &CosetPmf<T>, h: i64) -> Self {
        let (lo, hi) = scaled_bounds(pmf, h);
        let shape = lo.iter().zip(&hi).map(|(&l, &u)| (u - l + 1) as usize).collect();
        let mut g = Grid::zeros(lo, shape);
        for i in 0..pmf.len() {
            let c: Vec<i64> = pmf.coeffs(i).iter().map(|&x| x * h).collect();
            let idx = g.index_of(&c).expect("inside bounding box");
            g.data[idx] = pmf.prob(i);
        }
        g
    }

    fn nonzeros(&self) -> Vec<(Vec<i64>, T)> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != T::zero())
            .map(|(i, &x)| (self.coords_of(i), x))
            .collect()
    }

    fn l2(&self) -> T {
        let mut acc = Accumulator::new();
        for &x in &self.data {
            acc.add(x * x);
        }
        acc.value().sqrt()
    }
}

/// Bounding box of `h * coeffs` over the pmf support.
pub(crate) fn scaled_bounds<T: Real>(pmf: &CosetPmf<T>, h: i64) -> (Vec<i64>, Vec<i64>) {
    let (lo, hi) = pmf.coeff_bounds();
    lo.iter()
        .zip(&hi)
        .map(|(&l, &u)| if h >= 0 { (l * h, u * h) } else { (u * h, l * h) })
        .unzip()
}

/// `a * b` together with an L1 bound on the floating-point error of the
/// result.
pub(crate) fn convolve<T: Real>(a: &Grid<T>, b: &Grid<T>) -> (Grid<T>, T) {
    let n = a.dimension();
    let origin: Vec<i64> = (0..n).map(|i| a.origin[i] + b.origin[i]).collect();
    let shape: Vec<usize> = (0..n).map(|i| a.shape[i] + b.shape[i] - 1).collect();
    let na = a.data.iter().filter(|&&x| x != T::zero()).count();
    let nb = b.data.iter().filter(|&&x| x != T::zero()).count();
    if (na as f64) * (nb as f64) <= DIRECT_LIMIT {
        direct(a, b, origin, shape)
    } else {
        fft(a, b, origin, shape)
    }
}

fn direct<T: Real>(a: &Grid<T>, b: &Grid<T>, origin: Vec<i64>, shape: Vec<usize>) -> (Grid<T>, T) {
    let mut out = Grid::zeros(origin, shape);
    let bn = b.nonzeros();
    let n = a.dimension();
    let mut c = vec![0i64; n];
    for (ca, va) in a.nonzeros() {
        for (cb, vb) in &bn {
            for i in 0..n {
                c[i] = ca[i] + cb[i];
            }
            let idx = out.index_of(&c).expect("inside output box");
            out.data[idx] += va * *vb;
        }
    }
    // every product and sum of nonnegative terms carries relative error eps
    let terms = lit::<T>(a.len().min(b.len()) as f64 + 2.0);
    let err = terms * T::epsilon() * a.total() * b.total();
    (out, err)
}

fn fft<T: Real>(a: &Grid<T>, b: &Grid<T>, origin: Vec<i64>, shape: Vec<usize>) -> (Grid<T>, T) {
    let n = a.dimension();
    let size: Vec<usize> = shape.iter().map(|&s| s.next_power_of_two()).collect();
    let total: usize = size.iter().product();
    let mut fa = embed(a, &size);
    let mut fb = embed(b, &size);
    let mut planner = FftPlanner::<T>::new();
    nd_fft(&mut planner, &mut fa, &size, false);
    nd_fft(&mut planner, &mut fb, &size, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    drop(fb);
    nd_fft(&mut planner, &mut fa, &size, true);
    let scale = T::one() / lit(total as f64);
    let mut out = Grid::zeros(origin, shape.clone());
    let out_len = out.len();
    for idx in 0..out_len {
        let mut rem = idx;
        let mut lin = 0usize;
        let mut stride = 1usize;
        for i in (0..n).rev() {
            lin += (rem % shape[i]) * stride;
            rem /= shape[i];
            stride *= size[i];
        }
        // tiny negative values are round-off
        out.data[idx] = (fa[lin].re * scale).max(T::zero());
    }
    // forward, pointwise product and inverse each add relative L2 error
    // O(eps log N), measured against |a|_1 |b|_2 + |b|_1 |a|_2
    let logn = lit::<T>((total as f64).log2().max(1.0));
    let l2 = lit::<T>(4.0) * T::epsilon() * logn * (a.total() * b.l2() + b.total() * a.l2());
    (out, l2 * lit::<T>(out_len as f64).sqrt())
}

fn embed<T: Real>(g: &Grid<T>, size: &[usize]) -> Vec<Complex<T>> {
    let n = g.dimension();
    let total: usize = size.iter().product();
    let mut v = vec![Complex::new(T::zero(), T::zero()); total];
    for (idx, &x) in g.data.iter().enumerate() {
        if x == T::zero() {
            continue;
        }
        let mut rem = idx;
        let mut lin = 0usize;
        let mut stride = 1usize;
        for i in (0..n).rev() {
            lin += (rem % g.shape[i]) * stride;
            rem /= g.shape[i];
            stride *= size[i];
        }
        v[lin] = Complex::new(x, T::zero());
    }
    v
}

fn nd_fft<T: Real>(planner: &mut FftPlanner<T>, data: &mut [Complex<T>], size: &[usize], inverse: bool) {
    let n = size.len();
    let total: usize = size.iter().product();
    let mut stride = 1usize;
    for axis in (0..n).rev() {
        let len = size[axis];
        let plan = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        if stride == 1 {
            plan.process(data);
        } else {
            let mut line = vec![Complex::new(T::zero(), T::zero()); len];
            let block = stride * len;
            for start in (0..total).step_by(block) {
                for off in 0..stride {
                    for k in 0..len {
                        line[k] = data[start + off + k * stride];
                    }
                    plan.process(&mut line);
                    for k in 0..len {
                        data[start + off + k * stride] = line[k];
                    }
                }
            }
        }
        stride *= len;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(origin: Vec<i64>, shape: Vec<usize>, data: Vec<f64>) -> Grid<f64> {
        Grid { origin, shape, data }
    }

    #[test]
    fn fft_matches_direct_2d() {
        let a = grid(vec![-1, 2], vec![3, 4], (0..12).map(|k| (k as f64 + 1.0) / 78.0).collect());
        let b = grid(vec![0, -3], vec![2, 5], (0..10).map(|k| ((k * 7) % 5) as f64 / 20.0).collect());
        let (d, _) = direct(&a, &b, vec![-1, -1], vec![4, 8]);
        let (f, err) = fft(&a, &b, vec![-1, -1], vec![4, 8]);
        let l1: f64 = d.data.iter().zip(&f.data).map(|(x, y)| (x - y).abs()).sum();
        assert!(l1 < 1e-14, "{l1}");
        assert!(err < 1e-12);
        assert_eq!(d.get(&[-1, -1]), a.data[0] * b.data[0]);
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::<f64>::zeros(vec![3, -2, 0], vec![2, 3, 4]);
        for i in 0..g.len() {
            assert_eq!(g.index_of(&g.coords_of(i)), Some(i));
        }
        assert_eq!(g.index_of(&[5, 0, 0]), None);
        assert_eq!(g.end(), vec![4, 0, 3]);
    }
}
