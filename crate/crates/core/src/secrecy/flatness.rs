use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg;
use crate::scalar::{lit, to_f64, Accumulator, Real};

/// Truncation budget for the Fourier series.
const FOURIER_TAIL: f64 = 1e-15;
/// Grid points per dimension for the primal evaluation.
pub const PRIMAL_GRID: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlatnessMethod {
    /// `sum_{l != 0 in dual} exp(-theta^2 |l|^2 / 2)`.
    FourierSum,
    /// Maximum of `|vol * sum_{l in L} g_theta(x + l) - 1|` over a grid of the
    /// fundamental parallelepiped.
    PrimalGrid,
}

/// Flatness factor `eps_L(theta)`.
pub fn flatness_factor<T: Real>(lattice: &Lattice<T>, theta: T, method: FlatnessMethod) -> Result<T> {
    if !(theta > T::zero() && theta.is_finite()) {
        return Err(Error::InvalidArgument(format!("theta must be positive, got {theta}")));
    }
    match method {
        FlatnessMethod::FourierSum => fourier_sum(lattice, theta),
        FlatnessMethod::PrimalGrid => primal_grid(lattice, theta, PRIMAL_GRID),
    }
}

/// Banaszczyk: the part of `sum exp(-|x|^2 / 2 s^2)` over a lattice coset
/// outside the ball of radius `t s sqrt(n)` is at most `spill(t)` times the
/// full lattice sum.
fn spill(n: usize, t: f64) -> f64 {
    let c = t * 0.5f64.exp() * (-t * t / 2.0).exp();
    2.0 * c.powf(n as f64)
}

/// Radius whose spill relative to the full sum is at most `budget`.
fn gaussian_reach(n: usize, s: f64, budget: f64) -> f64 {
    let mut t = 1.5f64;
    while spill(n, t) / (1.0 - spill(n, t)).max(1e-300) > budget && t < 60.0 {
        t += 0.125;
    }
    t * s * (n as f64).sqrt()
}

fn fourier_sum<T: Real>(lattice: &Lattice<T>, theta: T) -> Result<T> {
    let dual = lattice.fourier_dual()?;
    let n = lattice.dimension();
    let zero = vec![T::zero(); n];
    let half_theta2 = theta * theta / lit(2.0);
    let mut t = 1.5f64;
    loop {
        let mut acc = Accumulator::new();
        let reach = t * (n as f64).sqrt() / to_f64(theta);
        dual.for_each_in_ball(&zero, lit(reach), |c, d2| {
            if c.iter().any(|&k| k != 0) {
                acc.add((-half_theta2 * d2).exp());
            }
        })?;
        let partial = to_f64(acc.value()) + 1.0;
        let s = spill(n, t);
        if s < 1.0 && s * partial / (1.0 - s) <= FOURIER_TAIL {
            return Ok(acc.value());
        }
        t += 0.125;
    }
}

fn primal_grid<T: Real>(lattice: &Lattice<T>, theta: T, per_dim: usize) -> Result<T> {
    let n = lattice.dimension();
    let g = lattice.generator();
    let vol = lattice.cell_volume();
    let th2 = theta * theta;
    let norm = (lit::<T>(2.0) * T::PI() * th2).powf(lit::<T>(n as f64) / lit(2.0));
    // points of the parallelepiped lie within `diam` of the origin
    let diam: T = g.iter().map(|row| linalg::norm2(row).sqrt()).fold(T::zero(), |a, b| a + b);
    let reach = lit::<T>(gaussian_reach(n, to_f64(theta), 1e-14)) + diam;
    let zero = vec![T::zero(); n];
    let mut pts: Vec<Vec<T>> = Vec::new();
    lattice.for_each_in_ball(&zero, reach, |c, _| pts.push(lattice.point(c)))?;
    let cut = (reach - diam) * (reach - diam);
    let total = per_dim.pow(n as u32);
    let deviations: Vec<T> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rem = idx;
            let mut s = vec![T::zero(); n];
            for si in s.iter_mut().rev() {
                *si = lit::<T>((rem % per_dim) as f64) / lit(per_dim as f64);
                rem /= per_dim;
            }
            let x = linalg::row_times(&s, g);
            let mut acc = Accumulator::new();
            for p in &pts {
                let d2: T = x.iter().zip(p).map(|(&a, &b)| (a + b) * (a + b)).sum();
                if d2 <= cut {
                    acc.add((-d2 / (lit::<T>(2.0) * th2)).exp());
                }
            }
            (vol * acc.value() / norm - T::one()).abs()
        })
        .collect();
    Ok(deviations.into_iter().fold(T::zero(), T::max))
}
