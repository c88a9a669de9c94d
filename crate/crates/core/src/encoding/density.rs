use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{lit, Real};

/// Encoder randomization law.
///
/// `Gaussian` is the isotropic normal density with per-coordinate standard
/// deviation `sigma` (so `sigma^2` is the nominal power). `Fejer` is the
/// product of one-dimensional Fejer densities
/// `f1(u) = (1 - cos(r u)) / (pi r u^2)`, whose characteristic function is the
/// triangle `max(0, 1 - |t| / r)`; the n-dimensional characteristic function
/// is therefore supported on the cube `[-r, r]^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Density<T> {
    Gaussian { sigma: T },
    Fejer { r: T },
}

impl<T: Real> Density<T> {
    pub fn gaussian(sigma: T) -> Result<Self> {
        if !(sigma > T::zero() && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Density::Gaussian { sigma })
    }

    /// Gaussian with per-coordinate variance `power`.
    pub fn gaussian_power(power: T) -> Result<Self> {
        Self::gaussian(power.sqrt())
    }

    pub fn fejer(r: T) -> Result<Self> {
        if !(r > T::zero() && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("r must be positive, got {r}")));
        }
        Ok(Density::Fejer { r })
    }

    /// Fejer product whose support cube fits in the ball of radius `radius`
    /// in `n` dimensions (`r = radius / sqrt(n)`).
    pub fn fejer_in_ball(radius: T, n: usize) -> Result<Self> {
        Self::fejer(radius / lit::<T>(n as f64).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Density::Gaussian { sigma } => Self::gaussian(sigma).map(|_| ()),
            Density::Fejer { r } => Self::fejer(r).map(|_| ()),
        }
    }

    /// Half-width of the characteristic-function support cube, if compact.
    pub fn support_half_width(&self) -> Option<T> {
        match *self {
            Density::Gaussian { .. } => None,
            Density::Fejer { r } => Some(r),
        }
    }

    pub fn is_compact(&self) -> bool {
        self.support_half_width().is_some()
    }

    pub fn pdf(&self, u: &[T]) -> T {
        match *self {
            Density::Gaussian { sigma } => {
                let n = lit::<T>(u.len() as f64);
                let var = sigma * sigma;
                let norm = (lit::<T>(2.0) * T::PI() * var).powf(n / lit(2.0));
                (-linalg::norm2(u) / (lit::<T>(2.0) * var)).exp() / norm
            }
            Density::Fejer { r } => u.iter().map(|&x| fejer1(r, x)).fold(T::one(), |a, b| a * b),
        }
    }

    /// Characteristic function `E exp(i <t, U>)` (real, as both laws are
    /// symmetric).
    pub fn characteristic(&self, t: &[T]) -> T {
        match *self {
            Density::Gaussian { sigma } => (-sigma * sigma * linalg::norm2(t) / lit(2.0)).exp(),
            Density::Fejer { r } => t
                .iter()
                .map(|&x| (T::one() - x.abs() / r).max(T::zero()))
                .fold(T::one(), |a, b| a * b),
        }
    }
}

/// One-dimensional Fejer density, written as `2 sin^2(r u / 2) / (pi r u^2)`
/// to avoid cancellation near the origin.
pub(crate) fn fejer1<T: Real>(r: T, u: T) -> T {
    let x = r * u;
    if x.abs() < lit(1e-4) {
        r / (lit::<T>(2.0) * T::PI()) * (T::one() - x * x / lit(12.0))
    } else {
        let s = (x / lit(2.0)).sin();
        lit::<T>(2.0) * s * s / (T::PI() * r * u * u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fejer_at_origin() {
        let r = 0.4f64;
        assert!((fejer1(r, 0.0) - r / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        // continuity across the series switch
        let a = fejer1(r, 2.4e-4);
        let b = fejer1(r, 2.6e-4);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn fejer_mass_on_interval() {
        // int_{-T}^{T} f1 >= 1 - 4/(pi r T), midpoint rule on a fine grid
        for &r in &[0.4f64, 1.0, 2.5] {
            let t_max = 200.0;
            let steps = 400_000;
            let h = 2.0 * t_max / steps as f64;
            let mass: f64 = (0..steps)
                .map(|k| fejer1(r, -t_max + (k as f64 + 0.5) * h) * h)
                .sum();
            assert!(mass >= 1.0 - 4.0 / (std::f64::consts::PI * r * t_max), "r={r} mass={mass}");
            assert!(mass <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn triangle_characteristic() {
        let d = Density::fejer(0.5f64).unwrap();
        assert_eq!(d.characteristic(&[0.0, 0.0]), 1.0);
        assert!((d.characteristic(&[0.25, 0.0]) - 0.5).abs() < 1e-15);
        assert_eq!(d.characteristic(&[0.6, 0.0]), 0.0);
        let b = Density::<f64>::fejer_in_ball(1.0, 4).unwrap();
        assert_eq!(b.support_half_width(), Some(0.5));
    }

    #[test]
    fn gaussian_normalized() {
        let d = Density::gaussian(1.5f64).unwrap();
        let h = 0.01;
        let mass: f64 = (-1500..1500).map(|k| d.pdf(&[(k as f64 + 0.5) * h]) * h).sum();
        assert!((mass - 1.0).abs() < 1e-9);
        assert!(Density::gaussian(0.0f64).is_err());
        assert!(Density::fejer(-1.0f64).is_err());
    }

    #[test]
    fn json_forms() {
        let g: Density<f64> = serde_json::from_str(r#"{"kind":"gaussian","sigma":2.0}"#).unwrap();
        assert_eq!(g, Density::Gaussian { sigma: 2.0 });
        let f: Density<f64> = serde_json::from_str(r#"{"kind":"fejer","r":0.4}"#).unwrap();
        assert_eq!(f, Density::Fejer { r: 0.4 });
        assert!(serde_json::from_str::<Density<f64>>(r#"{"kind":"fejer","r":0.4,"x":1}"#).is_err());
    }
}
