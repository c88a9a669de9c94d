use num_complex::Complex;

use super::{CosetPmf, Density};
use crate::error::{Error, Result};
use crate::lattice::{cube_inside_voronoi, Lattice};
use crate::linalg;
use crate::scalar::{lit, Accumulator, Real};

/// Characteristic function of the coset pmf of `d` on `lattice + shift`,
/// computed without truncation as
/// `sum_{l in dual} psi(t + l) exp(-i <shift, l>)`.
///
/// Valid only when the support cube of `psi` lies strictly inside the
/// Voronoi region of the Fourier dual; then only the zero dual point enters
/// the normalizing sum.
pub fn periodized_characteristic<T: Real>(
    d: &Density<T>,
    lattice: &Lattice<T>,
    shift: &[T],
    t: &[T],
) -> Result<Complex<T>> {
    let r = d.support_half_width().ok_or_else(|| {
        Error::InvalidArgument("periodized characteristic needs a compactly supported psi".into())
    })?;
    let n = lattice.dimension();
    if shift.len() != n || t.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: if shift.len() != n { shift.len() } else { t.len() },
        });
    }
    let dual = lattice.fourier_dual()?;
    if !cube_inside_voronoi(&dual, r, T::one())? {
        return Err(Error::SupportViolation);
    }
    let center: Vec<T> = t.iter().map(|&x| -x).collect();
    let mut re = Accumulator::new();
    let mut im = Accumulator::new();
    dual.for_each_in_ball(&center, r * lit::<T>(n as f64).sqrt(), |c, _| {
        let l = dual.point(c);
        let psi = d.characteristic(&linalg::add(t, &l));
        if psi > T::zero() {
            let phase = linalg::dot(shift, &l);
            re.add(psi * phase.cos());
            im.add(-psi * phase.sin());
        }
    })?;
    Ok(Complex::new(re.value(), im.value()))
}

/// `sum_u p(u) exp(i <t, u>)` over the pmf support.
pub fn empirical_characteristic<T: Real>(pmf: &CosetPmf<T>, t: &[T]) -> Complex<T> {
    // <t, shift + sum_j c_j g_j> = <t, shift> + sum_j c_j <t, g_j>
    let base = linalg::dot(t, pmf.shift());
    let tg: Vec<T> = pmf.lattice().generator().iter().map(|g| linalg::dot(t, g)).collect();
    let mut re = Accumulator::new();
    let mut im = Accumulator::new();
    for i in 0..pmf.len() {
        let phase = pmf
            .coeffs(i)
            .iter()
            .zip(&tg)
            .fold(base, |acc, (&c, &w)| acc + lit::<T>(c as f64) * w);
        let p = pmf.prob(i);
        re.add(p * phase.cos());
        im.add(p * phase.sin());
    }
    Complex::new(re.value(), im.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_gives_one() {
        let l = Lattice::<f64>::integer(1);
        let d = Density::fejer(0.4).unwrap();
        let v = periodized_characteristic(&d, &l, &[0.0], &[0.0]).unwrap();
        assert!((v.re - 1.0).abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    #[test]
    fn support_violation() {
        let l = Lattice::<f64>::integer(1);
        let d = Density::fejer(2.0 * std::f64::consts::PI).unwrap();
        assert_eq!(
            periodized_characteristic(&d, &l, &[0.0], &[0.0]),
            Err(Error::SupportViolation)
        );
        let g = Density::gaussian(1.0).unwrap();
        assert!(periodized_characteristic(&g, &l, &[0.0], &[0.0]).is_err());
    }
}
