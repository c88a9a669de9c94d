use std::io::Write;

use serde::Serialize;

use super::flatness::{flatness_factor, FlatnessMethod};
use super::grid::{convolve, Grid};
use super::mass::{mutual_information, variational_distance, Estimate, LatticeMass};
use super::wdist::{check_gains, WAnalysis};
use crate::encoding::{coset_pmf, Density};
use crate::error::{Error, Result};
use crate::lattice::{cube_inside_voronoi, NestedPair};
use crate::scalar::{lit, to_f64, Accumulator, Real};

/// Floor of the perfect-secrecy pass threshold on the largest variational
/// distance.
pub const AUDIT_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MessageDistance<T> {
    pub message: usize,
    pub distance: T,
    pub error: T,
}

/// Pointwise ratio test `lower <= p_{W|x}(w) / p(w) <= upper`, scored as the
/// L1 mass by which `p_{W|x}` leaves the band.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichCheck<T> {
    pub lower: T,
    pub upper: T,
    pub violation: T,
    pub allowance: T,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecrecyReport<T> {
    pub mode: String,
    pub index: usize,
    pub h1: i64,
    pub h2: i64,
    /// No nonzero coset has order dividing either gain.
    pub condition_holds: bool,
    /// `{h1 x + h2 y : y}` exhausts the quotient group.
    pub coverage: bool,
    pub geometric_certificate: bool,
    pub max_variational: T,
    pub variational_error: T,
    pub per_message: Vec<MessageDistance<T>>,
    pub leakage_bits: T,
    pub leakage_error: T,
    pub epsilon: Option<T>,
    pub variational_bound: Option<T>,
    pub bound_bits: Option<T>,
    pub sandwich: Option<SandwichCheck<T>>,
    pub tail: T,
    pub tolerance: T,
    /// The proof-level prediction and the numerics disagree.
    pub disagreement: bool,
    pub passed: bool,
}

impl<T: Real + Serialize> SecrecyReport<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `message,distance,error` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "message,distance,error")?;
        for d in &self.per_message {
            writeln!(out, "{},{},{}", d.message, d.distance, d.error)?;
        }
        Ok(())
    }
}

/// Whether the labels `k1 x + k2 y`, `y` ranging over the group, cover every
/// coset.
pub fn support_coverage_check<T: Real>(pair: &NestedPair<T>, k1: i64, k2: i64, x: usize) -> bool {
    let m = pair.index();
    let base = pair.mul(k1, x);
    let mut seen = vec![false; m];
    for y in 0..m {
        seen[pair.add(base, pair.mul(k2, y))] = true;
    }
    seen.into_iter().all(|s| s)
}

/// Whether the cubes `([-r, r]^n - l1) / |h1|` and `([-r, r]^n - l2) / |h2|`
/// are disjoint. Closeness within rounding counts as overlap.
pub fn supports_disjoint<T: Real>(r: T, h1: i64, h2: i64, l1: &[T], l2: &[T]) -> bool {
    let a1 = lit::<T>(h1.unsigned_abs() as f64);
    let a2 = lit::<T>(h2.unsigned_abs() as f64);
    l1.iter().zip(l2).any(|(&p, &q)| {
        let (lo1, hi1) = ((-r - p) / a1, (r - p) / a1);
        let (lo2, hi2) = ((-r - q) / a2, (r - q) / a2);
        let scale = lo1.abs().max(hi1.abs()).max(lo2.abs()).max(hi2.abs()).max(T::one());
        let guard = lit::<T>(8.0) * T::epsilon() * scale;
        hi1 + guard < lo2 || hi2 + guard < lo1
    })
}

/// `(16 eps / 3)(log2 M - log2(16 eps / 3))`.
pub fn strong_secrecy_bound<T: Real>(eps: T, m: usize) -> Result<T> {
    if m <= 4 {
        return Err(Error::GroupTooSmall { m });
    }
    if !(eps >= T::zero() && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be nonnegative, got {eps}")));
    }
    if eps * lit::<T>(16.0) * T::E() >= T::one() {
        return Err(Error::EpsilonTooLarge { eps: to_f64(eps) });
    }
    if eps == T::zero() {
        return Ok(T::zero());
    }
    let v = lit::<T>(16.0) * eps / lit(3.0);
    Ok(v * (lit::<T>(m as f64).log2() - v.log2()))
}

fn distances<T: Real>(a: &WAnalysis<T>) -> Vec<MessageDistance<T>> {
    let marginal = a.marginal();
    a.conditionals()
        .iter()
        .enumerate()
        .map(|(message, c)| MessageDistance {
            message,
            distance: variational_distance(marginal, c),
            error: marginal.error() + c.error(),
        })
        .collect()
}

fn leakage<T: Real>(a: &WAnalysis<T>) -> Result<Estimate<T>> {
    let m = a.conditionals().len();
    let prior = vec![T::one() / lit(m as f64); m];
    mutual_information(&prior, a.conditionals())
}

fn maxima<T: Real>(d: &[MessageDistance<T>]) -> (T, T) {
    d.iter().fold((T::zero(), T::zero()), |(v, e), x| (v.max(x.distance), e.max(x.error)))
}

/// Audits perfect secrecy for a compactly supported `psi`: the sufficient
/// geometric condition (order condition for both gains and the support cube
/// strictly inside `2 V(dual coarse) / (|h1| + |h2|)`), against the measured
/// variational distances.
pub fn perfect_secrecy_audit<T: Real>(
    pair: &NestedPair<T>,
    d: &Density<T>,
    h1: i64,
    h2: i64,
    tail: T,
) -> Result<SecrecyReport<T>> {
    let r = d.support_half_width().ok_or_else(|| {
        Error::InvalidArgument("perfect secrecy audit needs a compactly supported psi".into())
    })?;
    check_gains(h1, h2)?;
    let condition = !pair.order_divides(h1) && !pair.order_divides(h2);
    let coverage = support_coverage_check(pair, h1, h2, 0);
    let dual = pair.coarse().fourier_dual()?;
    let dilation = lit::<T>(2.0) / lit((h1.unsigned_abs() + h2.unsigned_abs()) as f64);
    let inside = cube_inside_voronoi(&dual, r, dilation)?;
    let certificate = condition && inside;

    let analysis = WAnalysis::new(pair, d, h1, h2, tail)?;
    let per_message = distances(&analysis);
    let (max_v, max_err) = maxima(&per_message);
    let info = leakage(&analysis)?;
    let tolerance = lit::<T>(AUDIT_TOLERANCE).max(lit::<T>(10.0) * max_err);
    let disagreement = certificate && max_v > tolerance;
    Ok(SecrecyReport {
        mode: "perfect".into(),
        index: pair.index(),
        h1,
        h2,
        condition_holds: condition,
        coverage,
        geometric_certificate: certificate,
        max_variational: max_v,
        variational_error: max_err,
        per_message,
        leakage_bits: info.value,
        leakage_error: info.error,
        epsilon: None,
        variational_bound: None,
        bound_bits: None,
        sandwich: None,
        tail: analysis.max_tail(),
        tolerance,
        disagreement,
        passed: certificate && !disagreement,
    })
}

/// Audits the Gaussian strong-secrecy bounds: with
/// `eps = eps_coarse(sigma / sqrt(h1^2 + h2^2))`, every `V(p_W, p_{W|x})`
/// must be at most `16 eps` and `I(X; W)` at most the mutual-information
/// bound, both within error bars; also checks the pointwise ratio band
/// `[(1 - eps)/(1 + eps), (1 + eps)/(1 - eps)]` against the reference law.
pub fn strong_secrecy_audit<T: Real>(
    pair: &NestedPair<T>,
    d: &Density<T>,
    h1: i64,
    h2: i64,
    tail: T,
) -> Result<SecrecyReport<T>> {
    let sigma = match *d {
        Density::Gaussian { sigma } => sigma,
        Density::Fejer { .. } => {
            return Err(Error::InvalidArgument("strong secrecy audit needs a Gaussian density".into()))
        }
    };
    check_gains(h1, h2)?;
    let condition = !pair.order_divides(h1) && !pair.order_divides(h2);
    let coverage = support_coverage_check(pair, h1, h2, 0);
    let k = lit::<T>((h1 * h1 + h2 * h2) as f64).sqrt();
    let eps = flatness_factor(pair.coarse(), sigma / k, FlatnessMethod::FourierSum)?;
    let bound = lit::<T>(16.0) * eps;

    let analysis = WAnalysis::new(pair, d, h1, h2, tail)?;
    let per_message = distances(&analysis);
    let (max_v, max_err) = maxima(&per_message);
    let info = leakage(&analysis)?;
    let bound_bits = strong_secrecy_bound(eps, pair.index()).ok();

    let applicable = condition && eps < lit(0.5);
    let v_ok = per_message.iter().all(|m| m.distance <= bound + m.error);
    let mi_ok = bound_bits.map_or(true, |b| info.value + info.error < b);
    let sandwich = if applicable {
        Some(sandwich(pair, &analysis, sigma, k, eps, tail)?)
    } else {
        None
    };
    let band_ok = sandwich.as_ref().map_or(false, |s| s.holds);
    let passed = applicable && v_ok && mi_ok && band_ok;
    Ok(SecrecyReport {
        mode: "strong".into(),
        index: pair.index(),
        h1,
        h2,
        condition_holds: condition,
        coverage,
        geometric_certificate: false,
        max_variational: max_v,
        variational_error: max_err,
        per_message,
        leakage_bits: info.value,
        leakage_error: info.error,
        epsilon: Some(eps),
        variational_bound: Some(bound),
        bound_bits,
        sandwich,
        tail: analysis.max_tail(),
        tolerance: max_err,
        disagreement: applicable && !passed,
        passed,
    })
}

/// Reference law `p(w) = (1/M) g_{k sigma}(w) S(sigma / k) / (S(sigma) S_y(sigma))`
/// where `S(s)` is the Gaussian sum of width `s` over the coarse lattice,
/// `S_y` the same over the coset of `y`, and `y` the unique message with
/// `w` in `coarse + h1 x + h2 y`.
fn sandwich<T: Real>(
    pair: &NestedPair<T>,
    analysis: &WAnalysis<T>,
    sigma: T,
    k: T,
    eps: T,
    tail: T,
) -> Result<SandwichCheck<T>> {
    let m = pair.index();
    let (h1, h2) = analysis.gains();
    let zero = vec![T::zero(); pair.dimension()];
    let narrow = coset_pmf(&Density::gaussian(sigma / k)?, pair.coarse(), &zero, tail)?;
    let pmfs = analysis.pmfs();
    let s_narrow = narrow.window_sum();
    let s_full = pmfs[pair.identity()].window_sum();
    let wide = Density::gaussian(k * sigma)?;
    let lower = (T::one() - eps) / (T::one() + eps);
    let upper = T::one() / lower;
    let mut worst = T::zero();
    let mut allowance = T::zero();
    for (x, cond) in analysis.conditionals().iter().enumerate() {
        let base = pair.mul(h1, x);
        let mut partner = vec![usize::MAX; m];
        for y in 0..m {
            partner[pair.add(base, pair.mul(h2, y))] = y;
        }
        let mut acc = Accumulator::new();
        for (i, &p) in cond.grid.data.iter().enumerate() {
            let c = cond.grid.coords_of(i);
            let y = partner[pair.label_of_coeffs(&c)];
            if y == usize::MAX {
                continue;
            }
            let w = pair.fine().point(&c);
            let reference = wide.pdf(&w) * s_narrow / (s_full * pmfs[y].window_sum()) / lit(m as f64);
            let below = lower * reference - p;
            let above = p - upper * reference;
            acc.add(below.max(T::zero()) + above.max(T::zero()));
        }
        worst = worst.max(acc.value());
        // window sums enter the reference with relative error at most the tails
        let slack = lit::<T>(4.0) * (narrow.tail_bound() + analysis.max_tail());
        allowance = allowance.max(cond.error() + slack);
    }
    Ok(SandwichCheck {
        lower,
        upper,
        violation: worst,
        allowance,
        holds: worst <= allowance,
    })
}

/// Outcome of passing `W` through a discrete Gaussian channel on the fine
/// lattice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseCheck<T> {
    pub noiseless: Estimate<T>,
    pub noisy: Estimate<T>,
    pub holds: bool,
}

/// Data processing check: adding independent lattice noise of width `sigma`
/// to `W` must not increase the measured `I(X; W)` beyond the error bars.
pub fn lattice_noise_check<T: Real>(
    pair: &NestedPair<T>,
    analysis: &WAnalysis<T>,
    sigma: T,
    tail: T,
) -> Result<NoiseCheck<T>> {
    let zero = vec![T::zero(); pair.dimension()];
    let noise = coset_pmf(&Density::gaussian(sigma)?, pair.fine(), &zero, tail)?;
    let z = Grid::from_pmf(&noise, 1);
    let noisy: Vec<LatticeMass<T>> = analysis
        .conditionals()
        .iter()
        .map(|c| {
            let (g, round) = convolve(&c.grid, &z);
            let err = c.error() + lit::<T>(2.0) * noise.tail_bound() + round;
            LatticeMass::new(pair.fine().clone(), g, err)
        })
        .collect();
    let m = noisy.len();
    let prior = vec![T::one() / lit(m as f64); m];
    let before = mutual_information(&prior, analysis.conditionals())?;
    let after = mutual_information(&prior, &noisy)?;
    Ok(NoiseCheck {
        holds: after.value <= before.value + before.error + after.error,
        noiseless: before,
        noisy: after,
    })
}
