use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::channel::{ChannelModel, Reduced};
use crate::encoding::{CosetPmf, Density};
use crate::error::{Error, Result};
use crate::lattice::NestedPair;
use crate::linalg;
use crate::scalar::{lit, to_f64, Real};
use crate::secrecy::message_pmfs;

/// Everything a trial needs, built once.
#[derive(Clone, Debug)]
pub struct MacSetup<T> {
    pair: NestedPair<T>,
    pmfs: Vec<CosetPmf<T>>,
    channel: ChannelModel<T>,
    reduced: Reduced<T>,
}

/// One multiple-access trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord<T> {
    pub seed: u64,
    pub trial: u64,
    pub x: usize,
    pub y: usize,
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub w: Vec<T>,
    pub expected: usize,
    pub decoded: usize,
    pub correct: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MacReport {
    pub noise_var: f64,
    pub trials: u64,
    pub errors: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// No nonzero coset has order dividing `k1` or `k2`.
    pub order_condition: bool,
}

impl<T: Real> MacSetup<T> {
    pub fn new(pair: &NestedPair<T>, d: &Density<T>, channel: &ChannelModel<T>, tail: T) -> Result<Self> {
        channel.validate()?;
        let reduced = channel.reduced.ok_or(Error::NotReduced)?;
        Ok(MacSetup {
            pair: pair.clone(),
            pmfs: message_pmfs(pair, d, tail)?,
            channel: *channel,
            reduced,
        })
    }

    pub fn with_noise(&self, noise_var: T) -> Result<Self> {
        let mut s = self.clone();
        s.channel = self.channel.with_noise(noise_var)?;
        Ok(s)
    }

    pub fn order_condition(&self) -> bool {
        !self.pair.order_divides(self.reduced.k1) && !self.pair.order_divides(self.reduced.k2)
    }

    /// Trial `trial` of the stream `seed`: draws `(x, y)` uniformly, encodes,
    /// adds noise, and decodes the nearest fine point to `w / h`.
    pub fn trial(&self, seed: u64, trial: u64) -> Result<TrialRecord<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let m = self.pair.index();
        let x = rng.random_range(0..m);
        let y = rng.random_range(0..m);
        let u = self.pmfs[x].point(self.pmfs[x].draw_index(&mut rng));
        let v = self.pmfs[y].point(self.pmfs[y].draw_index(&mut rng));
        let sd = self.channel.noise_var.sqrt();
        let w: Vec<T> = u
            .iter()
            .zip(&v)
            .map(|(&a, &b)| {
                let z: f64 = rng.sample(StandardNormal);
                self.channel.h1 * a + self.channel.h2 * b + sd * lit(z)
            })
            .collect();
        let target = linalg::scaled(&w, T::one() / self.reduced.h);
        let nearest = self.pair.fine().closest_point(&target)?;
        let decoded = self.pair.label_of_coeffs(&nearest.coeffs);
        let expected = self
            .pair
            .add(self.pair.mul(self.reduced.k1, x), self.pair.mul(self.reduced.k2, y));
        Ok(TrialRecord {
            seed,
            trial,
            x,
            y,
            u,
            v,
            w,
            expected,
            decoded,
            correct: decoded == expected,
        })
    }

    pub fn run(&self, trials: u64, seed: u64) -> Result<MacReport> {
        let errors = (0..trials)
            .into_par_iter()
            .map(|t| self.trial(seed, t).map(|r| u64::from(!r.correct)))
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        let (ci_low, ci_high) = wilson_interval(errors, trials);
        Ok(MacReport {
            noise_var: to_f64(self.channel.noise_var),
            trials,
            errors,
            rate: if trials == 0 { 0.0 } else { errors as f64 / trials as f64 },
            ci_low,
            ci_high,
            order_condition: self.order_condition(),
        })
    }
}

/// Error rate of the relay's decoder over `trials` independent trials.
pub fn simulate_mac<T: Real>(
    pair: &NestedPair<T>,
    d: &Density<T>,
    channel: &ChannelModel<T>,
    trials: u64,
    seed: u64,
    tail: T,
) -> Result<MacReport> {
    MacSetup::new(pair, d, channel, tail)?.run(trials, seed)
}

/// Records of trials `0..count`.
pub fn trial_records<T: Real>(setup: &MacSetup<T>, seed: u64, count: u64) -> Result<Vec<TrialRecord<T>>> {
    (0..count).map(|t| setup.trial(seed, t)).collect()
}

/// Error rates over a grid of noise variances, sharing the encoder pmfs.
pub fn noise_sweep<T: Real>(setup: &MacSetup<T>, noise_vars: &[T], trials: u64, seed: u64) -> Result<Vec<MacReport>> {
    noise_vars
        .iter()
        .map(|&nv| setup.with_noise(nv)?.run(trials, seed))
        .collect()
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054f64;
    let n = trials as f64;
    let p = errors as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    // the bounds are exactly 0 and 1 at the extremes
    let low = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if errors == trials { 1.0 } else { (centre + half).min(1.0) };
    (low, high)
}

/// `noise_var,trials,errors,rate,ci_low,ci_high` rows.
pub fn write_sweep_csv<W: Write>(reports: &[MacReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "noise_var,trials,errors,rate,ci_low,ci_high")?;
    for r in reports {
        writeln!(out, "{},{},{},{},{},{}", r.noise_var, r.trials, r.errors, r.rate, r.ci_low, r.ci_high)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_values() {
        let (lo, hi) = wilson_interval(0, 10_000);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 4e-4);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
    }
}
