use serde::{Deserialize, Serialize};

use crate::scalar::{exact, exact_int, ExactRatio, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SecrecyMode {
    Perfect,
    Strong,
}

/// A rate in bits per channel use; `feasible` is false when it is not
/// positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rate {
    pub bits: f64,
    pub feasible: bool,
}

impl Rate {
    fn new(bits: f64) -> Self {
        Rate {
            bits,
            feasible: bits > 0.0,
        }
    }

    /// Rate floored at zero, for reporting.
    pub fn floored(&self) -> f64 {
        self.bits.max(0.0)
    }
}

fn log2e() -> f64 {
    std::f64::consts::LOG2_E
}

/// `(1/2) log2(alpha^2 P / sigma^2) - log2(2e)`.
pub fn rate_perfect(alpha: f64, power: f64, noise_var: f64) -> Rate {
    Rate::new(0.5 * (alpha * alpha * power / noise_var).log2() - (1.0 + log2e()))
}

/// `(1/2) log2(alpha^2 P / sigma^2) - (1/2) log2 e`.
pub fn rate_strong(alpha: f64, power: f64, noise_var: f64) -> Rate {
    Rate::new(0.5 * (alpha * alpha * power / noise_var).log2() - 0.5 * log2e())
}

/// Jamming-based scheme with channel-estimation error `delta`:
/// `(1/4) log2(1 + h1^2 P / (2 delta^2 P + sigma^2))
///  - (1/4) log2(1 + h1^2 P / (h2^2 P + sigma1^2)) - (1/2) log2 e`.
pub fn rate_jamming(h1: f64, h2: f64, power: f64, delta: f64, noise_var: f64, eve_noise_var: f64) -> Rate {
    let a = 1.0 + h1 * h1 * power / (2.0 * delta * delta * power + noise_var);
    let b = 1.0 + h1 * h1 * power / (h2 * h2 * power + eve_noise_var);
    Rate::new(0.25 * a.log2() - 0.25 * b.log2() - 0.5 * log2e())
}

/// Exact threshold test: `2 / (|k1| + |k2|) > alpha` for perfect secrecy,
/// `1 / (k1^2 + k2^2) >= alpha^2` for strong secrecy.
pub fn feasibility_exact(alpha: &ExactRatio, k1: i64, k2: i64, mode: SecrecyMode) -> bool {
    match mode {
        SecrecyMode::Perfect => {
            // 2 > alpha (|k1| + |k2|)
            exact_int(2) > alpha * exact_int((k1.unsigned_abs() + k2.unsigned_abs()) as i64)
        }
        SecrecyMode::Strong => {
            let s = exact_int(k1 * k1 + k2 * k2);
            ExactRatio::from_integer(1.into()) >= alpha * alpha * s
        }
    }
}

/// [`feasibility_exact`] at the exact binary value of `alpha`.
pub fn feasibility<T: Real>(alpha: T, k1: i64, k2: i64, mode: SecrecyMode) -> bool {
    exact(alpha).is_some_and(|a| feasibility_exact(&a, k1, k2, mode))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_probes() {
        assert!(feasibility(0.6, 1, 2, SecrecyMode::Perfect));
        assert!(!feasibility(0.7, 1, 2, SecrecyMode::Perfect));
        assert!(feasibility(0.44, 1, 2, SecrecyMode::Strong));
        // equality: 2/4 = 0.5 is not strictly greater
        assert!(!feasibility(0.5, 1, 3, SecrecyMode::Perfect));
        // equality: 1/4 = 0.5^2 satisfies the weak inequality
        assert!(feasibility(0.5, 1, 1, SecrecyMode::Strong) && 0.25 >= 0.25);
        let two_thirds = ExactRatio::new(2.into(), 3.into());
        assert!(!feasibility_exact(&two_thirds, 1, 2, SecrecyMode::Perfect));
    }
}
