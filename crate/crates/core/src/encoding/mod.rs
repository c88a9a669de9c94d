//! Randomized coset encoding: a message coset `x` is transmitted as a point
//! `u` of `x` drawn with probability `f(u) / sum_{u' in x} f(u')`.

mod characteristic;
mod density;
mod pmf;

pub use characteristic::{empirical_characteristic, periodized_characteristic};
pub use density::Density;
pub use pmf::{coset_pmf, CosetPmf, MAX_WINDOW_POINTS};

/// Default tail target for Gaussian encoders.
pub const GAUSSIAN_TAIL: f64 = 1e-9;
/// Default tail target for Fejer encoders.
pub const FEJER_TAIL: f64 = 1e-6;
