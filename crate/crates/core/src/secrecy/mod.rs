//! Flatness factors, exact noiseless laws of the relay observation, and
//! secrecy audits.

mod audit;
mod flatness;
mod grid;
mod mass;
mod wdist;

pub use audit::{
    lattice_noise_check, perfect_secrecy_audit, strong_secrecy_audit, strong_secrecy_bound,
    support_coverage_check, supports_disjoint, MessageDistance, NoiseCheck, SandwichCheck,
    SecrecyReport, AUDIT_TOLERANCE,
};
pub use flatness::{flatness_factor, FlatnessMethod, PRIMAL_GRID};
pub use mass::{mixture, mutual_information, variational_distance, Estimate, LatticeMass};
pub use wdist::{message_pmfs, w_distribution, Conditioning, WAnalysis};
