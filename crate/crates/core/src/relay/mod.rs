//! The multiple-access phase: channel gains, relay decoding of
//! `k1 X + k2 Y`, the irrational-gain eavesdropper, and rate formulas.

mod attack;
mod channel;
mod mac;
mod rates;

pub use attack::{eavesdrop_irrational, Eavesdrop, PointPair};
pub use channel::{reduce_gains, ChannelModel, Reduced, Reduction, DEFAULT_MAX_DEN, DEFAULT_TOL};
pub use mac::{
    noise_sweep, simulate_mac, trial_records, wilson_interval, write_sweep_csv, MacReport, MacSetup,
    TrialRecord,
};
pub use rates::{
    feasibility, feasibility_exact, rate_jamming, rate_perfect, rate_strong, Rate, SecrecyMode,
};
