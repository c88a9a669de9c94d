//! Nested lattice codes for secure bidirectional relaying.
//!
//! Two users send random points of message cosets of a nested lattice pair to
//! an honest-but-curious relay, which must learn the integer combination
//! `k1 X + k2 Y` of the messages and nothing about `X` or `Y` individually.
//! The crate builds the lattices, encoders and relay decoder, and audits the
//! secrecy of the relay's observation exactly on small instances.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common double-precision instantiation.

pub mod construction_a;
pub mod encoding;
pub mod error;
pub mod hnf;
pub mod lattice;
pub mod linalg;
pub mod relay;
pub mod scalar;
pub mod secrecy;

pub use error::{Error, Result};
pub use scalar::{ExactRatio, Real};

pub type Lattice64 = lattice::Lattice<f64>;
pub type Lattice32 = lattice::Lattice<f32>;
pub type NestedPair64 = lattice::NestedPair<f64>;
pub type NestedPair32 = lattice::NestedPair<f32>;
pub type Density64 = encoding::Density<f64>;
pub type CosetPmf64 = encoding::CosetPmf<f64>;
pub type LatticeMass64 = secrecy::LatticeMass<f64>;
pub type SecrecyReport64 = secrecy::SecrecyReport<f64>;
pub type ChannelModel64 = relay::ChannelModel<f64>;
