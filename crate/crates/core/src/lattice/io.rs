//! JSON description of a lattice: `{"generator": [[...]], "scale": s}`.
//!
//! Entries may be plain numbers or exact rationals written as `[num, den]`.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::Lattice;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Ratio([i64; 2]),
    Number(f64),
}

impl Entry {
    pub fn value(&self) -> Result<f64> {
        match *self {
            Entry::Number(x) => Ok(x),
            Entry::Ratio([_, 0]) => Err(Error::InvalidArgument("zero denominator".into())),
            Entry::Ratio([n, d]) => Ok(Ratio::new(n, d).to_f64().unwrap_or(f64::NAN)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeDesc {
    pub generator: Vec<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Entry>,
}

impl LatticeDesc {
    pub fn to_lattice<T: Real>(&self) -> Result<Lattice<T>> {
        let scale = self.scale.as_ref().map_or(Ok(1.0), Entry::value)?;
        let generator = self
            .generator
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| e.value().map(|x| lit::<T>(x * scale)))
                    .collect::<Result<Vec<T>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Lattice::new(generator)
    }

    pub fn from_lattice<T: Real>(lattice: &Lattice<T>) -> Self {
        LatticeDesc {
            generator: lattice
                .generator()
                .iter()
                .map(|r| r.iter().map(|&x| Entry::Number(to_f64(x))).collect())
                .collect(),
            scale: None,
        }
    }
}
