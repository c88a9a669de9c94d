//! Channel gains as written on the command line or in a config: numeric
//! literals, or the symbolic irrationals `sqrt2`, `sqrt3`, `pi` (optionally
//! negated). Symbolic gains are never rounded to a rational ratio.

use std::fmt;
use std::str::FromStr;

use latticeguard::relay::{reduce_gains, ChannelModel, Reduced, Reduction, DEFAULT_MAX_DEN, DEFAULT_TOL};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gain {
    Number(f64),
    Symbol { name: Symbol, negative: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symbol {
    Sqrt2,
    Sqrt3,
    Pi,
}

impl Symbol {
    fn name(self) -> &'static str {
        match self {
            Symbol::Sqrt2 => "sqrt2",
            Symbol::Sqrt3 => "sqrt3",
            Symbol::Pi => "pi",
        }
    }

    fn value(self) -> f64 {
        match self {
            Symbol::Sqrt2 => std::f64::consts::SQRT_2,
            Symbol::Sqrt3 => 3f64.sqrt(),
            Symbol::Pi => std::f64::consts::PI,
        }
    }
}

impl Gain {
    pub fn value(&self) -> f64 {
        match *self {
            Gain::Number(x) => x,
            Gain::Symbol { name, negative } => {
                if negative {
                    -name.value()
                } else {
                    name.value()
                }
            }
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, Gain::Symbol { .. })
    }
}

impl FromStr for Gain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim();
        let (negative, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let name = match body {
            "sqrt2" => Some(Symbol::Sqrt2),
            "sqrt3" => Some(Symbol::Sqrt3),
            "pi" => Some(Symbol::Pi),
            _ => None,
        };
        if let Some(name) = name {
            return Ok(Gain::Symbol { name, negative });
        }
        match t.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Gain::Number(x)),
            _ => Err(format!("invalid gain `{s}`: expected a number, sqrt2, sqrt3 or pi")),
        }
    }
}

impl fmt::Display for Gain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gain::Number(x) => write!(f, "{x}"),
            Gain::Symbol { name, negative } => {
                write!(f, "{}{}", if negative { "-" } else { "" }, name.name())
            }
        }
    }
}

impl Serialize for Gain {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Gain::Number(x) => s.serialize_f64(x),
            Gain::Symbol { .. } => s.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Gain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Gain::Number(x)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Channel for a gain pair. Symbolic gains leave the channel unreduced.
pub fn channel(h1: Gain, h2: Gain, noise_var: f64) -> latticeguard::Result<ChannelModel<f64>> {
    if h1.is_symbolic() || h2.is_symbolic() {
        return ChannelModel::with_reduction(h1.value(), h2.value(), noise_var, None);
    }
    ChannelModel::new(h1.value(), h2.value(), noise_var)
}

/// Integer gains `(k1, k2)` with `h1 = h k1`, `h2 = h k2`, when they exist.
pub fn integer_gains(h1: Gain, h2: Gain) -> Result<Reduced<f64>, String> {
    if h1.is_symbolic() || h2.is_symbolic() {
        return Err(format!("gains {h1}, {h2} have an irrational ratio"));
    }
    match reduce_gains(h1.value(), h2.value(), DEFAULT_MAX_DEN, DEFAULT_TOL) {
        Ok(Reduction::Reduced(r)) => Ok(r),
        Ok(Reduction::Irreducible) => Err(format!("gains {h1}, {h2} do not reduce to integers")),
        Err(e) => Err(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!("sqrt2".parse::<Gain>().unwrap().to_string(), "sqrt2");
        assert_eq!("-pi".parse::<Gain>().unwrap().value(), -std::f64::consts::PI);
        assert_eq!("2.5".parse::<Gain>().unwrap(), Gain::Number(2.5));
        assert!("sqrt5".parse::<Gain>().is_err());
        assert!("nan".parse::<Gain>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let g: Vec<Gain> = serde_json::from_str(r#"[1, "sqrt3", "-2"]"#).unwrap();
        assert_eq!(g[2], Gain::Number(-2.0));
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"[1.0,"sqrt3",-2.0]"#);
    }

    #[test]
    fn symbolic_gains_stay_unreduced() {
        let ch = channel(Gain::Number(1.0), "sqrt2".parse().unwrap(), 0.0).unwrap();
        assert!(ch.reduced.is_none());
        let r = integer_gains(Gain::Number(1.5), Gain::Number(2.5)).unwrap();
        assert_eq!((r.k1, r.k2), (3, 5));
    }
}
