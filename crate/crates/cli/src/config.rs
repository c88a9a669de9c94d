//! Experiment configuration: one JSON document, unknown keys rejected.

use std::path::{Path, PathBuf};

use latticeguard::construction_a::{nested_pair_from_codes, CodeDesc, LinearCode};
use latticeguard::lattice::io::LatticeDesc;
use latticeguard::{Density64, Lattice64, NestedPair64};
use serde::{Deserialize, Serialize};

use crate::gain::Gain;

/// A nested pair, either from codes `c0 ⊂ c` over `F_q` (Construction A at
/// `scale`) or from explicit generator matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum PairSpec {
    Codes {
        c0: CodeDesc,
        c: CodeDesc,
        #[serde(default = "one")]
        scale: f64,
    },
    Lattices {
        fine: LatticeDesc,
        coarse: LatticeDesc,
    },
}

fn one() -> f64 {
    1.0
}

impl PairSpec {
    /// `Z^n ⊃ q Z^n`.
    pub fn integer(q: u64, n: usize) -> Self {
        PairSpec::Codes {
            c0: CodeDesc {
                q,
                n,
                generators: vec![],
            },
            c: CodeDesc {
                q,
                n,
                generators: (0..n)
                    .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
                    .collect(),
            },
            scale: 1.0,
        }
    }

    pub fn build(&self) -> latticeguard::Result<NestedPair64> {
        match self {
            PairSpec::Codes { c0, c, scale } => {
                let c0 = LinearCode::from_desc(c0)?;
                let c = LinearCode::from_desc(c)?;
                Ok(nested_pair_from_codes(&c0, &c, *scale)?.0)
            }
            PairSpec::Lattices { fine, coarse } => NestedPair64::new(fine.to_lattice()?, coarse.to_lattice()?),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gains {
    pub h1: Gain,
    pub h2: Gain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    BuildLattice,
    AuditPerfect,
    AuditStrong,
    Simulate,
    Attack,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::BuildLattice => "build-lattice",
            Analysis::AuditPerfect => "audit-perfect",
            Analysis::AuditStrong => "audit-strong",
            Analysis::Simulate => "simulate",
            Analysis::Attack => "attack",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub fixture: PairSpec,
    pub density: Density64,
    pub gains: Gains,
    #[serde(default)]
    pub noise_grid: Vec<f64>,
    #[serde(default)]
    pub trials: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub analyses: Vec<Analysis>,
    /// Truncation target for coset pmfs; each analysis has its own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<f64>,
    /// Coefficient box `[-b, b]^n` for the eavesdropper.
    #[serde(default = "default_box")]
    pub attack_box: i64,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_box() -> i64 {
    10
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    fn validate(&self) -> Result<(), String> {
        if self.analyses.is_empty() {
            return Err("no analyses requested".into());
        }
        if self.seeds.is_empty() {
            return Err("at least one seed is required".into());
        }
        if self.noise_grid.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err("noise variances must be finite and nonnegative".into());
        }
        if let Some(t) = self.tail {
            if !(t > 0.0 && t <= 1e-3) {
                return Err(format!("tail {t} outside (0, 1e-3]"));
            }
        }
        if self.attack_box < 0 {
            return Err("attack_box must be nonnegative".into());
        }
        self.density.validate().map_err(|e| e.to_string())?;
        Ok(())
    }
}

/// `z`, `z3` (for `Z^3`), or a path to a lattice description.
pub fn lattice_from_spec(spec: &str, scale: f64) -> Result<Lattice64, String> {
    let base = if let Some(dim) = spec.strip_prefix('z').or_else(|| spec.strip_prefix('Z')) {
        let n = if dim.is_empty() {
            1
        } else {
            dim.parse::<usize>().map_err(|_| format!("unknown lattice `{spec}`"))?
        };
        if n == 0 {
            return Err("lattice dimension must be positive".into());
        }
        Lattice64::integer(n)
    } else {
        let text = std::fs::read_to_string(spec).map_err(|e| format!("{spec}: {e}"))?;
        let desc: LatticeDesc = serde_json::from_str(&text).map_err(|e| format!("{spec}: {e}"))?;
        desc.to_lattice().map_err(|e| e.to_string())?
    };
    if scale == 1.0 {
        Ok(base)
    } else {
        base.scaled(scale).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "name": "t",
        "fixture": {"codes": {"c0": {"q": 5, "n": 1, "generators": []},
                              "c": {"q": 5, "n": 1, "generators": [[1]]}}},
        "density": {"kind": "fejer", "r": 0.4},
        "gains": {"h1": 1, "h2": "sqrt2"},
        "output_dir": "out",
        "analyses": ["audit-perfect"]
    }"#;

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
        assert_eq!(cfg.seeds, vec![0]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = BASE.replace("\"name\"", "\"nmae\": 1, \"name\"");
        assert!(ExperimentConfig::parse(&bad).unwrap_err().contains("unknown field"));
        let bad = BASE.replace("\"generators\": []}", "\"generators\": [], \"extra\": 0}");
        assert!(ExperimentConfig::parse(&bad).is_err());
        let bad = BASE.replace("\"c\":", "\"c\": {\"q\": 5, \"n\": 1, \"generators\": [[1]]}, \"d\":");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = BASE.replace("\"t\",", "\"t\"");
        let e = ExperimentConfig::parse(&bad).unwrap_err();
        assert!(e.contains("line 3"), "{e}");
    }

    #[test]
    fn integer_pair() {
        let pair = PairSpec::integer(5, 2).build().unwrap();
        assert_eq!(pair.index(), 25);
    }
}
