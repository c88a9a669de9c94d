//! `run`: one config in, a manifest and one report per analysis out.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use latticeguard::NestedPair64;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::commands::{self, Output, SimulateArgs, PERFECT_TAIL, SIMULATE_TAIL, STRONG_TAIL};
use crate::config::{Analysis, ExperimentConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Configs shipped with the binary.
pub const BUNDLED: &[(&str, &str)] = &[
    ("perfect-z5", include_str!("../fixtures/perfect-z5.json")),
    ("leak-z5-h5", include_str!("../fixtures/leak-z5-h5.json")),
    ("leak-z2-k2", include_str!("../fixtures/leak-z2-k2.json")),
    ("strong-z5", include_str!("../fixtures/strong-z5.json")),
    ("mac-z5", include_str!("../fixtures/mac-z5.json")),
    ("attack-sqrt2", include_str!("../fixtures/attack-sqrt2.json")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[derive(Serialize)]
struct Identity<'a> {
    tool: &'a str,
    version: &'a str,
    config: &'a ExperimentConfig,
    seeds: &'a [u64],
}

/// SHA-256 over the resolved config, tool version and seeds; a run's
/// reports carry it so they can be matched to their manifest. The output
/// directory is left out so relocated runs hash alike.
pub fn manifest_hash(cfg: &ExperimentConfig) -> String {
    let mut config = cfg.clone();
    config.output_dir = PathBuf::new();
    let id = Identity {
        tool: "latticeguard",
        version: VERSION,
        config: &config,
        seeds: &cfg.seeds,
    };
    let bytes = serde_json::to_vec(&id).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

pub enum RunError {
    Usage(String),
    Io(String),
}

/// Runs every analysis, then writes the outputs. Returns whether all
/// assertions held.
pub fn run(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<bool, RunError> {
    let dir: PathBuf = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.clone());
    let mut cfg = cfg.clone();
    cfg.output_dir = dir.clone();
    let pair = cfg.fixture.build().map_err(|e| RunError::Usage(e.to_string()))?;
    let hash = manifest_hash(&cfg);

    let mut results = Vec::new();
    for &analysis in &cfg.analyses {
        let out = analyse(&cfg, &pair, analysis).map_err(RunError::Usage)?;
        results.push((analysis, out));
    }

    std::fs::create_dir_all(&dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
    let write = |name: &str, body: &str| {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
    };
    let mut files = Vec::new();
    let mut all_passed = true;
    for (analysis, out) in &results {
        let name = analysis.name();
        let report = json!({
            "manifest": hash,
            "analysis": name,
            "passed": out.passed,
            "report": out.json,
        });
        write(&format!("{name}.json"), &pretty(&report))?;
        write(&format!("{name}.csv"), &format!("# manifest {hash}\n{}", out.csv))?;
        files.push(json!({"analysis": name, "json": format!("{name}.json"), "csv": format!("{name}.csv"), "passed": out.passed}));
        all_passed &= out.passed;
    }
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let manifest = json!({
        "hash": hash,
        "tool": "latticeguard",
        "version": VERSION,
        "created_unix": created,
        "seeds": cfg.seeds,
        "config": cfg,
        "reports": files,
        "passed": all_passed,
    });
    write("manifest.json", &pretty(&manifest))?;
    Ok(all_passed)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn analyse(cfg: &ExperimentConfig, pair: &NestedPair64, analysis: Analysis) -> Result<Output, String> {
    let (h1, h2) = (cfg.gains.h1, cfg.gains.h2);
    match analysis {
        Analysis::BuildLattice => commands::build_lattice(pair),
        Analysis::AuditPerfect => commands::audit_perfect(pair, &cfg.density, h1, h2, cfg.tail.unwrap_or(PERFECT_TAIL)),
        Analysis::AuditStrong => commands::audit_strong(pair, &cfg.density, h1, h2, cfg.tail.unwrap_or(STRONG_TAIL)),
        Analysis::Simulate => commands::simulate(&SimulateArgs {
            pair,
            density: &cfg.density,
            h1,
            h2,
            noise_grid: &cfg.noise_grid,
            trials: if cfg.trials == 0 { 1000 } else { cfg.trials },
            seeds: &cfg.seeds,
            tail: cfg.tail.unwrap_or(SIMULATE_TAIL),
            records: 0,
        }),
        Analysis::Attack => {
            let trials = if cfg.trials == 0 { 100 } else { cfg.trials as usize };
            let mut pairs = Vec::new();
            for &seed in &cfg.seeds {
                pairs.extend(commands::random_pairs(pair.dimension(), cfg.attack_box, trials, seed));
            }
            commands::attack(pair.fine(), h1, h2, cfg.attack_box, &pairs)
        }
    }
}
