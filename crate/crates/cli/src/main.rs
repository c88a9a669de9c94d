//! `latticeguard`: lattices, flatness factors, secrecy audits, relay
//! simulations and rate calculators from the command line.
//!
//! Exit status: 0 on success, 2 when an audit or simulation assertion fails,
//! 1 on usage, parse or I/O errors. `LATTICEGUARD_THREADS` caps the worker
//! pool.

mod commands;
mod config;
mod gain;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use latticeguard::secrecy::FlatnessMethod;
use latticeguard::Density64;

use commands::{Output, RateMode, RatesArgs, SimulateArgs};
use config::{lattice_from_spec, ExperimentConfig, PairSpec};
use gain::Gain;

#[derive(Parser)]
#[command(name = "latticeguard", version, about = "Secure bidirectional relaying with nested lattice codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct PairArgs {
    /// Nested pair description (JSON `{"codes": ...}` or `{"lattices": ...}`).
    #[arg(long, conflicts_with_all = ["q", "n"])]
    pair: Option<PathBuf>,
    /// Prime for the pair `Z^n ⊃ q Z^n`.
    #[arg(long, default_value_t = 5)]
    q: u64,
    #[arg(long, default_value_t = 1)]
    n: usize,
}

impl PairArgs {
    fn spec(&self) -> Result<PairSpec, String> {
        match &self.pair {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
            }
            None => Ok(PairSpec::integer(self.q, self.n)),
        }
    }

    fn build(&self) -> Result<latticeguard::NestedPair64, String> {
        self.spec()?.build().map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DensityKind {
    Gaussian,
    Fejer,
}

#[derive(Subcommand)]
enum Command {
    /// Print the nested pair: generators, quotient representatives, orders.
    BuildLattice {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Flatness factor of a lattice at one or more theta values.
    Flatness {
        /// `z`, `zN` for `Z^N`, or a lattice description file.
        #[arg(long, default_value = "z")]
        lattice: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<f64>,
        #[arg(long, default_value = "fourier-sum", value_parser = parse_method)]
        method: FlatnessMethod,
        #[command(flatten)]
        common: Common,
    },
    /// Perfect-secrecy audit with a Fejér density.
    AuditPerfect {
        #[command(flatten)]
        pair: PairArgs,
        /// Half-width of the support cube of the characteristic function.
        #[arg(long, default_value_t = 0.4)]
        r: f64,
        #[arg(long, default_value = "1")]
        h1: Gain,
        #[arg(long, default_value = "2")]
        h2: Gain,
        #[arg(long, default_value_t = commands::PERFECT_TAIL)]
        tail: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Strong-secrecy audit with a Gaussian density.
    AuditStrong {
        #[command(flatten)]
        pair: PairArgs,
        /// Per-dimension power `P = sigma^2`.
        #[arg(long, default_value_t = 125.0, conflicts_with = "sigma")]
        power: f64,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value = "1")]
        h1: Gain,
        #[arg(long, default_value = "2")]
        h2: Gain,
        #[arg(long, default_value_t = commands::STRONG_TAIL)]
        tail: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo of the relay's decoding over a noise grid.
    Simulate {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value = "gaussian")]
        density: DensityKind,
        #[arg(long, default_value_t = 125.0)]
        power: f64,
        #[arg(long, default_value_t = 0.4)]
        r: f64,
        #[arg(long, default_value = "1")]
        h1: Gain,
        #[arg(long, default_value = "2")]
        h2: Gain,
        /// Noise variances.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        noise: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = commands::SIMULATE_TAIL)]
        tail: f64,
        /// Include this many per-trial records in JSON output.
        #[arg(long, default_value_t = 0)]
        records: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Recover both transmitted points from `h1 u + h2 v` with irrational gains.
    Attack {
        #[arg(long, default_value = "z")]
        lattice: String,
        #[arg(long, default_value = "1")]
        h1: Gain,
        #[arg(long, allow_hyphen_values = true)]
        h2: Gain,
        /// Coefficients of `u`; drawn at random when omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "v")]
        u: Option<Vec<i64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "u")]
        v: Option<Vec<i64>>,
        /// Number of random pairs.
        #[arg(long, default_value_t = 1, conflicts_with = "u")]
        count: usize,
        #[arg(long = "box", default_value_t = 10)]
        bound: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Achievable secure rates and exact feasibility of a scaling `alpha`.
    Rates {
        #[arg(long, value_enum)]
        mode: RateMode,
        /// Decimal or `p/q`; decided exactly with `--k1 --k2`.
        #[arg(long)]
        alpha: Option<String>,
        /// `P / sigma^2`; sets the power with unit noise.
        #[arg(long, conflicts_with_all = ["power", "noise_var"])]
        snr: Option<f64>,
        #[arg(long)]
        power: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        noise_var: f64,
        #[arg(long, default_value_t = 1.0)]
        h1: f64,
        #[arg(long, default_value_t = 1.0)]
        h2: f64,
        /// Channel-estimation error for the jamming scheme.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        eve_noise_var: f64,
        #[arg(long, requires = "k2", allow_hyphen_values = true)]
        k1: Option<i64>,
        #[arg(long, requires = "k1", allow_hyphen_values = true)]
        k2: Option<i64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run an experiment config and write a manifest plus one report per analysis.
    Run {
        /// Config file.
        #[arg(required_unless_present_any = ["fixture", "list"], conflicts_with = "fixture")]
        config: Option<PathBuf>,
        /// Bundled config by name.
        #[arg(long)]
        fixture: Option<String>,
        /// List bundled configs.
        #[arg(long)]
        list: bool,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replaces the config's seeds.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_method(s: &str) -> Result<FlatnessMethod, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("unknown method `{s}`: expected fourier-sum or primal-grid"))
}

enum Failure {
    Usage(String),
    Assertion,
}

fn emit(out: Output, common: &Common) -> Result<(), Failure> {
    let body = match common.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).expect("json");
            s.push('\n');
            s
        }
        Format::Csv => out.csv,
    };
    match &common.out {
        Some(path) => std::fs::write(path, body).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => print!("{body}"),
    }
    if out.passed {
        Ok(())
    } else {
        Err(Failure::Assertion)
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    let usage = Failure::Usage;
    match command {
        Command::BuildLattice { pair, common } => {
            let pair = pair.build().map_err(usage)?;
            emit(commands::build_lattice(&pair).map_err(usage)?, &common)
        }
        Command::Flatness {
            lattice,
            scale,
            theta,
            method,
            common,
        } => {
            let l = lattice_from_spec(&lattice, scale).map_err(usage)?;
            emit(commands::flatness(&l, &theta, method).map_err(usage)?, &common)
        }
        Command::AuditPerfect {
            pair,
            r,
            h1,
            h2,
            tail,
            common,
        } => {
            let p = pair.build().map_err(usage)?;
            let d = Density64::fejer(r).map_err(|e| usage(e.to_string()))?;
            emit(commands::audit_perfect(&p, &d, h1, h2, tail).map_err(usage)?, &common)
        }
        Command::AuditStrong {
            pair,
            power,
            sigma,
            h1,
            h2,
            tail,
            common,
        } => {
            let p = pair.build().map_err(usage)?;
            let d = match sigma {
                Some(s) => Density64::gaussian(s),
                None => Density64::gaussian_power(power),
            }
            .map_err(|e| usage(e.to_string()))?;
            emit(commands::audit_strong(&p, &d, h1, h2, tail).map_err(usage)?, &common)
        }
        Command::Simulate {
            pair,
            density,
            power,
            r,
            h1,
            h2,
            noise,
            trials,
            tail,
            records,
            common,
        } => {
            let p = pair.build().map_err(usage)?;
            let d = match density {
                DensityKind::Gaussian => Density64::gaussian_power(power),
                DensityKind::Fejer => Density64::fejer(r),
            }
            .map_err(|e| usage(e.to_string()))?;
            let out = commands::simulate(&SimulateArgs {
                pair: &p,
                density: &d,
                h1,
                h2,
                noise_grid: &noise,
                trials,
                seeds: &[common.seed],
                tail,
                records,
            })
            .map_err(usage)?;
            emit(out, &common)
        }
        Command::Attack {
            lattice,
            h1,
            h2,
            u,
            v,
            count,
            bound,
            common,
        } => {
            let l = lattice_from_spec(&lattice, 1.0).map_err(usage)?;
            let pairs = match (u, v) {
                (Some(u), Some(v)) => {
                    let n = l.dimension();
                    if u.len() != n || v.len() != n {
                        return Err(usage(format!("--u and --v need {n} coefficients each")));
                    }
                    vec![(u, v)]
                }
                _ => commands::random_pairs(l.dimension(), bound, count, common.seed),
            };
            emit(commands::attack(&l, h1, h2, bound, &pairs).map_err(usage)?, &common)
        }
        Command::Rates {
            mode,
            alpha,
            snr,
            power,
            noise_var,
            h1,
            h2,
            delta,
            eve_noise_var,
            k1,
            k2,
            common,
        } => {
            let (power, noise_var) = match (snr, power) {
                (Some(s), _) => (s, 1.0),
                (None, Some(p)) => (p, noise_var),
                (None, None) => return Err(usage("one of --snr or --power is required".into())),
            };
            let args = RatesArgs {
                mode,
                alpha,
                power,
                noise_var,
                h1,
                h2,
                delta,
                eve_noise_var,
                k: k1.zip(k2),
            };
            emit(commands::rates(&args).map_err(usage)?, &common)
        }
        Command::Run {
            config,
            fixture,
            list,
            out,
            seed,
        } => {
            if list {
                for (name, _) in run::BUNDLED {
                    println!("{name}");
                }
                return Ok(());
            }
            let mut cfg = match (config, fixture) {
                (Some(path), _) => ExperimentConfig::load(&path).map_err(usage)?,
                (None, Some(name)) => {
                    let text = run::bundled(&name).ok_or_else(|| usage(format!("no bundled config `{name}`")))?;
                    ExperimentConfig::parse(text).map_err(usage)?
                }
                (None, None) => return Err(usage("a config path or --fixture is required".into())),
            };
            if let Some(s) = seed {
                cfg.seeds = vec![s];
            }
            match run::run(&cfg, out.as_deref()) {
                Ok(true) => Ok(()),
                Ok(false) => Err(Failure::Assertion),
                Err(run::RunError::Usage(e) | run::RunError::Io(e)) => Err(usage(e)),
            }
        }
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("LATTICEGUARD_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("LATTICEGUARD_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion) => {
            eprintln!("assertion failed");
            ExitCode::from(2)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
