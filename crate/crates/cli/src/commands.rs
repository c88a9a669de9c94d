//! Analyses shared by the subcommands and `run`. Each produces a JSON value,
//! a CSV body, and whether its assertions held.

use std::fmt::Write as _;

use latticeguard::lattice::io::LatticeDesc;
use latticeguard::relay::{
    eavesdrop_irrational, feasibility_exact, noise_sweep, rate_jamming, rate_perfect, rate_strong,
    trial_records, Eavesdrop, MacReport, MacSetup, PointPair, Rate, SecrecyMode,
};
use latticeguard::secrecy::{flatness_factor, perfect_secrecy_audit, strong_secrecy_audit, FlatnessMethod};
use latticeguard::{ChannelModel64, Density64, ExactRatio, Lattice64, NestedPair64, SecrecyReport64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::gain::{channel, integer_gains, Gain};

pub const PERFECT_TAIL: f64 = 1e-5;
pub const STRONG_TAIL: f64 = 1e-9;
pub const SIMULATE_TAIL: f64 = 1e-6;

pub struct Output {
    pub json: Value,
    pub csv: String,
    pub passed: bool,
}

pub type Outcome = Result<Output, String>;

fn err<E: ToString>(e: E) -> String {
    e.to_string()
}

fn to_value<S: Serialize>(s: &S) -> Value {
    serde_json::to_value(s).expect("report serializes")
}

pub fn build_lattice(pair: &NestedPair64) -> Outcome {
    let n = pair.dimension();
    let orders: Vec<usize> = (0..pair.index()).map(|a| pair.order(a)).collect();
    let reps: Vec<Value> = pair
        .reps()
        .iter()
        .enumerate()
        .map(|(label, r)| json!({"label": label, "order": orders[label], "coeffs": r.coeffs, "point": r.point}))
        .collect();
    let stats: Vec<Value> = pair
        .order_statistics()
        .into_iter()
        .map(|(order, count)| json!({"order": order, "count": count}))
        .collect();
    let json = json!({
        "dimension": n,
        "index": pair.index(),
        "fine": LatticeDesc::from_lattice(pair.fine()),
        "coarse": LatticeDesc::from_lattice(pair.coarse()),
        "elementary_divisors": pair.elementary_divisors(),
        "order_statistics": stats,
        "representatives": reps,
    });
    let mut csv = String::from("label,order");
    for i in 1..=n {
        write!(csv, ",x{i}").unwrap();
    }
    csv.push('\n');
    for (label, r) in pair.reps().iter().enumerate() {
        write!(csv, "{label},{}", orders[label]).unwrap();
        for x in &r.point {
            write!(csv, ",{x}").unwrap();
        }
        csv.push('\n');
    }
    Ok(Output {
        json,
        csv,
        passed: true,
    })
}

pub fn flatness(lattice: &Lattice64, thetas: &[f64], method: FlatnessMethod) -> Outcome {
    let mut rows = Vec::with_capacity(thetas.len());
    let mut csv = String::from("theta,epsilon\n");
    for &theta in thetas {
        let eps = flatness_factor(lattice, theta, method).map_err(err)?;
        writeln!(csv, "{theta},{eps:e}").unwrap();
        rows.push(json!({"theta": theta, "epsilon": eps}));
    }
    let json = json!({
        "lattice": LatticeDesc::from_lattice(lattice),
        "method": method,
        "values": rows,
    });
    Ok(Output {
        json,
        csv,
        passed: true,
    })
}

fn audit_output(report: SecrecyReport64, h: f64) -> Output {
    let mut csv = Vec::new();
    report.write_csv(&mut csv).expect("write to memory");
    let mut json = to_value(&report);
    json["gain_scale"] = json!(h);
    Output {
        passed: report.passed,
        json,
        csv: String::from_utf8(csv).expect("utf-8"),
    }
}

pub fn audit_perfect(pair: &NestedPair64, d: &Density64, h1: Gain, h2: Gain, tail: f64) -> Outcome {
    let g = integer_gains(h1, h2)?;
    let report = perfect_secrecy_audit(pair, d, g.k1, g.k2, tail).map_err(err)?;
    Ok(audit_output(report, g.h))
}

pub fn audit_strong(pair: &NestedPair64, d: &Density64, h1: Gain, h2: Gain, tail: f64) -> Outcome {
    let g = integer_gains(h1, h2)?;
    let report = strong_secrecy_audit(pair, d, g.k1, g.k2, tail).map_err(err)?;
    Ok(audit_output(report, g.h))
}

pub struct SimulateArgs<'a> {
    pub pair: &'a NestedPair64,
    pub density: &'a Density64,
    pub h1: Gain,
    pub h2: Gain,
    pub noise_grid: &'a [f64],
    pub trials: u64,
    pub seeds: &'a [u64],
    pub tail: f64,
    pub records: u64,
}

/// Noise sweep per seed. Noiseless decoding must be exact when the order
/// condition holds.
pub fn simulate(a: &SimulateArgs) -> Outcome {
    let ch: ChannelModel64 = channel(a.h1, a.h2, 0.0).map_err(err)?;
    if ch.reduced.is_none() {
        return Err(format!("gains {}, {} have no integer reduction; the relay cannot decode", a.h1, a.h2));
    }
    let setup = MacSetup::new(a.pair, a.density, &ch, a.tail).map_err(err)?;
    let grid: Vec<f64> = if a.noise_grid.is_empty() {
        vec![0.0]
    } else {
        a.noise_grid.to_vec()
    };
    let mut csv = String::from("seed,noise_var,trials,errors,rate,ci_low,ci_high\n");
    let mut sweeps = Vec::new();
    let mut passed = true;
    for &seed in a.seeds {
        let reports: Vec<MacReport> = noise_sweep(&setup, &grid, a.trials, seed).map_err(err)?;
        for r in &reports {
            writeln!(
                csv,
                "{seed},{},{},{},{},{},{}",
                r.noise_var, r.trials, r.errors, r.rate, r.ci_low, r.ci_high
            )
            .unwrap();
            if r.noise_var == 0.0 && r.order_condition && r.errors > 0 {
                passed = false;
            }
        }
        let records = if a.records > 0 {
            to_value(&trial_records(&setup, seed, a.records).map_err(err)?)
        } else {
            Value::Null
        };
        sweeps.push(json!({"seed": seed, "reports": reports, "records": records}));
    }
    let r = ch.reduced.expect("checked above");
    let json = json!({
        "index": a.pair.index(),
        "h1": a.h1,
        "h2": a.h2,
        "reduction": r,
        "order_condition": setup.order_condition(),
        "tail": a.tail,
        "sweeps": sweeps,
        "passed": passed,
    });
    Ok(Output { json, csv, passed })
}

/// Random coefficient pairs in `[-bound, bound]^n`.
pub fn random_pairs(n: usize, bound: i64, count: usize, seed: u64) -> Vec<(Vec<i64>, Vec<i64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| (0..n).map(|_| rng.random_range(-bound..=bound)).collect::<Vec<_>>();
    (0..count)
        .map(|_| {
            let u = draw(&mut rng);
            let v = draw(&mut rng);
            (u, v)
        })
        .collect()
}

/// Eavesdropper against `w = h1 u + h2 v` for each pair. Passes when every
/// pair is recovered uniquely and correctly.
pub fn attack(lattice: &Lattice64, h1: Gain, h2: Gain, bound: i64, pairs: &[(Vec<i64>, Vec<i64>)]) -> Outcome {
    let (a, b) = (h1.value(), h2.value());
    let mut records = Vec::with_capacity(pairs.len());
    let mut csv = String::from("trial,u,v,outcome,recovered\n");
    let mut unique = 0usize;
    for (trial, (u, v)) in pairs.iter().enumerate() {
        let pu = lattice.point(u);
        let pv = lattice.point(v);
        let w: Vec<f64> = pu.iter().zip(&pv).map(|(x, y)| a * x + b * y).collect();
        let outcome = eavesdrop_irrational(lattice, a, b, &w, bound).map_err(err)?;
        let truth = PointPair { u: u.clone(), v: v.clone() };
        let recovered = matches!(&outcome, Eavesdrop::Unique { pair } if *pair == truth);
        unique += usize::from(recovered);
        let label = match outcome {
            Eavesdrop::Unique { .. } => "unique",
            Eavesdrop::Ambiguous { .. } => "ambiguous",
        };
        writeln!(csv, "{trial},{},{},{label},{recovered}", join(u), join(v)).unwrap();
        records.push(json!({"trial": trial, "u": u, "v": v, "w": w, "result": outcome, "recovered": recovered}));
    }
    let passed = unique == pairs.len();
    let json = json!({
        "h1": h1,
        "h2": h2,
        "bound": bound,
        "trials": pairs.len(),
        "unique_recoveries": unique,
        "records": records,
        "passed": passed,
    });
    Ok(Output { json, csv, passed })
}

fn join(c: &[i64]) -> String {
    c.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
}

/// Decimal or `p/q` text as an exact rational.
pub fn exact_decimal(s: &str) -> Result<ExactRatio, String> {
    let t = s.trim();
    let bad = || format!("`{s}` is not a decimal or p/q rational");
    if t.contains('/') {
        return t.parse().map_err(|_| bad());
    }
    let (negative, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (mantissa, exp) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (body, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int}{frac}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut num: ExactRatio = digits.parse().map_err(|_| bad())?;
    if negative {
        num = -num;
    }
    let shift = exp - frac.len() as i32;
    let ten = ExactRatio::from_integer(10.into());
    Ok(num * num_pow(&ten, shift))
}

fn num_pow(base: &ExactRatio, e: i32) -> ExactRatio {
    let mut out = ExactRatio::from_integer(1.into());
    for _ in 0..e.unsigned_abs() {
        out *= base;
    }
    if e < 0 {
        out.recip()
    } else {
        out
    }
}

pub struct RatesArgs {
    pub mode: RateMode,
    pub alpha: Option<String>,
    pub power: f64,
    pub noise_var: f64,
    pub h1: f64,
    pub h2: f64,
    pub delta: f64,
    pub eve_noise_var: f64,
    pub k: Option<(i64, i64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RateMode {
    Perfect,
    Strong,
    Jamming,
}

pub fn rates(a: &RatesArgs) -> Outcome {
    let alpha_exact = a.alpha.as_deref().map(exact_decimal).transpose()?;
    let alpha: Option<f64> = a.alpha.as_deref().map(|s| s.parse::<f64>().or_else(|_| ratio_f64(s))).transpose()?;
    let need_alpha = || alpha.ok_or_else(|| "--alpha is required for this mode".to_string());
    let rate: Rate = match a.mode {
        RateMode::Perfect => rate_perfect(need_alpha()?, a.power, a.noise_var),
        RateMode::Strong => rate_strong(need_alpha()?, a.power, a.noise_var),
        RateMode::Jamming => rate_jamming(a.h1, a.h2, a.power, a.delta, a.noise_var, a.eve_noise_var),
    };
    let feasible = match (a.k, &alpha_exact, a.mode) {
        (Some((k1, k2)), Some(al), RateMode::Perfect) => Some(feasibility_exact(al, k1, k2, SecrecyMode::Perfect)),
        (Some((k1, k2)), Some(al), RateMode::Strong) => Some(feasibility_exact(al, k1, k2, SecrecyMode::Strong)),
        _ => None,
    };
    let mut json = json!({
        "mode": a.mode,
        "power": a.power,
        "noise_var": a.noise_var,
        "bits": rate.bits,
        "positive": rate.feasible,
    });
    if let Some(al) = alpha {
        json["alpha"] = json!(al);
    }
    let mut csv_head = String::from("mode,bits,positive");
    let mut csv_row = format!("{},{},{}", json["mode"].as_str().unwrap_or(""), rate.bits, rate.feasible);
    if let (Some(f), Some((k1, k2))) = (feasible, a.k) {
        json["k1"] = json!(k1);
        json["k2"] = json!(k2);
        json["alpha_feasible"] = json!(f);
        csv_head.push_str(",alpha_feasible");
        write!(csv_row, ",{f}").unwrap();
    }
    Ok(Output {
        json,
        csv: format!("{csv_head}\n{csv_row}\n"),
        passed: true,
    })
}

fn ratio_f64(s: &str) -> Result<f64, String> {
    let (p, q) = s.split_once('/').ok_or_else(|| format!("invalid alpha `{s}`"))?;
    let p: f64 = p.trim().parse().map_err(|_| format!("invalid alpha `{s}`"))?;
    let q: f64 = q.trim().parse().map_err(|_| format!("invalid alpha `{s}`"))?;
    Ok(p / q)
}
