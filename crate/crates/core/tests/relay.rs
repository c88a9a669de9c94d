use std::collections::HashSet;

use latticeguard::construction_a::{nested_pair_from_codes, LinearCode};
use latticeguard::encoding::Density;
use latticeguard::lattice::{Lattice, NestedPair};
use latticeguard::relay::{
    eavesdrop_irrational, rate_jamming, rate_perfect, rate_strong, reduce_gains, trial_records, wilson_interval,
    ChannelModel, Eavesdrop, MacSetup, Reduction, DEFAULT_MAX_DEN, DEFAULT_TOL,
};
use proptest::prelude::*;

fn pair_a12() -> NestedPair<f64> {
    let c0 = LinearCode::zero(5, 2).unwrap();
    let c = LinearCode::new(5, 2, vec![vec![1, 2]]).unwrap();
    nested_pair_from_codes(&c0, &c, 1.0).unwrap().0
}

/// `k` times `a` through the addition table alone.
fn table_mul(table: &[u32], m: usize, k: i64, a: usize) -> usize {
    let step = if k >= 0 {
        a
    } else {
        (0..m).find(|&b| table[a * m + b] == 0).unwrap()
    };
    let mut acc = 0usize;
    for _ in 0..k.unsigned_abs() {
        acc = table[acc * m + step] as usize;
    }
    acc
}

#[test]
fn noiseless_decoding_matches_the_group_law() {
    let pair = pair_a12();
    let m = pair.index();
    let table = pair.add_table().expect("small quotient").to_vec();
    for (k1, k2) in [(1i64, 2i64), (2, 3), (-1, 4)] {
        // every (x, y), with several coarse translates of each representative
        for x in 0..m {
            for y in 0..m {
                let want = table[table_mul(&table, m, k1, x) * m + table_mul(&table, m, k2, y)] as usize;
                for (s, t) in [(0i64, 0i64), (1, -2), (-3, 1)] {
                    let rel = pair.relation();
                    let shift = |base: &[i64], c: i64| -> Vec<i64> {
                        base.iter().zip(&rel[0]).zip(&rel[1]).map(|((b, r0), r1)| b + c * r0 - 2 * c * r1).collect()
                    };
                    let u = pair.fine().point(&shift(&pair.rep(x).coeffs, s));
                    let v = pair.fine().point(&shift(&pair.rep(y).coeffs, t));
                    let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| k1 as f64 * a + k2 as f64 * b).collect();
                    let cp = pair.fine().closest_point(&w).unwrap();
                    assert_eq!(pair.label_of_coeffs(&cp.coeffs), want, "k=({k1},{k2}) x={x} y={y}");
                }
            }
        }
    }
}

#[test]
fn simulated_trials_cover_the_grid() {
    let pair = pair_a12();
    let m = pair.index();
    let table = pair.add_table().unwrap().to_vec();
    let d = Density::gaussian_power(25.0).unwrap();
    let ch = ChannelModel::new(0.5, 1.0, 0.0).unwrap();
    let setup = MacSetup::new(&pair, &d, &ch, 1e-9).unwrap();
    let recs = trial_records(&setup, 4, 1000).unwrap();
    let mut seen = HashSet::new();
    for r in &recs {
        let want = table[table_mul(&table, m, 1, r.x) * m + table_mul(&table, m, 2, r.y)] as usize;
        assert_eq!(r.expected, want);
        assert!(r.correct, "{r:?}");
        seen.insert((r.x, r.y));
    }
    assert_eq!(seen.len(), m * m);
    // records are reproducible trial by trial
    assert_eq!(setup.trial(4, 17).unwrap(), recs[17]);
}

#[test]
fn rational_gains_are_ambiguous() {
    let z = Lattice::<f64>::integer(1);
    let mut ambiguous = 0;
    for u in -10i64..=10 {
        for v in [-3i64, 0, 5] {
            let w = [u as f64 + 2.0 * v as f64];
            if let Eavesdrop::Ambiguous { candidates } = eavesdrop_irrational(&z, 1.0, 2.0, &w, 10).unwrap() {
                assert!(candidates.iter().any(|c| c.u == vec![u] && c.v == vec![v]));
                ambiguous += 1;
            }
        }
    }
    assert_eq!(ambiguous, 63);
}

#[test]
fn wilson_interval_contains_the_rate() {
    for (e, n) in [(0u64, 100u64), (5, 100), (50, 100), (100, 100)] {
        let (lo, hi) = wilson_interval(e, n);
        let p = e as f64 / n as f64;
        assert!(lo <= p && p <= hi);
        assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
    }
    assert_eq!(wilson_interval(0, 10).0, 0.0);
    assert_eq!(wilson_interval(10, 10).1, 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reduction_recovers_scaled_integers(k1 in -50i64..50, k2 in 1i64..50, h in 0.05f64..20.0) {
        prop_assume!(k1 != 0 && num_integer::gcd(k1, k2) == 1);
        let r = reduce_gains(h * k1 as f64, h * k2 as f64, DEFAULT_MAX_DEN, DEFAULT_TOL).unwrap();
        let Reduction::Reduced(r) = r else {
            return Err(TestCaseError::fail("irreducible"));
        };
        prop_assert_eq!((r.k1, r.k2), (k1, k2));
        prop_assert!((r.h - h).abs() <= 1e-12 * h);
        // a common rescaling of both gains gives the same integers
        let s = reduce_gains(3.0 * h * k1 as f64, 3.0 * h * k2 as f64, DEFAULT_MAX_DEN, DEFAULT_TOL).unwrap();
        prop_assert!(matches!(s, Reduction::Reduced(q) if (q.k1, q.k2) == (k1, k2)));
        prop_assert!(ChannelModel::new(h * k1 as f64, h * k2 as f64, 0.1).is_ok());
    }

    #[test]
    fn irrational_eavesdropper_is_exact(u in prop::array::uniform2(-10i64..=10), v in prop::array::uniform2(-10i64..=10), g in 0usize..3) {
        let gain = [2f64.sqrt(), 3f64.sqrt(), std::f64::consts::PI][g];
        let z2 = Lattice::<f64>::integer(2);
        let w = [u[0] as f64 + gain * v[0] as f64, u[1] as f64 + gain * v[1] as f64];
        match eavesdrop_irrational(&z2, 1.0, gain, &w, 10).unwrap() {
            Eavesdrop::Unique { pair } => {
                prop_assert_eq!(pair.u, u.to_vec());
                prop_assert_eq!(pair.v, v.to_vec());
            }
            Eavesdrop::Ambiguous { .. } => return Err(TestCaseError::fail("ambiguous")),
        }
    }

    #[test]
    fn rate_gap_is_constant(alpha in 0.01f64..1.0, snr in 1.0f64..1e6) {
        let gap = rate_strong(alpha, snr, 1.0).bits - rate_perfect(alpha, snr, 1.0).bits;
        prop_assert!((gap - (1.0 + 0.5 * std::f64::consts::LOG2_E)).abs() < 1e-9);
        let p = rate_perfect(alpha, snr, 1.0);
        prop_assert_eq!(p.feasible, p.bits > 0.0);
    }

    #[test]
    fn jamming_rate_matches_formula(h1 in 0.1f64..3.0, h2 in 0.1f64..3.0, p in 1.0f64..1e4, delta in 0.0f64..0.5) {
        let got = rate_jamming(h1, h2, p, delta, 1.0, 2.0).bits;
        let a = (1.0 + h1 * h1 * p / (2.0 * delta * delta * p + 1.0)).log2();
        let b = (1.0 + h1 * h1 * p / (h2 * h2 * p + 2.0)).log2();
        prop_assert!((got - (0.25 * a - 0.25 * b - 0.5 * std::f64::consts::LOG2_E)).abs() < 1e-12);
    }
}
