use std::f64::consts::PI;

use carpet_core::oracle::{box_spectrum, interval_trace_exact, BoxSpec};
use carpet_core::trace::heat_trace;
use carpet_core::BoundaryCondition;
use proptest::prelude::*;

/// Modes of a Dirichlet box below `cutoff`, counted by nested loops.
fn brute_count(sides: &[f64], cutoff: f64) -> usize {
    let k = |a: f64| PI / a;
    let max = |a: f64| (cutoff.sqrt() / k(a)).floor() as usize + 1;
    let mut count = 0;
    let (a, b, c) = (sides[0], sides[1], sides[2]);
    for i in 1..=max(a) {
        for j in 1..=max(b) {
            for l in 1..=max(c) {
                let e = (i as f64 * k(a)).powi(2) + (j as f64 * k(b)).powi(2) + (l as f64 * k(c)).powi(2);
                if e <= cutoff {
                    count += 1;
                }
            }
        }
    }
    count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn box_count_matches_loops(a in 0.5f64..2.0, b in 0.5f64..2.0, c in 0.5f64..2.0, cutoff in 50.0f64..3000.0) {
        let spec = box_spectrum(&BoxSpec::new(vec![a, b, c], BoundaryCondition::Dirichlet).unwrap(), cutoff).unwrap();
        prop_assert_eq!(spec.len(), brute_count(&[a, b, c], cutoff));
    }

    #[test]
    fn box_trace_factorizes(a in 0.5f64..2.0, b in 0.5f64..2.0, t in 0.02f64..1.0) {
        // Tail beyond the cutoff is below e^{-cutoff t} times a polynomial.
        let cutoff = 40.0 / 0.02;
        let spec = box_spectrum(&BoxSpec::new(vec![a, b], BoundaryCondition::Dirichlet).unwrap(), cutoff).unwrap();
        let k = heat_trace(&spec, &[t]).unwrap().value[0];
        let want = interval_trace_exact(t / (a * a)) * interval_trace_exact(t / (b * b));
        prop_assert!((k - want).abs() <= 1e-10 * want, "{} vs {}", k, want);
    }
}
