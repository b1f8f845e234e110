use carpet_core::eigensolve::{
    carpet_spectrum, dense_eigenvalues, inertia_count, slice_spectrum, DenseOptions, SliceOptions, SolverSettings,
};
use carpet_core::{ApproxGraph, BoundaryCondition, CarpetSpec, SparseSymmetric, Spectrum};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixtures() -> Vec<(CarpetSpec, usize)> {
    vec![
        (CarpetSpec::preset("SC31").unwrap(), 2),
        (CarpetSpec::preset("SC31").unwrap(), 3),
        (CarpetSpec::preset("MS31").unwrap(), 2),
        (CarpetSpec::preset("MS42").unwrap(), 2),
        (CarpetSpec::menger(2, 5, 1).unwrap(), 2),
    ]
}

fn dense(m: &SparseSymmetric) -> Vec<f64> {
    dense_eigenvalues(m, &DenseOptions::default()).unwrap().eigenvalues
}

#[test]
fn laplacian_structure() {
    for (spec, level) in fixtures() {
        let g = ApproxGraph::build(&spec, level).unwrap();
        assert_eq!(g.components(), 1);
        let n = g.laplacian(BoundaryCondition::Neumann).unwrap();
        assert!(n.is_symmetric());
        let ones = vec![1.0; n.order()];
        assert!(n.mul(&ones).iter().all(|&v| v == 0.0));
        let max_degree = *g.degrees().iter().max().unwrap() as f64;
        let eigs = dense(&n);
        let scale = 2.0 * max_degree;
        assert!(eigs[0].abs() < 1e-10 * scale);
        assert!(eigs[1] > 1e-8, "kernel is one-dimensional");
        assert!(eigs.iter().all(|&x| x >= -1e-10 * scale && x <= scale * (1.0 + 1e-12)));

        let d = g.laplacian(BoundaryCondition::Dirichlet).unwrap();
        assert!(d.is_symmetric());
        let de = dense(&d);
        assert!(de[0] > 0.0);
        assert!(de.iter().all(|&x| x <= scale * (1.0 + 1e-12)));
    }
}

#[test]
fn periodic_is_rejected_on_carpets() {
    let g = ApproxGraph::build(&CarpetSpec::preset("SC31").unwrap(), 2).unwrap();
    assert!(g.laplacian(BoundaryCondition::Periodic).is_err());
}

#[test]
fn dense_and_sliced_agree_on_carpets() {
    for (spec, level) in fixtures() {
        for bc in [BoundaryCondition::Neumann, BoundaryCondition::Dirichlet] {
            let m = ApproxGraph::build(&spec, level).unwrap().laplacian(bc).unwrap();
            if m.order() > 2000 {
                continue;
            }
            let d = dense(&m);
            let s = slice_spectrum(&m, 0.0, d[d.len() - 1] + 1.0, &SliceOptions::default()).unwrap();
            assert!(s.complete);
            assert_eq!(s.eigenvalues.len(), d.len());
            for (a, b) in s.eigenvalues.iter().zip(&d) {
                assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
    }
}

#[test]
fn inertia_matches_dense_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (spec, level) in fixtures() {
        let m = ApproxGraph::build(&spec, level)
            .unwrap()
            .laplacian(BoundaryCondition::Dirichlet)
            .unwrap();
        let eigs = dense(&m);
        let s = Spectrum::new(eigs.clone(), BoundaryCondition::Dirichlet).unwrap();
        let top = eigs[eigs.len() - 1];
        for _ in 0..100 {
            let sigma = rng.gen_range(-0.5..top + 0.5);
            // Skip shifts that land on an eigenvalue to rounding.
            if eigs.iter().any(|&x| (x - sigma).abs() < 1e-9) {
                continue;
            }
            assert_eq!(inertia_count(&m, sigma).unwrap(), s.counting_function(sigma, false), "sigma {sigma}");
        }
    }
}

#[test]
fn trace_identity_and_interlacing() {
    for (spec, level) in fixtures() {
        let m = ApproxGraph::build(&spec, level)
            .unwrap()
            .laplacian(BoundaryCondition::Neumann)
            .unwrap();
        let eigs = dense(&m);
        let sum: f64 = eigs.iter().sum();
        assert!((sum - m.trace()).abs() <= 1e-8 * m.trace());
        for drop in [0, m.order() / 2, m.order() - 1] {
            let keep: Vec<bool> = (0..m.order()).map(|i| i != drop).collect();
            let sub = dense(&m.principal_submatrix(&keep));
            let tol = 1e-9 * eigs[eigs.len() - 1];
            for i in 0..sub.len() {
                assert!(eigs[i] <= sub[i] + tol && sub[i] <= eigs[i + 1] + tol, "interlacing at {i}");
            }
        }
    }
}

#[test]
fn carpet_spectrum_records_provenance() {
    let spec = CarpetSpec::preset("SC31").unwrap();
    let s = carpet_spectrum(&spec, 2, BoundaryCondition::Neumann, &SolverSettings::default()).unwrap();
    assert_eq!(s.len(), 64);
    assert_eq!(s.level, Some(2));
    assert_eq!(s.spec_hash, spec.spec_hash());
    assert_eq!(s.zero_modes(), 1);
    // Forcing the sliced path changes nothing but the label.
    let settings = SolverSettings { dense_cap: 10, ..SolverSettings::default() };
    let t = carpet_spectrum(&spec, 2, BoundaryCondition::Neumann, &settings).unwrap();
    assert!(t.solver.starts_with("slice"));
    for (a, b) in s.eigenvalues().iter().zip(t.eigenvalues()) {
        assert!((a - b).abs() < 1e-8);
    }
}

/// Random sparse symmetric matrices with a diagonal shift.
fn sparse_matrix() -> impl Strategy<Value = SparseSymmetric> {
    (2usize..40, any::<u64>()).prop_map(|(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, rng.gen_range(-3.0..3.0)));
            for j in 0..i {
                if rng.gen_bool(0.15) {
                    let v = rng.gen_range(-1.0..1.0);
                    t.push((i, j, v));
                    t.push((j, i, v));
                }
            }
        }
        SparseSymmetric::from_triplets(n, &t).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_matrices_dense_vs_slice(m in sparse_matrix()) {
        let d = dense(&m);
        let lo = m.gershgorin_lower() - 1.0;
        let hi = m.gershgorin_bound() + 1.0;
        let s = slice_spectrum(&m, lo, hi, &SliceOptions::default()).unwrap();
        prop_assert_eq!(s.eigenvalues.len(), d.len());
        for (a, b) in s.eigenvalues.iter().zip(&d) {
            prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
        }
        let sum: f64 = d.iter().sum();
        prop_assert!((sum - m.trace()).abs() <= 1e-8 * m.frobenius_norm().max(1.0) * (m.order() as f64));
    }

    #[test]
    fn random_matrices_inertia(m in sparse_matrix(), u in 0.0f64..1.0) {
        let d = dense(&m);
        let sigma = d[0] - 0.5 + u * (d[d.len() - 1] - d[0] + 1.0);
        prop_assume!(d.iter().all(|&x| (x - sigma).abs() > 1e-8));
        let below = d.iter().filter(|&&x| x < sigma).count();
        prop_assert_eq!(inertia_count(&m, sigma).unwrap(), below);
    }
}
