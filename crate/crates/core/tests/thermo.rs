use std::f64::consts::PI;

use carpet_core::oracle::{box_spectrum, euclid_blackbody, synthetic_weyl_spectrum, BoxSpec};
use carpet_core::thermo::{
    blackbody, condensate_density, critical_densities, free_energy_density, particle_density, solve_fugacity,
    GasState, Source,
};
use carpet_core::{BoundaryCondition, HeatTraceModel, Spectrum};
use proptest::prelude::*;

fn cube(d: usize, beta: f64) -> Spectrum {
    let b = BoxSpec::cube(d, 1.0, BoundaryCondition::Periodic).unwrap();
    box_spectrum(&b, 60.0 / beta).unwrap()
}

#[test]
fn spectrum_and_model_paths_agree() {
    for (d, beta) in [(2usize, 2e-3), (3, 5e-3)] {
        let s = cube(d, beta);
        let m = HeatTraceModel::euclidean(d);
        for z in [0.2, 0.6, 0.9] {
            let st = GasState::new(beta, z, 1.0).unwrap();
            let a = particle_density(&st, Source::Spectrum { spectrum: &s, volume: 1.0 }).unwrap().value().unwrap();
            let b = particle_density(&st, Source::Model(&m)).unwrap().value().unwrap();
            assert!((a / b - 1.0).abs() < 0.02, "d={d} z={z}: {a} vs {b}");
            let fa = free_energy_density(&st, Source::Spectrum { spectrum: &s, volume: 1.0 }).unwrap().value().unwrap();
            let fb = free_energy_density(&st, Source::Model(&m)).unwrap().value().unwrap();
            assert!((fa / fb - 1.0).abs() < 0.02, "d={d} z={z}: {fa} vs {fb}");
        }
    }
}

#[test]
fn photon_equation_of_state() {
    for d in 1..=4 {
        let m = HeatTraceModel::euclidean(d);
        for beta in [0.3, 1.0, 4.0] {
            let b = blackbody(&m, beta, 10.0).unwrap();
            assert_eq!(b.pressure, b.energy_density / d as f64);
            assert!((b.energy_density / euclid_blackbody(d, beta).unwrap() - 1.0).abs() < 1e-12);
        }
    }
    let m = HeatTraceModel { period: 1.7, ..HeatTraceModel::constant(1.86, 0.2) }
        .with_fourier_pair(0, 1, num_complex::Complex64::new(3e-3, -1e-3));
    let b = blackbody(&m, 0.8, 3.0).unwrap();
    assert_eq!(b.pressure, b.energy_density / 1.86);
}

/// Supercritical density on a synthetic `d_s = 2.5` level sequence: the
/// ground-referenced fugacity climbs to 1 and the condensate absorbs the excess.
#[test]
fn supercritical_sequence_condenses() {
    let (d_s, beta) = (2.5, 1.0);
    let g00 = (4.0 * PI).powf(-0.5 * d_s);
    let model = HeatTraceModel::constant(d_s, g00);
    let rho_c = critical_densities(&model, beta).unwrap().0.value().unwrap();
    let target = 1.5 * rho_c;
    let s = synthetic_weyl_spectrum(d_s, g00, 40.0 * 243.0 * 243.0).unwrap();
    let mut zs = Vec::new();
    let mut misses = Vec::new();
    for n in 2..=5 {
        let l = 3f64.powi(n);
        let src = Source::Spectrum { spectrum: &s, volume: l.powf(d_s) };
        let f = solve_fugacity(target, beta, l, src).unwrap();
        let st = GasState::from_log_z(beta, f.log_z, l).unwrap();
        let cond = condensate_density(&st, &s, l.powf(d_s)).unwrap().value().unwrap();
        let at_one = particle_density(&GasState::new(beta, 1.0, l).unwrap(), src).unwrap().value().unwrap();
        // Fugacity measured from the ground level, z e^{-beta E_0 / L^2}.
        zs.push((-f.gap).exp());
        misses.push((cond + at_one - target).abs());
    }
    assert!(zs.windows(2).all(|w| w[1] > w[0]) && zs[3] < 1.0, "{zs:?}");
    assert!(misses.windows(2).all(|w| w[1] < w[0]), "{misses:?}");
    assert!(misses[3] < 0.1 * target, "{misses:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn density_increasing_and_free_energy_decreasing(
        beta in 1e-3f64..1.0,
        u1 in 0.0f64..1.0,
        u2 in 0.0f64..1.0,
    ) {
        let s = Spectrum::new((1..300).map(|j| (j * j) as f64 * PI * PI).collect(), BoundaryCondition::Dirichlet).unwrap();
        let ceiling = beta * s.smallest();
        let (lo, hi) = if u1 < u2 { (u1, u2) } else { (u2, u1) };
        prop_assume!(hi - lo > 1e-6);
        let st = |u: f64| GasState::from_log_z(beta, ceiling - 30.0 * (1.0 - u), 1.0).unwrap();
        let src = Source::Spectrum { spectrum: &s, volume: 1.0 };
        let (a, b) = (st(lo), st(hi));
        let ra = particle_density(&a, src).unwrap().value().unwrap();
        let rb = particle_density(&b, src).unwrap().value().unwrap();
        prop_assert!(rb > ra);
        let fa = free_energy_density(&a, src).unwrap().value().unwrap();
        let fb = free_energy_density(&b, src).unwrap().value().unwrap();
        prop_assert!(fb < fa);
    }
}
