use std::sync::LazyLock;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use reldft_core::functional::{f_value, h_squared_matrix, SquaredOperator};
use reldft_core::lattice::{lattice_ground, random_potential, LatticeModel};
use reldft_core::model::{
    make_even_tempered, sommerfeld_energy, validate_channel, EvenTemperedBasis, PhysicalConstants,
    SpinorCoefficients,
};
use reldft_core::numerics::{
    gauss_integral, generalized_sym_eig, minimize_rayleigh, RayleighOptions,
};
use reldft_core::observables::beta_expectation;
use reldft_core::radial::RadialSystem;

struct Hydrogen {
    sys: RadialSystem,
    sq: SquaredOperator,
    min_abs: f64,
}

static HYDROGEN: LazyLock<Hydrogen> = LazyLock::new(|| {
    let ch = validate_channel(-1).unwrap();
    let sys = RadialSystem::solve(
        EvenTemperedBasis::default_for(1.0, ch).unwrap(),
        1.0,
        PhysicalConstants::default(),
    )
    .unwrap();
    let sq = h_squared_matrix(&sys.h, &sys.s).unwrap();
    let min_abs = sys
        .spectrum
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, e| a.min(e.abs()));
    Hydrogen { sys, sq, min_abs }
});

fn coefficient_vector(dim: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-1.0..1.0f64, dim)
        .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
        .prop_map(DVector::from_vec)
}

fn kappa() -> impl Strategy<Value = i32> {
    prop_oneof![-4..=-1i32, 1..=4i32]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_moment_recurrence(n in 0u32..30, a in 0.01f64..100.0) {
        let lhs = gauss_integral(n + 2, a).unwrap();
        let rhs = (n as f64 + 1.0) / (2.0 * a) * gauss_integral(n, a).unwrap();
        prop_assert!(((lhs - rhs) / rhs).abs() <= 1e-12);
    }

    #[test]
    fn even_tempered_exponents_increase(
        alpha0 in 1e-4f64..1e3,
        ratio in 1.01f64..4.0,
        n in 2usize..60,
        k in kappa(),
    ) {
        let basis = make_even_tempered(alpha0, ratio, n, validate_channel(k).unwrap()).unwrap();
        let e = basis.exponents();
        prop_assert_eq!(e.len(), n);
        prop_assert_eq!(e[0], alpha0);
        prop_assert!(e.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn non_expanding_ratio_is_rejected(ratio in 0.0f64..=1.0) {
        prop_assert!(make_even_tempered(1.0, ratio, 3, validate_channel(-1).unwrap()).is_err());
    }

    #[test]
    fn closed_form_energy_decreases_with_charge(k in kappa(), extra in 0u32..4) {
        let ch = validate_channel(k).unwrap();
        let consts = PhysicalConstants::default();
        let n = ch.min_principal() + extra;
        let z_max = (k.unsigned_abs() as f64 * consts.c).min(100.0);
        let mut previous = f64::INFINITY;
        for z in 1..=100u32 {
            let z = z as f64;
            if z >= z_max {
                break;
            }
            let e = sommerfeld_energy(z, n, ch, &consts).unwrap();
            prop_assert!(e < previous && e > 0.0 && e <= consts.rest_energy());
            previous = e;
        }
    }

    #[test]
    fn beta_expectation_is_bounded(v in coefficient_vector(80)) {
        let h = &*HYDROGEN;
        let norm = v.dot(&(&h.sys.s * &v));
        let c = SpinorCoefficients::from_stacked(&(v / norm.sqrt()));
        let beta = beta_expectation(&c, &h.sys.blocks).unwrap();
        prop_assert!((-1.0..=1.0).contains(&beta));
    }

    #[test]
    fn functional_is_scale_invariant_and_bounded(
        v in coefficient_vector(80),
        t in prop_oneof![Just(-1.0), Just(1e-3), Just(1e3), -50.0f64..50.0],
    ) {
        prop_assume!(t != 0.0);
        let h = &*HYDROGEN;
        let f = f_value(&v, &h.sq).unwrap();
        let ft = f_value(&(&v * t), &h.sq).unwrap();
        prop_assert!(((ft - f) / f).abs() <= 1e-12);
        prop_assert!(f >= h.min_abs - 1e-10 * h.min_abs);
    }

    #[test]
    fn lattice_ground_density_is_normalized(seed in any::<u64>(), sites in 8usize..60) {
        let v = random_potential(seed, sites, 0.3, 4, &PhysicalConstants::natural()).unwrap();
        let g = lattice_ground(&LatticeModel::natural(v).unwrap()).unwrap();
        prop_assert!((g.density.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        prop_assert!(g.density.iter().all(|&n| n >= 0.0));
    }

    #[test]
    fn lattice_density_ignores_constant_shifts(seed in any::<u64>(), shift in -0.5f64..0.5) {
        let v = random_potential(seed, 40, 0.3, 4, &PhysicalConstants::natural()).unwrap();
        let a = LatticeModel::natural(v.clone()).unwrap();
        let b = a.with_potential(v.iter().map(|x| x + shift).collect()).unwrap();
        let (ga, gb) = (lattice_ground(&a).unwrap(), lattice_ground(&b).unwrap());
        prop_assert!((gb.energy - ga.energy - shift).abs() <= 1e-10);
        let d = ga.density.iter().zip(&gb.density).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        prop_assert!(d <= 1e-12);
    }

    #[test]
    fn rayleigh_minimum_is_bracketed(seed_values in prop::collection::vec(-1.0f64..1.0, 12 * 12 * 2 + 12)) {
        let n = 12;
        let a = DMatrix::from_row_slice(n, n, &seed_values[..n * n]);
        let b = DMatrix::from_row_slice(n, n, &seed_values[n * n..2 * n * n]);
        let m = a.transpose() * &a + DMatrix::identity(n, n) * 0.1;
        let s = b.transpose() * &b + DMatrix::identity(n, n);
        let init = DVector::from_column_slice(&seed_values[2 * n * n..]);
        prop_assume!(init.norm() > 1e-3);
        let out = minimize_rayleigh(&m, &s, &init, &RayleighOptions::default(), None).unwrap();
        let lowest = generalized_sym_eig(&m, &s).unwrap().eigenvalues[0];
        let q0 = init.dot(&(&m * &init)) / init.dot(&(&s * &init));
        prop_assert!(out.value >= lowest * (1.0 - 1e-12));
        prop_assert!(out.value <= q0 * (1.0 + 1e-12));
        prop_assert!(((out.value - lowest) / lowest).abs() <= 1e-8);
    }
}
