use nalgebra::DMatrix;
use reldft_core::functional::{
    collapse_contrast, f_gradient, f_value, gradient_check, h_squared_matrix, minimize_f,
    random_coefficients, smallest_abs_eigenvalue, DEFAULT_F_MAX_ITER, DEFAULT_F_TOL,
};
use reldft_core::model::{
    sommerfeld_energy, validate_channel, EvenTemperedBasis, PhysicalConstants,
};
use reldft_core::numerics::generalized_sym_eig;
use reldft_core::radial::RadialSystem;

fn system(z: f64, kappa: i32) -> RadialSystem {
    let ch = validate_channel(kappa).unwrap();
    RadialSystem::solve(
        EvenTemperedBasis::default_for(z, ch).unwrap(),
        z,
        PhysicalConstants::default(),
    )
    .unwrap()
}

#[test]
fn squared_spectrum_is_the_square_of_the_spectrum() {
    for (z, kappa) in [
        (0.0, -1),
        (1.0, -1),
        (20.0, -1),
        (80.0, -1),
        (1.0, 1),
        (50.0, -2),
    ] {
        let sys = system(z, kappa);
        let sq = h_squared_matrix(&sys.h, &sys.s).unwrap();
        let mu = generalized_sym_eig(&sq.m_matrix, &sq.s_matrix)
            .unwrap()
            .eigenvalues;
        let mut squares: Vec<f64> = sys.spectrum.eigenvalues.iter().map(|e| e * e).collect();
        squares.sort_by(f64::total_cmp);
        let worst = mu
            .iter()
            .zip(&squares)
            .fold(0.0_f64, |acc, (m, s)| acc.max(((m - s) / s).abs()));
        assert!(worst <= 1e-10, "Z={z} kappa={kappa}: {worst:e}");
        let f_min = mu[0].sqrt();
        let dense = smallest_abs_eigenvalue(&sys.h, &sys.s).unwrap();
        assert!(((f_min - dense) / dense).abs() <= 1e-10);
    }
}

fn projector(v: &DMatrix<f64>, s: &DMatrix<f64>) -> DMatrix<f64> {
    v * v.transpose() * s
}

#[test]
fn eigenvectors_span_the_same_subspaces() {
    let sys = system(1.0, -1);
    let sq = h_squared_matrix(&sys.h, &sys.s).unwrap();
    let m_spec = generalized_sym_eig(&sq.m_matrix, &sq.s_matrix).unwrap();
    // the ground state is the smallest |E| and nondegenerate
    let ground = sys.bound_states()[0];
    let p_h = projector(
        &sys.spectrum
            .eigenvectors
            .columns(ground.index, 1)
            .into_owned(),
        &sys.s,
    );
    let p_m = projector(&m_spec.eigenvectors.columns(0, 1).into_owned(), &sys.s);
    let dist = (p_h - p_m).amax();
    assert!(dist <= 1e-8, "{dist:e}");
}

#[test]
fn gradient_agrees_with_finite_differences() {
    let sys = system(1.0, -1);
    let sq = h_squared_matrix(&sys.h, &sys.s).unwrap();
    for seed in 100..110 {
        let c = random_coefficients(sq.dim(), seed);
        let err = gradient_check(&c, &sq, 1e-5).unwrap();
        assert!(err <= 1e-6, "seed {seed}: {err:e}");
    }
}

#[test]
fn gradient_vanishes_at_the_ground_state() {
    let sys = system(1.0, -1);
    let sq = h_squared_matrix(&sys.h, &sys.s).unwrap();
    // lowest eigenvector of (M, S): the stationary point of F itself
    let m_spec = generalized_sym_eig(&sq.m_matrix, &sq.s_matrix).unwrap();
    let g = f_gradient(&m_spec.vector(0), &sq).unwrap();
    assert!(g.norm() <= 1e-8, "{:e}", g.norm());
    // the (H, S) eigenvector is the same state up to rounding amplified by ‖M‖
    let ground = sys.bound_states()[0];
    let g = f_gradient(&sys.spectrum.vector(ground.index), &sq).unwrap();
    assert!(g.norm() <= 1e-20 * sq.m_matrix.norm(), "{:e}", g.norm());
}

#[test]
fn minimizer_agrees_with_diagonalization_for_many_seeds() {
    let sys = system(1.0, -1);
    let sq = h_squared_matrix(&sys.h, &sys.s).unwrap();
    let dense = smallest_abs_eigenvalue(&sys.h, &sys.s).unwrap();
    for seed in 0..20 {
        let init = random_coefficients(sq.dim(), seed);
        let min = minimize_f(&sq, &init, DEFAULT_F_TOL, DEFAULT_F_MAX_ITER).unwrap();
        let rel = ((min.f_min - dense) / dense).abs();
        assert!(rel <= 1e-8, "seed {seed}: {rel:e}");
        assert!(min.f_min <= f_value(&init, &sq).unwrap());
    }
}

#[test]
fn free_particle_minimum_is_above_the_rest_energy() {
    let sys = system(0.0, -1);
    let sq = h_squared_matrix(&sys.h, &sys.s).unwrap();
    let dense = smallest_abs_eigenvalue(&sys.h, &sys.s).unwrap();
    let min = minimize_f(
        &sq,
        &random_coefficients(sq.dim(), 3),
        DEFAULT_F_TOL,
        DEFAULT_F_MAX_ITER,
    )
    .unwrap();
    assert!(min.f_min >= sys.constants.rest_energy() * (1.0 - 1e-12));
    assert!(((min.f_min - dense) / dense).abs() <= 1e-8);
}

#[test]
fn contrast_report_against_closed_form() {
    for z in [1.0, 20.0, 80.0] {
        let sys = system(z, -1);
        let init = random_coefficients(sys.h.nrows(), 3);
        let rep = collapse_contrast(&sys, &init, DEFAULT_F_TOL, DEFAULT_F_MAX_ITER).unwrap();
        let mc2 = sys.constants.rest_energy();
        assert!(rep.min_eig_h <= -mc2);
        let oracle =
            sommerfeld_energy(z, 1, validate_channel(-1).unwrap(), &sys.constants).unwrap();
        assert_eq!(rep.ground_oracle, oracle);
        assert!(((rep.f_min - oracle) / oracle).abs() <= 1e-6);
        assert!(((rep.f_min - rep.dense_min_abs) / rep.dense_min_abs).abs() <= 1e-8);
    }
}
