//! The squared-Hamiltonian functional `F(c) = √(cᵀMc / cᵀSc)` with
//! `M = H S⁻¹ H`, its gradient and its minimization.
//!
//! `M` is the square of the Rayleigh-Ritz operator on the basis span, so the
//! generalized eigenvalues of `(M, S)` are exactly the squares of those of
//! `(H, S)`. Minimizing `F` therefore finds the smallest `|E|`, which for a
//! subcritical Coulomb system is the physical ground state; minimizing `⟨H⟩`
//! itself instead sinks into the negative-energy branch.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{sommerfeld_energy, ModelError};
use crate::numerics::{
    cholesky_lower, generalized_sym_eig, minimize_rayleigh, NumericsError, Preconditioner,
    RayleighOptions,
};
use crate::radial::RadialSystem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("coefficient vector must be nonzero")]
    ZeroVector,
    #[error("F vanishes at this vector; the gradient of the square root is undefined")]
    NullVector,
    #[error("vector length {got} does not match operator dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone)]
pub struct SquaredOperator {
    pub m_matrix: DMatrix<f64>,
    pub s_matrix: DMatrix<f64>,
}

/// `M = Wᵀ W` with `W = L⁻¹ H` and `S = L Lᵀ`, which is `H S⁻¹ H` formed
/// without an explicit inverse and positive semidefinite by construction.
pub fn h_squared_matrix(
    h: &DMatrix<f64>,
    s: &DMatrix<f64>,
) -> Result<SquaredOperator, FunctionalError> {
    if h.shape() != s.shape() || h.nrows() != h.ncols() {
        return Err(NumericsError::DimensionMismatch(format!(
            "H is {:?}, S is {:?}",
            h.shape(),
            s.shape()
        ))
        .into());
    }
    let l = cholesky_lower(s)?;
    let w = l
        .solve_lower_triangular(h)
        .ok_or_else(|| NumericsError::InvalidArgument("singular Cholesky factor of S".into()))?;
    let m = w.transpose() * w;
    Ok(SquaredOperator {
        m_matrix: (&m + m.transpose()) * 0.5,
        s_matrix: s.clone(),
    })
}

impl SquaredOperator {
    pub fn dim(&self) -> usize {
        self.m_matrix.nrows()
    }

    fn check(&self, c: &DVector<f64>) -> Result<(), FunctionalError> {
        if c.len() != self.dim() {
            return Err(FunctionalError::DimensionMismatch {
                expected: self.dim(),
                got: c.len(),
            });
        }
        if c.iter().all(|&v| v == 0.0) {
            return Err(FunctionalError::ZeroVector);
        }
        Ok(())
    }

    /// Rayleigh quotient `q = cᵀMc / cᵀSc = F²`.
    pub fn quotient(&self, c: &DVector<f64>) -> Result<f64, FunctionalError> {
        self.check(c)?;
        Ok(c.dot(&(&self.m_matrix * c)) / c.dot(&(&self.s_matrix * c)))
    }
}

pub fn f_value(c: &DVector<f64>, sq: &SquaredOperator) -> Result<f64, FunctionalError> {
    Ok(sq.quotient(c)?.max(0.0).sqrt())
}

/// `∇F = (Mc − qSc) / (F cᵀSc)`.
///
/// `F` is invariant under `c → tc`, so the gradient is orthogonal to `c` in
/// the Euclidean sense: `cᵀ∇F = 0`.
pub fn f_gradient(c: &DVector<f64>, sq: &SquaredOperator) -> Result<DVector<f64>, FunctionalError> {
    sq.check(c)?;
    let mc = &sq.m_matrix * c;
    let sc = &sq.s_matrix * c;
    let csc = c.dot(&sc);
    let q = c.dot(&mc) / csc;
    if !(q > 0.0) {
        return Err(FunctionalError::NullVector);
    }
    let f = q.sqrt();
    Ok((mc - sc * q) / (f * csc))
}

/// Largest deviation between the analytic gradient and central differences
/// with the given step, relative to the largest finite-difference component.
pub fn gradient_check(
    c: &DVector<f64>,
    sq: &SquaredOperator,
    step: f64,
) -> Result<f64, FunctionalError> {
    let analytic = f_gradient(c, sq)?;
    let mut fd = DVector::zeros(c.len());
    let mut probe = c.clone();
    for k in 0..c.len() {
        let orig = probe[k];
        probe[k] = orig + step;
        let plus = f_value(&probe, sq)?;
        probe[k] = orig - step;
        let minus = f_value(&probe, sq)?;
        probe[k] = orig;
        fd[k] = (plus - minus) / (2.0 * step);
    }
    let scale = fd.amax().max(f64::MIN_POSITIVE);
    Ok((analytic - fd).amax() / scale)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FMinimum {
    /// S-normalized minimizer.
    pub coeffs: DVector<f64>,
    pub f_min: f64,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Minimizes `F` with a locally optimal conjugate-gradient iteration on the
/// quotient `F²`, preconditioned by `M⁻¹` when `M` is numerically definite.
///
/// Stops when `‖Mc − F²Sc‖₂ ≤ tol·‖M‖_F` and the quotient has stopped
/// decreasing; on exhaustion the error carries the best iterate.
pub fn minimize_f(
    sq: &SquaredOperator,
    init: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<FMinimum, FunctionalError> {
    sq.check(init)?;
    let options = RayleighOptions {
        tol,
        max_iter,
        ..RayleighOptions::default()
    };
    let factor = cholesky_lower(&sq.m_matrix).ok();
    let precondition = |r: &DVector<f64>| -> DVector<f64> {
        let l = factor.as_ref().expect("checked before use");
        let y = l.solve_lower_triangular(r).unwrap_or_else(|| r.clone());
        l.tr_solve_lower_triangular(&y).unwrap_or(y)
    };
    let pre: Option<Preconditioner> = if factor.is_some() {
        Some(&precondition)
    } else {
        None
    };
    let out = minimize_rayleigh(&sq.m_matrix, &sq.s_matrix, init, &options, pre)?;
    Ok(FMinimum {
        coeffs: out.vector,
        f_min: out.value.max(0.0).sqrt(),
        iterations: out.iterations,
        relative_residual: out.relative_residual,
    })
}

pub const DEFAULT_F_TOL: f64 = 1e-10;
pub const DEFAULT_F_MAX_ITER: usize = 5000;

/// Uniform entries in `[-1, 1)` from a seeded ChaCha8 stream.
pub fn random_coefficients(dim: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0))
}

/// Smallest `|λ|` of `(H, S)` by dense diagonalization.
pub fn smallest_abs_eigenvalue(h: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<f64, FunctionalError> {
    let spectrum = generalized_sym_eig(h, s)?;
    Ok(spectrum
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &e| a.min(e.abs())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseContrast {
    /// Minimum of `⟨H⟩`: the lowest eigenvalue, deep in the negative branch.
    pub min_eig_h: f64,
    /// Minimum of `F` reached by the iterative minimizer.
    pub f_min: f64,
    /// Closed-form energy of the lowest level of the channel.
    pub ground_oracle: f64,
    /// Smallest `|λ|` of `(H, S)` from dense diagonalization.
    pub dense_min_abs: f64,
    pub minimizer_iterations: usize,
}

pub fn collapse_contrast(
    system: &RadialSystem,
    init: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<CollapseContrast, FunctionalError> {
    let sq = h_squared_matrix(&system.h, &system.s)?;
    let min = minimize_f(&sq, init, tol, max_iter)?;
    let ch = system.channel();
    let ground_oracle = sommerfeld_energy(system.z, ch.min_principal(), ch, &system.constants)?;
    let spectrum = &system.spectrum;
    Ok(CollapseContrast {
        min_eig_h: spectrum.eigenvalues[0],
        f_min: min.f_min,
        ground_oracle,
        dense_min_abs: spectrum
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &e| a.min(e.abs())),
        minimizer_iterations: min.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_channel, EvenTemperedBasis, PhysicalConstants};

    fn system(z: f64) -> RadialSystem {
        let ch = validate_channel(-1).unwrap();
        RadialSystem::solve(
            EvenTemperedBasis::default_for(z, ch).unwrap(),
            z,
            PhysicalConstants::default(),
        )
        .unwrap()
    }

    #[test]
    fn diagonal_square() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -2.0]));
        let s = DMatrix::identity(2, 2);
        let sq = h_squared_matrix(&h, &s).unwrap();
        assert_eq!(
            sq.m_matrix,
            DMatrix::from_diagonal(&DVector::from_vec(vec![9.0, 4.0]))
        );
    }

    #[test]
    fn value_at_eigenvectors_and_scale_invariance() {
        let sys = system(1.0);
        let sq = h_squared_matrix(&sys.h, &sys.s).unwrap();
        let ground = sys.bound_states()[0];
        let v = sys.spectrum.vector(ground.index);
        let f = f_value(&v, &sq).unwrap();
        assert!(((f - ground.energy) / ground.energy).abs() < 1e-8);
        let c = random_coefficients(sq.dim(), 5);
        let f0 = f_value(&c, &sq).unwrap();
        for t in [-1.0, 1e-3, 1e3] {
            let ft = f_value(&(&c * t), &sq).unwrap();
            assert!(((ft - f0) / f0).abs() < 1e-12);
        }
        assert!(f0 >= ground.energy * (1.0 - 1e-12));
    }

    #[test]
    fn zero_vector_is_rejected() {
        let sys = system(1.0);
        let sq = h_squared_matrix(&sys.h, &sys.s).unwrap();
        let z = DVector::zeros(sq.dim());
        assert!(matches!(f_value(&z, &sq), Err(FunctionalError::ZeroVector)));
        assert!(matches!(
            f_gradient(&z, &sq),
            Err(FunctionalError::ZeroVector)
        ));
    }

    #[test]
    fn null_vector_gradient_is_rejected() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0]));
        let s = DMatrix::identity(2, 2);
        let sq = h_squared_matrix(&h, &s).unwrap();
        let c = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(f_value(&c, &sq).unwrap(), 0.0);
        assert!(matches!(
            f_gradient(&c, &sq),
            Err(FunctionalError::NullVector)
        ));
    }

    #[test]
    fn gradient_properties() {
        let sys = system(1.0);
        let sq = h_squared_matrix(&sys.h, &sys.s).unwrap();
        let c = random_coefficients(sq.dim(), 13);
        let err = gradient_check(&c, &sq, 1e-5).unwrap();
        assert!(err <= 1e-6, "{err}");
        let g = f_gradient(&c, &sq).unwrap();
        let rel = c.dot(&g).abs() / (c.norm() * g.norm());
        assert!(rel < 1e-10, "{rel}");
    }

    #[test]
    fn minimizer_finds_ground_state() {
        let sys = system(1.0);
        let sq = h_squared_matrix(&sys.h, &sys.s).unwrap();
        let init = random_coefficients(sq.dim(), 3);
        let min = minimize_f(&sq, &init, DEFAULT_F_TOL, DEFAULT_F_MAX_ITER).unwrap();
        let ground = sys.bound_states()[0];
        assert!(((min.f_min - ground.energy) / ground.energy).abs() < 1e-8);
        let v = sys.spectrum.vector(ground.index);
        let overlap = min.coeffs.dot(&(&sys.s * v)).abs();
        assert!(overlap >= 1.0 - 1e-6, "{overlap}");
    }

    #[test]
    fn minimizer_fixed_point() {
        let sys = system(1.0);
        let sq = h_squared_matrix(&sys.h, &sys.s).unwrap();
        let ground = sys.bound_states()[0];
        let v = sys.spectrum.vector(ground.index);
        let min = minimize_f(&sq, &v, DEFAULT_F_TOL, DEFAULT_F_MAX_ITER).unwrap();
        assert_eq!(min.iterations, 0);
        assert!(((min.f_min - ground.energy) / ground.energy).abs() < 1e-12);
    }

    #[test]
    fn exhausted_minimizer_reports_best_iterate() {
        let sys = system(1.0);
        let sq = h_squared_matrix(&sys.h, &sys.s).unwrap();
        let init = random_coefficients(sq.dim(), 3);
        match minimize_f(&sq, &init, DEFAULT_F_TOL, 0) {
            Err(FunctionalError::Numerics(NumericsError::NotConverged(best))) => {
                assert_eq!(best.iterations, 0);
                assert!(best.value > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn collapse_contrast_ordering() {
        for z in [1.0, 80.0] {
            let sys = system(z);
            let init = random_coefficients(sys.h.nrows(), 3);
            let rep = collapse_contrast(&sys, &init, DEFAULT_F_TOL, DEFAULT_F_MAX_ITER).unwrap();
            let mc2 = sys.constants.rest_energy();
            assert!(rep.min_eig_h <= -mc2);
            assert!(rep.f_min > 0.0 && rep.f_min < mc2);
            let rel = ((rep.f_min - rep.ground_oracle) / rep.ground_oracle).abs();
            assert!(rel < 1e-6, "Z={z}: {rel}");
        }
    }
}
