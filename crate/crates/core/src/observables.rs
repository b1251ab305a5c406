//! Energy from the Dirac β expectation and from the β-weighted radial density.
//!
//! For a stationary state of a Coulomb Hamiltonian the relativistic virial
//! theorem gives `E = mc²⟨β⟩`. The same expectation written as a radial
//! integral is `E = mc² N ∫ (P² − Q²) dr`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::model::{EvenTemperedBasis, PhysicalConstants, SpinorCoefficients};
use crate::numerics::DEFAULT_QUADRATURE_NODES;
use crate::numerics::{build_quadrature, NumericsError, QuadratureGrid, SpectrumResult};
use crate::radial::{bound_states, evaluate_amplitudes, MatrixSet};

/// Allowed deviation of `⟨ψ|S|ψ⟩` from one.
pub const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("spinor is not normalized: <psi|S|psi> = {norm}")]
    NotNormalized { norm: f64 },
    #[error("coefficient lengths ({large}, {small}) do not match the basis size {basis}")]
    DimensionMismatch {
        large: usize,
        small: usize,
        basis: usize,
    },
    #[error(
        "quadrature with {nodes} nodes integrates the density to {quadrature_norm} instead of {algebraic_norm}; use more nodes"
    )]
    QuadratureTooCoarse {
        nodes: usize,
        quadrature_norm: f64,
        algebraic_norm: f64,
    },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn quadratic(m: &DMatrix<f64>, v: &nalgebra::DVector<f64>) -> f64 {
    v.dot(&(m * v))
}

fn check_lengths(coeffs: &SpinorCoefficients, n: usize) -> Result<(), ObservableError> {
    if coeffs.large.len() != n || coeffs.small.len() != n {
        return Err(ObservableError::DimensionMismatch {
            large: coeffs.large.len(),
            small: coeffs.small.len(),
            basis: n,
        });
    }
    Ok(())
}

/// Large- and small-component norms `(c_Lᵀ S_LL c_L, c_Sᵀ S_SS c_S)`.
pub fn component_norms(
    coeffs: &SpinorCoefficients,
    blocks: &MatrixSet,
) -> Result<(f64, f64), ObservableError> {
    check_lengths(coeffs, blocks.dim())?;
    Ok((
        quadratic(&blocks.s_ll, &coeffs.large),
        quadratic(&blocks.s_ss, &coeffs.small),
    ))
}

/// `⟨β⟩ = c_Lᵀ S_LL c_L − c_Sᵀ S_SS c_S` for an S-normalized spinor.
pub fn beta_expectation(
    coeffs: &SpinorCoefficients,
    blocks: &MatrixSet,
) -> Result<f64, ObservableError> {
    let (large, small) = component_norms(coeffs, blocks)?;
    let norm = large + small;
    if !((norm - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(ObservableError::NotNormalized { norm });
    }
    Ok(large - small)
}

/// `mc²⟨β⟩`. Only meaningful for Coulomb eigenstates.
pub fn virial_energy(
    coeffs: &SpinorCoefficients,
    blocks: &MatrixSet,
    constants: &PhysicalConstants,
) -> Result<f64, ObservableError> {
    Ok(constants.rest_energy() * beta_expectation(coeffs, blocks)?)
}

/// Radial density `n = P² + Q²` and β-weighted density `n_β = P² − Q²` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub grid: QuadratureGrid,
    pub n: Vec<f64>,
    pub n_beta: Vec<f64>,
}

impl DensityProfile {
    /// `Σ w_k n(r_k)`.
    pub fn norm(&self) -> f64 {
        self.grid.sum_samples(&self.n)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            n: self.n.iter().map(|v| v * factor).collect(),
            n_beta: self.n_beta.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Default radial grid for charge `z`: 400 mapped Gauss-Legendre nodes, scale `1/Z`.
pub fn default_grid(z: f64) -> Result<QuadratureGrid, ObservableError> {
    Ok(build_quadrature(
        DEFAULT_QUADRATURE_NODES,
        1.0 / z.max(1.0),
    )?)
}

pub fn radial_density(
    coeffs: &SpinorCoefficients,
    basis: &EvenTemperedBasis,
    blocks: &MatrixSet,
    grid: &QuadratureGrid,
) -> Result<DensityProfile, ObservableError> {
    let (large, small) = component_norms(coeffs, blocks)?;
    let algebraic_norm = large + small;
    if !((algebraic_norm - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(ObservableError::NotNormalized {
            norm: algebraic_norm,
        });
    }
    let mut n = Vec::with_capacity(grid.len());
    let mut n_beta = Vec::with_capacity(grid.len());
    for &r in grid.nodes() {
        let (g, f) = evaluate_amplitudes(basis, blocks, coeffs, r);
        n.push(g * g + f * f);
        n_beta.push(g * g - f * f);
    }
    let profile = DensityProfile {
        grid: grid.clone(),
        n,
        n_beta,
    };
    let quadrature_norm = profile.norm();
    if !((quadrature_norm - algebraic_norm).abs() <= NORMALIZATION_TOL) {
        return Err(ObservableError::QuadratureTooCoarse {
            nodes: grid.len(),
            quadrature_norm,
            algebraic_norm,
        });
    }
    Ok(profile)
}

/// `mc² N Σ w_k n_β(r_k)`.
pub fn energy_from_density(
    profile: &DensityProfile,
    constants: &PhysicalConstants,
    n_electrons: u32,
) -> f64 {
    constants.rest_energy() * n_electrons as f64 * profile.grid.sum_samples(&profile.n_beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VirialRow {
    /// Position among the bound states (0 = lowest).
    pub state: usize,
    /// Column of the eigenvector matrix.
    pub index: usize,
    pub energy: f64,
    pub virial_energy: f64,
    /// `|E − mc²⟨β⟩| / |E|`
    pub relative_residual: f64,
}

/// One row per bound state comparing the eigenvalue with `mc²⟨β⟩`.
pub fn virial_report(
    spectrum: &SpectrumResult,
    blocks: &MatrixSet,
    constants: &PhysicalConstants,
) -> Result<Vec<VirialRow>, ObservableError> {
    bound_states(spectrum, constants)
        .into_iter()
        .enumerate()
        .map(|(state, b)| {
            let coeffs = SpinorCoefficients::from_stacked(&spectrum.vector(b.index));
            let ev = virial_energy(&coeffs, blocks, constants)?;
            Ok(VirialRow {
                state,
                index: b.index,
                energy: b.energy,
                virial_energy: ev,
                relative_residual: (b.energy - ev).abs() / b.energy.abs(),
            })
        })
        .collect()
}
