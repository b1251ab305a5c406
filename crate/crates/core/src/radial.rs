//! Radial Dirac-Coulomb eigenproblem in a restricted-kinetic-balance basis.
//!
//! Large component `P(r) = Σ a_i φ_i(r)` with `φ_i = r^(l+1) exp(-λ_i r²)`;
//! small component `Q(r) = Σ b_i χ_i(r)` with `χ_i = (d/dr + κ/r) φ_i`.
//! Writing `p = l + 1`, `χ_i = A r^(p-1) e_i + B_i r^(p+1) e_i` where
//! `A = p + κ` (zero for negative κ) and `B_i = -2 λ_i`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::model::{
    check_subcritical, EvenTemperedBasis, KappaChannel, ModelError, PhysicalConstants,
    SpinorCoefficients,
};
use crate::numerics::{gauss_integral, generalized_sym_eig, NumericsError, SpectrumResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadialError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("{block} integral for basis pair ({i}, {j}) is not representable: {detail}")]
    Integral {
        block: &'static str,
        i: usize,
        j: usize,
        detail: String,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Overlap, nuclear-attraction and kinetic-coupling blocks of one channel.
///
/// `pi[(i, j)] = ∫ χ_i (d/dr + κ/r) φ_j dr`; with kinetic balance this is the
/// small-small overlap scaled by the large and small normalizations.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSet {
    pub s_ll: DMatrix<f64>,
    pub s_ss: DMatrix<f64>,
    pub v_ll: DMatrix<f64>,
    pub v_ss: DMatrix<f64>,
    pub pi: DMatrix<f64>,
    /// Factors multiplying each primitive `φ_i` (all ones when unnormalized).
    pub large_scale: DVector<f64>,
    /// Factors multiplying each primitive `χ_i`.
    pub small_scale: DVector<f64>,
}

impl MatrixSet {
    pub fn dim(&self) -> usize {
        self.s_ll.nrows()
    }
}

struct Primitive {
    p: i64,
    a: f64,
}

impl Primitive {
    fn new(channel: KappaChannel) -> Self {
        let p = channel.l_large() as i64 + 1;
        Self {
            p,
            a: (p + channel.kappa() as i64) as f64,
        }
    }
}

fn moment(block: &'static str, i: usize, j: usize, n: i64, s: f64) -> Result<f64, RadialError> {
    let n = u32::try_from(n).map_err(|_| RadialError::Integral {
        block,
        i,
        j,
        detail: format!("negative power {n}"),
    })?;
    gauss_integral(n, s).map_err(|e| RadialError::Integral {
        block,
        i,
        j,
        detail: e.to_string(),
    })
}

/// `A² G(k-2) + A (B_i + B_j) G(k) + B_i B_j G(k+2)` with the `A` terms
/// skipped when `A = 0` (their powers may be negative).
fn small_moment(
    block: &'static str,
    (i, j): (usize, usize),
    k: i64,
    s: f64,
    a: f64,
    bi: f64,
    bj: f64,
) -> Result<f64, RadialError> {
    let mut v = bi * bj * moment(block, i, j, k + 2, s)?;
    if a != 0.0 {
        v += a * a * moment(block, i, j, k - 2, s)? + a * (bi + bj) * moment(block, i, j, k, s)?;
    }
    Ok(v)
}

/// Unnormalized blocks over the primitive functions.
pub fn primitive_blocks(basis: &EvenTemperedBasis, z: f64) -> Result<MatrixSet, RadialError> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(ModelError::InvalidCharge(z).into());
    }
    let n = basis.n_funcs();
    let lam = basis.exponents();
    let Primitive { p, a } = Primitive::new(basis.channel());
    let mut s_ll = DMatrix::zeros(n, n);
    let mut s_ss = DMatrix::zeros(n, n);
    let mut v_ll = DMatrix::zeros(n, n);
    let mut v_ss = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s = lam[i] + lam[j];
            let (bi, bj) = (-2.0 * lam[i], -2.0 * lam[j]);
            let sll = moment("large overlap", i, j, 2 * p, s)?;
            let sss = small_moment("small overlap", (i, j), 2 * p, s, a, bi, bj)?;
            let (vll, vss) = if z == 0.0 {
                (0.0, 0.0)
            } else {
                (
                    -z * moment("large potential", i, j, 2 * p - 1, s)?,
                    -z * small_moment("small potential", (i, j), 2 * p - 1, s, a, bi, bj)?,
                )
            };
            for (m, v) in [
                (&mut s_ll, sll),
                (&mut s_ss, sss),
                (&mut v_ll, vll),
                (&mut v_ss, vss),
            ] {
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    }
    Ok(MatrixSet {
        pi: s_ss.clone(),
        s_ll,
        s_ss,
        v_ll,
        v_ss,
        large_scale: DVector::from_element(n, 1.0),
        small_scale: DVector::from_element(n, 1.0),
    })
}

fn inverse_sqrt_diagonal(
    m: &DMatrix<f64>,
    block: &'static str,
) -> Result<DVector<f64>, RadialError> {
    let mut out = DVector::zeros(m.nrows());
    for i in 0..m.nrows() {
        let d = m[(i, i)];
        if !(d > 0.0 && d.is_finite()) {
            return Err(RadialError::Integral {
                block,
                i,
                j: i,
                detail: format!("diagonal norm {d:e} cannot be normalized"),
            });
        }
        out[i] = 1.0 / d.sqrt();
    }
    Ok(out)
}

fn scale_symmetric(m: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = m[(i, j)] * (d[i] * d[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Blocks over basis functions normalized to unit diagonal overlap.
pub fn assemble_blocks(
    basis: &EvenTemperedBasis,
    z: f64,
    constants: &PhysicalConstants,
) -> Result<MatrixSet, RadialError> {
    check_subcritical(z, basis.channel(), constants)?;
    let raw = primitive_blocks(basis, z)?;
    let nl = inverse_sqrt_diagonal(&raw.s_ll, "large overlap")?;
    let ns = inverse_sqrt_diagonal(&raw.s_ss, "small overlap")?;
    let n = raw.dim();
    let pi = DMatrix::from_fn(n, n, |i, j| raw.pi[(i, j)] * ns[i] * nl[j]);
    let out = MatrixSet {
        s_ll: scale_symmetric(&raw.s_ll, &nl),
        s_ss: scale_symmetric(&raw.s_ss, &ns),
        v_ll: scale_symmetric(&raw.v_ll, &nl),
        v_ss: scale_symmetric(&raw.v_ss, &ns),
        pi,
        large_scale: nl,
        small_scale: ns,
    };
    for (name, m) in [
        ("large overlap", &out.s_ll),
        ("small overlap", &out.s_ss),
        ("large potential", &out.v_ll),
        ("small potential", &out.v_ss),
        ("kinetic coupling", &out.pi),
    ] {
        if let Some(k) = m.iter().position(|v| !v.is_finite()) {
            return Err(RadialError::Integral {
                block: name,
                i: k % n,
                j: k / n,
                detail: "non-finite after normalization".into(),
            });
        }
    }
    Ok(out)
}

/// `H = [[V_LL + mc² S_LL, c Πᵀ], [c Π, V_SS − mc² S_SS]]`, `S = diag(S_LL, S_SS)`.
pub fn assemble_hamiltonian(
    blocks: &MatrixSet,
    constants: &PhysicalConstants,
) -> Result<(DMatrix<f64>, DMatrix<f64>), RadialError> {
    let n = blocks.dim();
    for (name, m) in [
        ("s_ll", &blocks.s_ll),
        ("s_ss", &blocks.s_ss),
        ("v_ll", &blocks.v_ll),
        ("v_ss", &blocks.v_ss),
        ("pi", &blocks.pi),
    ] {
        if m.nrows() != n || m.ncols() != n {
            return Err(RadialError::DimensionMismatch(format!(
                "block {name} is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    let mc2 = constants.rest_energy();
    let c = constants.c;
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n))
        .copy_from(&(&blocks.v_ll + &blocks.s_ll * mc2));
    h.view_mut((n, n), (n, n))
        .copy_from(&(&blocks.v_ss - &blocks.s_ss * mc2));
    let coupling = &blocks.pi * c;
    h.view_mut((n, 0), (n, n)).copy_from(&coupling);
    h.view_mut((0, n), (n, n)).copy_from(&coupling.transpose());
    s.view_mut((0, 0), (n, n)).copy_from(&blocks.s_ll);
    s.view_mut((n, n), (n, n)).copy_from(&blocks.s_ss);
    Ok((h, s))
}

pub fn solve_channel(
    basis: &EvenTemperedBasis,
    z: f64,
    constants: &PhysicalConstants,
) -> Result<SpectrumResult, RadialError> {
    let blocks = assemble_blocks(basis, z, constants)?;
    let (h, s) = assemble_hamiltonian(&blocks, constants)?;
    Ok(generalized_sym_eig(&h, &s)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    /// Column of the eigenvector matrix.
    pub index: usize,
    pub energy: f64,
}

/// Eigenpairs with `0 < E < mc²`, ascending.
pub fn bound_states(spectrum: &SpectrumResult, constants: &PhysicalConstants) -> Vec<BoundState> {
    let mc2 = constants.rest_energy();
    spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0.0 && e < mc2)
        .map(|(index, &energy)| BoundState { index, energy })
        .collect()
}

/// Radial amplitudes `(P(r), Q(r))` of a spinor at `r`.
pub fn evaluate_amplitudes(
    basis: &EvenTemperedBasis,
    blocks: &MatrixSet,
    coeffs: &SpinorCoefficients,
    r: f64,
) -> (f64, f64) {
    let Primitive { p, a } = Primitive::new(basis.channel());
    let rp = r.powi(p as i32);
    let rpm1 = r.powi(p as i32 - 1);
    let mut g = 0.0;
    let mut f = 0.0;
    for (i, &lam) in basis.exponents().iter().enumerate() {
        let e = (-lam * r * r).exp();
        if e == 0.0 {
            continue;
        }
        let phi = rp * e;
        let chi = a * rpm1 * e - 2.0 * lam * r * phi;
        g += coeffs.large[i] * blocks.large_scale[i] * phi;
        f += coeffs.small[i] * blocks.small_scale[i] * chi;
    }
    (g, f)
}

/// Assembled and diagonalized channel, kept together for the observables.
#[derive(Debug, Clone)]
pub struct RadialSystem {
    pub basis: EvenTemperedBasis,
    pub z: f64,
    pub constants: PhysicalConstants,
    pub blocks: MatrixSet,
    pub h: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub spectrum: SpectrumResult,
}

impl RadialSystem {
    pub fn solve(
        basis: EvenTemperedBasis,
        z: f64,
        constants: PhysicalConstants,
    ) -> Result<Self, RadialError> {
        let blocks = assemble_blocks(&basis, z, &constants)?;
        let (h, s) = assemble_hamiltonian(&blocks, &constants)?;
        let spectrum = generalized_sym_eig(&h, &s)?;
        Ok(Self {
            basis,
            z,
            constants,
            blocks,
            h,
            s,
            spectrum,
        })
    }

    pub fn channel(&self) -> KappaChannel {
        self.basis.channel()
    }

    pub fn bound_states(&self) -> Vec<BoundState> {
        bound_states(&self.spectrum, &self.constants)
    }

    pub fn coefficients(&self, index: usize) -> SpinorCoefficients {
        SpinorCoefficients::from_stacked(&self.spectrum.vector(index))
    }

    /// Principal quantum number of the `k`-th bound state (0-based) in this channel.
    pub fn principal_of(&self, k: usize) -> u32 {
        self.channel().min_principal() + k as u32
    }
}
