//! Dense symmetric eigensolvers.
//!
//! The generalized problem `H v = λ S v` is reduced with a Cholesky factor of
//! `S` and the resulting standard problem is diagonalized with cyclic Jacobi
//! rotations. Jacobi is slower than tridiagonal QR but keeps small eigenvalues
//! of graded matrices to high relative accuracy, which the squared-operator
//! spectrum needs (its eigenvalues span fifteen orders of magnitude).

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::NumericsError;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with `S`-orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

/// Worst-case residual and orthonormality error of a solved pencil.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumCheck {
    /// `max_k ‖H v_k − λ_k S v_k‖₂ / ‖H‖_F`
    pub max_relative_residual: f64,
    /// `max_ij |v_iᵀ S v_j − δ_ij|`
    pub max_orthonormality_error: f64,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, k: usize) -> DVector<f64> {
        self.eigenvectors.column(k).into_owned()
    }

    pub fn check(&self, h: &DMatrix<f64>, s: &DMatrix<f64>) -> SpectrumCheck {
        let h_norm = h.norm().max(f64::MIN_POSITIVE);
        let hv = h * &self.eigenvectors;
        let sv = s * &self.eigenvectors;
        let mut max_res = 0.0_f64;
        for k in 0..self.len() {
            let r = hv.column(k) - sv.column(k) * self.eigenvalues[k];
            max_res = max_res.max(r.norm() / h_norm);
        }
        let gram = self.eigenvectors.transpose() * sv;
        let mut max_orth = 0.0_f64;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                max_orth = max_orth.max((gram[(i, j)] - target).abs());
            }
        }
        SpectrumCheck {
            max_relative_residual: max_res,
            max_orthonormality_error: max_orth,
        }
    }
}

fn check_square(m: &DMatrix<f64>, name: &str) -> Result<(), NumericsError> {
    if m.nrows() != m.ncols() {
        return Err(NumericsError::DimensionMismatch(format!(
            "{name} is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(NumericsError::InvalidArgument(format!(
            "{name} has non-finite entries"
        )));
    }
    Ok(())
}

/// Lower Cholesky factor `L` with `S = L Lᵀ`; reports the first failing leading minor.
pub fn cholesky_lower(s: &DMatrix<f64>) -> Result<DMatrix<f64>, NumericsError> {
    check_square(s, "S")?;
    let n = s.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut diag = s[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(NumericsError::NotPositiveDefinite {
                minor: j + 1,
                pivot: diag,
            });
        }
        let d = diag.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut v = s[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / d;
        }
    }
    Ok(l)
}

/// Cyclic Jacobi diagonalization of a symmetric matrix. Eigenvalues ascending.
///
/// An off-diagonal element is annihilated unless it is negligible relative to
/// the geometric mean of its two diagonal entries; this relative threshold is
/// what preserves accuracy of small eigenvalues.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> Result<SpectrumResult, NumericsError> {
    check_square(a, "matrix")?;
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);

    let mut converged = n <= 1;
    for _sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotations = 0usize;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                if apq.abs() <= f64::EPSILON * (app * aqq).abs().sqrt() {
                    continue;
                }
                rotations += 1;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                m[(p, p)] = app - t * apq;
                m[(q, q)] = aqq + t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = m[(r, p)];
                    let arq = m[(r, q)];
                    let new_rp = arp - s * (arq + tau * arp);
                    let new_rq = arq + s * (arp - tau * arq);
                    m[(r, p)] = new_rp;
                    m[(p, r)] = new_rp;
                    m[(r, q)] = new_rq;
                    m[(q, r)] = new_rq;
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp - s * (vrq + tau * vrp);
                    v[(r, q)] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
        converged = rotations == 0;
    }
    if !converged {
        return Err(NumericsError::NoConvergence(format!(
            "Jacobi did not converge in {MAX_SWEEPS} sweeps"
        )));
    }
    Ok(sorted(m.diagonal(), v))
}

fn sorted(values: DVector<f64>, vectors: DMatrix<f64>) -> SpectrumResult {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| values[i]));
    let mut eigenvectors = DMatrix::zeros(vectors.nrows(), n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &vectors.column(src));
    }
    SpectrumResult {
        eigenvalues,
        eigenvectors,
    }
}

/// Standard symmetric eigenproblem via Householder tridiagonalization and
/// implicit QR (nalgebra). Normwise accurate; used for the larger lattice
/// Hamiltonians where Jacobi would be too slow.
pub fn sym_eig(a: &DMatrix<f64>) -> Result<SpectrumResult, NumericsError> {
    check_square(a, "matrix")?;
    let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, 0).ok_or_else(|| {
        NumericsError::NoConvergence("symmetric QR iteration did not converge".into())
    })?;
    Ok(sorted(eig.eigenvalues, eig.eigenvectors))
}

/// Solves `H v = λ S v` for symmetric `H` and symmetric positive definite `S`.
pub fn generalized_sym_eig(
    h: &DMatrix<f64>,
    s: &DMatrix<f64>,
) -> Result<SpectrumResult, NumericsError> {
    check_square(h, "H")?;
    check_square(s, "S")?;
    if h.nrows() != s.nrows() {
        return Err(NumericsError::DimensionMismatch(format!(
            "H is {}x{} but S is {}x{}",
            h.nrows(),
            h.ncols(),
            s.nrows(),
            s.ncols()
        )));
    }
    let l = cholesky_lower(s)?;
    let reduced = reduce_congruence(&l, h)?;
    let standard = jacobi_eigen(&reduced)?;
    let vectors = l.tr_solve_lower_triangular(&standard.eigenvectors).ok_or(
        NumericsError::NotPositiveDefinite {
            minor: 0,
            pivot: 0.0,
        },
    )?;
    let out = SpectrumResult {
        eigenvalues: standard.eigenvalues,
        eigenvectors: vectors,
    };
    debug_assert!({
        let chk = out.check(h, s);
        chk.max_relative_residual <= 1e-8 && chk.max_orthonormality_error <= 1e-10
    });
    Ok(out)
}

/// `L⁻¹ A L⁻ᵀ`, symmetrized.
fn reduce_congruence(l: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<DMatrix<f64>, NumericsError> {
    let x = l
        .solve_lower_triangular(a)
        .ok_or_else(|| NumericsError::InvalidArgument("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| NumericsError::InvalidArgument("singular Cholesky factor".into()))?;
    Ok((&c + c.transpose()) * 0.5)
}
