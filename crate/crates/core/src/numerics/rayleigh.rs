//! Minimization of the generalized Rayleigh quotient `q(c) = cᵀMc / cᵀSc`.
//!
//! Each step performs a Rayleigh-Ritz projection onto `span{x, T r, p}` where
//! `r` is the residual, `T` an optional preconditioner and `p` the previous
//! step direction (a locally optimal conjugate-gradient iteration). The
//! direction memory is dropped every `dim` iterations.

use nalgebra::{DMatrix, DVector};

use super::{eigen::jacobi_eigen, BestIterate, NumericsError};

/// Matrix action used by [`minimize_rayleigh`].
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;
    /// Frobenius norm (or an upper estimate) used to scale the residual test.
    fn frobenius_norm(&self) -> f64;
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self * x
    }

    fn frobenius_norm(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighOptions {
    /// Stop once `‖Mc − qSc‖₂ ≤ tol·‖M‖_F` ...
    pub tol: f64,
    pub max_iter: usize,
    /// ... and the last step lowered `q` by at most this relative amount.
    pub quotient_rtol: f64,
}

impl Default for RayleighOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 5000,
            quotient_rtol: 64.0 * f64::EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayleighOutcome {
    /// S-normalized minimizer.
    pub vector: DVector<f64>,
    pub value: f64,
    pub relative_residual: f64,
    pub iterations: usize,
}

// Basis vectors whose Gram eigenvalue falls below this fraction of the largest
// are treated as linearly dependent.
const GRAM_DROP: f64 = 1e-14;

/// Applies an approximate inverse of `M` to a residual.
pub type Preconditioner<'a> = &'a dyn Fn(&DVector<f64>) -> DVector<f64>;

pub fn minimize_rayleigh(
    m: &dyn LinearOperator,
    s: &dyn LinearOperator,
    init: &DVector<f64>,
    options: &RayleighOptions,
    preconditioner: Option<Preconditioner>,
) -> Result<RayleighOutcome, NumericsError> {
    let n = m.dim();
    if s.dim() != n || init.len() != n {
        return Err(NumericsError::DimensionMismatch(format!(
            "M is {n}-dimensional, S is {}, init has length {}",
            s.dim(),
            init.len()
        )));
    }
    if !(options.tol.is_finite() && options.tol > 0.0) {
        return Err(NumericsError::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            options.tol
        )));
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::InvalidArgument(
            "initial vector has non-finite entries".into(),
        ));
    }
    let norm0 = init.dot(&s.apply(init));
    if !(norm0 > 0.0) {
        return Err(NumericsError::InvalidArgument(
            "initial vector must be nonzero".into(),
        ));
    }
    let m_norm = m.frobenius_norm().max(f64::MIN_POSITIVE);

    let mut x = init / norm0.sqrt();
    let mut direction: Option<DVector<f64>> = None;
    let mut previous_q: Option<f64> = None;
    let mut iterations = 0;
    loop {
        let mx = m.apply(&x);
        let sx = s.apply(&x);
        let xsx = x.dot(&sx);
        let q = x.dot(&mx) / xsx;
        let residual = &mx - &sx * q;
        let rel = residual.norm() / m_norm;
        let stationary = match previous_q {
            None => true,
            Some(prev) => (prev - q) <= options.quotient_rtol * q.abs(),
        };
        if rel <= options.tol && stationary {
            return Ok(RayleighOutcome {
                vector: x / xsx.sqrt(),
                value: q,
                relative_residual: rel,
                iterations,
            });
        }
        if iterations >= options.max_iter {
            return Err(NumericsError::NotConverged(Box::new(BestIterate {
                vector: x / xsx.sqrt(),
                value: q,
                relative_residual: rel,
                iterations,
            })));
        }

        let z = match preconditioner {
            Some(t) => t(&residual),
            None => residual,
        };
        if n > 0 && iterations % n == n - 1 {
            direction = None;
        }
        let mut columns = vec![x.clone(), z];
        if let Some(p) = direction.take() {
            columns.push(p);
        }
        let next = ritz_lowest(m, s, &columns)?;
        let sx_next = s.apply(&next);
        direction = Some(&next - &x * x.dot(&sx_next));
        x = next;
        previous_q = Some(q);
        iterations += 1;
    }
}

/// Lowest Ritz vector of `(M, S)` on the span of `columns`.
fn ritz_lowest(
    m: &dyn LinearOperator,
    s: &dyn LinearOperator,
    columns: &[DVector<f64>],
) -> Result<DVector<f64>, NumericsError> {
    // unit S-norm columns, so the dependence test below is scale free
    let mut unit = Vec::with_capacity(columns.len());
    let mut sv = Vec::with_capacity(columns.len());
    for c in columns {
        let sc = s.apply(c);
        let norm = c.dot(&sc);
        if norm > 0.0 && norm.is_finite() {
            let inv = 1.0 / norm.sqrt();
            unit.push(c * inv);
            sv.push(sc * inv);
        }
    }
    let v = DMatrix::from_columns(&unit);
    let sv = DMatrix::from_columns(&sv);
    let mv = DMatrix::from_columns(&unit.iter().map(|c| m.apply(c)).collect::<Vec<_>>());
    let gram = symmetrize(v.transpose() * &sv);
    let g = jacobi_eigen(&gram)?;
    let top = g.eigenvalues.max();
    let keep: Vec<usize> = (0..g.len())
        .filter(|&k| g.eigenvalues[k] > GRAM_DROP * top)
        .collect();
    let mut coef = DMatrix::zeros(unit.len(), keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        coef.set_column(dst, &(g.eigenvectors.column(k) / g.eigenvalues[k].sqrt()));
    }
    let basis = &v * &coef;
    let projected = symmetrize(basis.transpose() * (&mv * &coef));
    let ritz = jacobi_eigen(&projected)?;
    Ok(&basis * ritz.eigenvectors.column(0))
}

fn symmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}
