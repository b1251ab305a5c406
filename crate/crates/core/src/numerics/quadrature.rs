use std::f64::consts::PI;

use super::NumericsError;

pub const DEFAULT_QUADRATURE_NODES: usize = 400;
const MIN_NODES: usize = 16;

/// Radial nodes and weights approximating `∫₀^∞ f(r) dr ≈ Σ w_k f(r_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * f(r))
            .sum()
    }

    /// `Σ w_k y_k` for samples already evaluated on the nodes.
    pub fn sum_samples(&self, samples: &[f64]) -> f64 {
        self.weights.iter().zip(samples).map(|(w, y)| w * y).sum()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d.is_finite() { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[n - 1 - i] = z;
        x[i] = -z;
        w[n - 1 - i] = wi;
        w[i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss-Legendre on `t ∈ [0, 1]` mapped by `r = scale·t/(1 − t)`.
pub fn build_quadrature(n_nodes: usize, scale: f64) -> Result<QuadratureGrid, NumericsError> {
    if n_nodes < MIN_NODES {
        return Err(NumericsError::InvalidArgument(format!(
            "quadrature needs at least {MIN_NODES} nodes, got {n_nodes}"
        )));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(NumericsError::InvalidArgument(format!(
            "quadrature scale must be positive and finite, got {scale}"
        )));
    }
    let (x, w) = gauss_legendre(n_nodes);
    let mut nodes = Vec::with_capacity(n_nodes);
    let mut weights = Vec::with_capacity(n_nodes);
    for (xi, wi) in x.into_iter().zip(w) {
        let t = 0.5 * (xi + 1.0);
        let one_minus = 0.5 * (1.0 - xi);
        nodes.push(scale * t / one_minus);
        weights.push(0.5 * wi * scale / (one_minus * one_minus));
    }
    Ok(QuadratureGrid { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gauss_integral;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(20);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // ∫ x^38 over [-1, 1] = 2/39
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
        assert!((m - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_moments() {
        let grid = build_quadrature(DEFAULT_QUADRATURE_NODES, 1.0).unwrap();
        let v = grid.integrate(|r| r * (-r * r).exp());
        assert!((v - 0.5).abs() < 1e-8);
        let v = grid.integrate(|r| (-r * r).exp());
        assert!((v - PI.sqrt() / 2.0).abs() < 1e-8);
        for (n, a) in [(2u32, 1.0), (4, 0.01), (2, 1e4), (6, 3.0)] {
            let exact = gauss_integral(n, a).unwrap();
            let v = grid.integrate(|r| r.powi(n as i32) * (-a * r * r).exp());
            assert!(((v - exact) / exact).abs() < 1e-8, "n={n} a={a}");
        }
    }

    #[test]
    fn grid_shape() {
        let grid = build_quadrature(64, 0.5).unwrap();
        assert!(grid.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(grid.nodes()[0] > 0.0);
        assert!(grid.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn too_few_nodes() {
        assert!(build_quadrature(4, 1.0).is_err());
        assert!(build_quadrature(400, 0.0).is_err());
    }
}
