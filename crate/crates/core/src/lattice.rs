//! One-dimensional lattice Dirac model used to probe whether the ground-state
//! density determines the external potential (up to a constant).
//!
//! `H = [[m_W + V, −c D], [c D, −m_W + V]]` on `M` sites, where `D` is the
//! antisymmetric central difference with open ends, `L` the graph Laplacian
//! and `m_W = mc² I + (r_w c / 2a) L` the Wilson-corrected mass. This real
//! form is unitarily equivalent to `c σ_x (−i∂) + σ_z m_W + V`.

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::PhysicalConstants;
use crate::numerics::{sym_eig, NumericsError};

pub const DEFAULT_SMOOTHNESS: usize = 4;
pub const DEFAULT_WILSON: f64 = 1.0;
/// Two smallest-`|E|` candidates closer than this count as tied.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Pairs closer than this in mean-removed potential are constant shifts.
pub const SHIFT_PAIR_TOL: f64 = 1e-12;
/// Density distance below which a genuinely different pair is flagged.
pub const COUNTEREXAMPLE_DENSITY_TOL: f64 = 1e-6;
/// Every trial index divisible by this is a constant-shift control pair.
pub const CONTROL_PERIOD: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("invalid lattice parameter: {0}")]
    InvalidParameter(String),
    #[error(
        "potential deviates from its mean by {deviation}, which is not below mc^2 = {rest_energy}"
    )]
    GapGuard { deviation: f64, rest_energy: f64 },
    #[error("smallest-|E| state is degenerate: E = {first} and {second}")]
    Degenerate { first: f64, second: f64 },
    #[error("lattice models differ in geometry or constants: {0}")]
    GeometryMismatch(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    sites: usize,
    spacing: f64,
    constants: PhysicalConstants,
    wilson: f64,
    potential: Vec<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

impl LatticeModel {
    pub fn new(
        spacing: f64,
        constants: PhysicalConstants,
        wilson: f64,
        potential: Vec<f64>,
    ) -> Result<Self, LatticeError> {
        if potential.is_empty() {
            return Err(LatticeError::InvalidParameter(
                "lattice needs at least one site".into(),
            ));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(LatticeError::InvalidParameter(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        if !(wilson.is_finite() && wilson > 0.0 && wilson <= 1.0) {
            return Err(LatticeError::InvalidParameter(format!(
                "Wilson parameter must lie in (0, 1], got {wilson}"
            )));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(LatticeError::InvalidParameter(
                "potential has non-finite entries".into(),
            ));
        }
        let mu = mean(&potential);
        let deviation = potential
            .iter()
            .fold(0.0_f64, |acc, v| acc.max((v - mu).abs()));
        let rest_energy = constants.rest_energy();
        if deviation >= rest_energy {
            return Err(LatticeError::GapGuard {
                deviation,
                rest_energy,
            });
        }
        Ok(Self {
            sites: potential.len(),
            spacing,
            constants,
            wilson,
            potential,
        })
    }

    /// Natural units (`m = c = a = 1`) with `r_w = 1`.
    pub fn natural(potential: Vec<f64>) -> Result<Self, LatticeError> {
        Self::new(1.0, PhysicalConstants::natural(), DEFAULT_WILSON, potential)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn constants(&self) -> PhysicalConstants {
        self.constants
    }

    pub fn wilson(&self) -> f64 {
        self.wilson
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Same geometry and constants with a different potential.
    pub fn with_potential(&self, potential: Vec<f64>) -> Result<Self, LatticeError> {
        if potential.len() != self.sites {
            return Err(LatticeError::GeometryMismatch(format!(
                "potential has {} sites, model has {}",
                potential.len(),
                self.sites
            )));
        }
        Self::new(self.spacing, self.constants, self.wilson, potential)
    }

    fn same_geometry(&self, other: &Self) -> bool {
        self.sites == other.sites
            && self.spacing == other.spacing
            && self.constants == other.constants
            && self.wilson == other.wilson
    }
}

pub fn build_lattice(model: &LatticeModel) -> DMatrix<f64> {
    let m = model.sites;
    let c = model.constants.c;
    let a = model.spacing;
    let mc2 = model.constants.rest_energy();
    let hop = c / (2.0 * a);
    let wilson = model.wilson * c / (2.0 * a);
    let mut h = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        let neighbours = (i > 0) as usize + (i + 1 < m) as usize;
        let mass = mc2 + wilson * neighbours as f64;
        h[(i, i)] = mass + model.potential[i];
        h[(m + i, m + i)] = -mass + model.potential[i];
    }
    for i in 0..m.saturating_sub(1) {
        let j = i + 1;
        h[(i, j)] = -wilson;
        h[(j, i)] = -wilson;
        h[(m + i, m + j)] = wilson;
        h[(m + j, m + i)] = wilson;
        // c D in the lower-left block, −c D = (c D)ᵀ in the upper-right
        h[(m + i, j)] = hop;
        h[(m + j, i)] = -hop;
        h[(j, m + i)] = hop;
        h[(i, m + j)] = -hop;
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGround {
    pub energy: f64,
    pub density: Vec<f64>,
}

/// Smallest-`|E − mean(V)|` eigenstate and its site density.
///
/// Measuring from the mean potential keeps the selection invariant under
/// constant shifts. An exactly tied `±` pair with identical densities (the
/// reflection-symmetric free lattice) resolves to the positive-energy member;
/// any other tie is reported as degenerate.
pub fn lattice_ground(model: &LatticeModel) -> Result<LatticeGround, LatticeError> {
    let h = build_lattice(model);
    let spectrum = sym_eig(&h)?;
    let mu = mean(&model.potential);
    let m = model.sites;
    let mut order: Vec<usize> = (0..spectrum.len()).collect();
    order.sort_by(|&i, &j| {
        (spectrum.eigenvalues[i] - mu)
            .abs()
            .total_cmp(&(spectrum.eigenvalues[j] - mu).abs())
    });
    let density_of = |k: usize| -> Vec<f64> {
        let v = spectrum.eigenvectors.column(k);
        (0..m).map(|i| v[i] * v[i] + v[m + i] * v[m + i]).collect()
    };
    let best = order[0];
    let mut chosen = best;
    if order.len() > 1 {
        let next = order[1];
        let gap = (spectrum.eigenvalues[next] - mu).abs() - (spectrum.eigenvalues[best] - mu).abs();
        if gap <= DEGENERACY_TOL {
            let (e1, e2) = (spectrum.eigenvalues[best], spectrum.eigenvalues[next]);
            let same_density = linf(&density_of(best), &density_of(next)) <= DEGENERACY_TOL;
            let mirror = (e1 - mu) * (e2 - mu) < 0.0;
            if !(same_density && mirror) {
                return Err(LatticeError::Degenerate {
                    first: e1,
                    second: e2,
                });
            }
            chosen = if e1 > e2 { best } else { next };
        }
    }
    Ok(LatticeGround {
        energy: spectrum.eigenvalues[chosen],
        density: density_of(chosen),
    })
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Mean-removed sum of the lowest `smoothness` Fourier modes with uniform
/// random coefficients, scaled so that `max |V| = amplitude`.
pub fn random_potential(
    seed: u64,
    sites: usize,
    amplitude: f64,
    smoothness: usize,
    constants: &PhysicalConstants,
) -> Result<Vec<f64>, LatticeError> {
    if sites < 2 {
        return Err(LatticeError::InvalidParameter(format!(
            "random potential needs at least 2 sites, got {sites}"
        )));
    }
    if !(amplitude.is_finite() && amplitude > 0.0) {
        return Err(LatticeError::InvalidParameter(format!(
            "amplitude must be positive, got {amplitude}"
        )));
    }
    if amplitude >= constants.rest_energy() {
        return Err(LatticeError::GapGuard {
            deviation: amplitude,
            rest_energy: constants.rest_energy(),
        });
    }
    if smoothness == 0 {
        return Err(LatticeError::InvalidParameter(
            "smoothness must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> = (0..smoothness)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let tau = std::f64::consts::TAU;
    let mut v: Vec<f64> = (0..sites)
        .map(|i| {
            let x = i as f64 / sites as f64;
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let phase = tau * (k + 1) as f64 * x;
                    a * phase.cos() + b * phase.sin()
                })
                .sum()
        })
        .collect();
    let mu = mean(&v);
    v.iter_mut().for_each(|x| *x -= mu);
    let peak = v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if peak == 0.0 {
        return Err(LatticeError::InvalidParameter(
            "drawn potential is identically zero".into(),
        ));
    }
    let scale = amplitude / peak;
    v.iter_mut().for_each(|x| *x *= scale);
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeVerdict {
    /// `max_i |n_a(i) − n_b(i)|`
    pub density_distance: f64,
    /// `max_i |(V_a − mean V_a)(i) − (V_b − mean V_b)(i)|`
    pub potential_distance_mod_const: f64,
    pub constant_shift_pair: bool,
}

pub fn hk_distance(a: &LatticeModel, b: &LatticeModel) -> Result<ProbeVerdict, LatticeError> {
    if !a.same_geometry(b) {
        return Err(LatticeError::GeometryMismatch(format!(
            "{} vs {} sites, spacing {} vs {}, wilson {} vs {}",
            a.sites, b.sites, a.spacing, b.spacing, a.wilson, b.wilson
        )));
    }
    let ga = lattice_ground(a)?;
    let gb = lattice_ground(b)?;
    let (ma, mb) = (mean(&a.potential), mean(&b.potential));
    let potential_distance_mod_const = a
        .potential
        .iter()
        .zip(&b.potential)
        .fold(0.0_f64, |acc, (x, y)| acc.max(((x - ma) - (y - mb)).abs()));
    Ok(ProbeVerdict {
        density_distance: linf(&ga.density, &gb.density),
        potential_distance_mod_const,
        constant_shift_pair: potential_distance_mod_const <= SHIFT_PAIR_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    pub seed: u64,
    pub trials: usize,
    pub sites: usize,
    /// Absolute potential amplitude (energy units of `constants`).
    pub amplitude: f64,
    pub smoothness: usize,
    pub spacing: f64,
    pub wilson: f64,
    pub constants: PhysicalConstants,
}

impl ScanConfig {
    /// Natural units, `r_w = 1`, default smoothness.
    pub fn natural(seed: u64, trials: usize, sites: usize, amplitude: f64) -> Self {
        Self {
            seed,
            trials,
            sites,
            amplitude,
            smoothness: DEFAULT_SMOOTHNESS,
            spacing: 1.0,
            wilson: DEFAULT_WILSON,
            constants: PhysicalConstants::natural(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRecord {
    pub pair_id: usize,
    #[serde(flatten)]
    pub verdict: ProbeVerdict,
    pub counterexample: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub pairs: Vec<PairRecord>,
    /// Smallest density distance over pairs that are not constant shifts.
    pub min_density_distance: Option<f64>,
    /// Largest density distance over constant-shift pairs.
    pub max_shift_density_distance: Option<f64>,
    pub distinct_pairs: usize,
    pub constant_shift_pairs: usize,
    pub counterexamples: usize,
}

/// Compares ground-state densities for `trials` potential pairs.
///
/// Trial `t` draws its own seed from a master stream, so results do not depend
/// on evaluation order. Trials with `t % 10 == 0` pair a potential with itself
/// shifted by `amplitude` (a control for the constant-shift caveat); the rest
/// pair two independent random potentials.
pub fn hk_scan(config: &ScanConfig) -> Result<ScanReport, LatticeError> {
    if config.trials == 0 {
        return Err(LatticeError::InvalidParameter(
            "at least one trial is required".into(),
        ));
    }
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let seeds: Vec<(u64, u64)> = (0..config.trials)
        .map(|_| (master.next_u64(), master.next_u64()))
        .collect();
    let base = LatticeModel::new(
        config.spacing,
        config.constants,
        config.wilson,
        vec![0.0; config.sites.max(1)],
    )?;
    let draw = |seed: u64| {
        random_potential(
            seed,
            config.sites,
            config.amplitude,
            config.smoothness,
            &config.constants,
        )
    };
    let threshold = 0.1 * config.amplitude;
    let pairs: Vec<PairRecord> = seeds
        .par_iter()
        .enumerate()
        .map(|(pair_id, &(sa, sb))| {
            let va = draw(sa)?;
            let vb = if pair_id % CONTROL_PERIOD == 0 {
                va.iter().map(|v| v + config.amplitude).collect()
            } else {
                draw(sb)?
            };
            let verdict = hk_distance(&base.with_potential(va)?, &base.with_potential(vb)?)?;
            let counterexample = verdict.potential_distance_mod_const >= threshold
                && verdict.density_distance < COUNTEREXAMPLE_DENSITY_TOL;
            Ok(PairRecord {
                pair_id,
                verdict,
                counterexample,
            })
        })
        .collect::<Result<_, LatticeError>>()?;

    let fold_min = |acc: Option<f64>, x: f64| Some(acc.map_or(x, |a| a.min(x)));
    let fold_max = |acc: Option<f64>, x: f64| Some(acc.map_or(x, |a| a.max(x)));
    let mut report = ScanReport {
        pairs: Vec::new(),
        min_density_distance: None,
        max_shift_density_distance: None,
        distinct_pairs: 0,
        constant_shift_pairs: 0,
        counterexamples: 0,
    };
    for p in &pairs {
        if p.verdict.constant_shift_pair {
            report.constant_shift_pairs += 1;
            report.max_shift_density_distance = fold_max(
                report.max_shift_density_distance,
                p.verdict.density_distance,
            );
        } else {
            report.distinct_pairs += 1;
            report.min_density_distance =
                fold_min(report.min_density_distance, p.verdict.density_distance);
        }
        report.counterexamples += p.counterexample as usize;
    }
    report.pairs = pairs;
    Ok(report)
}
