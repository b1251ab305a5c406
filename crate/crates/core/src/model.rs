//! Physical constants, relativistic quantum numbers, basis parameterization and
//! the closed-form Dirac-Coulomb (Sommerfeld) energies used as ground truth.
//!
//! Everything is in Hartree atomic units (hbar = m_e = e = 1). Total energies
//! include the rest-mass term `m c^2`; binding energies are `E - m c^2`.

use nalgebra::DVector;
use serde::Serialize;
use thiserror::Error;

/// CODATA 2018 speed of light in atomic units.
pub const SPEED_OF_LIGHT_AU: f64 = 137.035999084;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("speed of light must be positive and finite, got {0}")]
    InvalidSpeedOfLight(f64),
    #[error("rest mass must be positive and finite, got {0}")]
    InvalidMass(f64),
    #[error("kappa must be a nonzero integer")]
    ZeroKappa,
    #[error("invalid basis parameter: {0}")]
    InvalidBasis(String),
    #[error("nuclear charge must be finite and non-negative, got {0}")]
    InvalidCharge(f64),
    #[error("supercritical system: Z*alpha = {z_alpha} must be below |kappa| = {kappa_abs}")]
    Supercritical { z_alpha: f64, kappa_abs: f64 },
    #[error("principal quantum number n = {n} not allowed for kappa = {kappa}")]
    InvalidPrincipal { n: u32, kappa: i32 },
}

/// Speed of light and rest mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub c: f64,
    pub m: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            c: SPEED_OF_LIGHT_AU,
            m: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn new(c: f64, m: f64) -> Result<Self, ModelError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(ModelError::InvalidSpeedOfLight(c));
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(ModelError::InvalidMass(m));
        }
        Ok(Self { c, m })
    }

    /// Natural units, `m = c = 1`, so that `m c^2 = 1`.
    pub fn natural() -> Self {
        Self { c: 1.0, m: 1.0 }
    }

    pub fn with_c(self, c: f64) -> Result<Self, ModelError> {
        Self::new(c, self.m)
    }

    /// Fine-structure constant `1/c`.
    pub fn alpha(&self) -> f64 {
        1.0 / self.c
    }

    pub fn rest_energy(&self) -> f64 {
        self.m * self.c * self.c
    }
}

/// Relativistic angular quantum number with its derived `j` and large-component `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KappaChannel {
    kappa: i32,
}

impl KappaChannel {
    pub fn kappa(&self) -> i32 {
        self.kappa
    }

    /// Total angular momentum `|kappa| - 1/2`.
    pub fn j(&self) -> f64 {
        self.kappa.unsigned_abs() as f64 - 0.5
    }

    /// Orbital angular momentum of the large component.
    pub fn l_large(&self) -> u32 {
        if self.kappa > 0 {
            self.kappa as u32
        } else {
            (-self.kappa - 1) as u32
        }
    }

    /// Smallest principal quantum number with a bound state in this channel.
    pub fn min_principal(&self) -> u32 {
        self.l_large() + 1
    }

    /// Spectroscopic label such as `2p1/2`.
    pub fn state_label(&self, n: u32) -> String {
        const LETTERS: &[u8] = b"spdfghiklmnoqrtuv";
        let l = self.l_large() as usize;
        let letter = LETTERS.get(l).map(|b| *b as char).unwrap_or('?');
        format!("{}{}{}/2", n, letter, 2 * self.kappa.unsigned_abs() - 1)
    }
}

pub fn validate_channel(kappa: i32) -> Result<KappaChannel, ModelError> {
    if kappa == 0 {
        return Err(ModelError::ZeroKappa);
    }
    Ok(KappaChannel { kappa })
}

/// Geometric sequence of Gaussian exponents `alpha0 * ratio^i` attached to a channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvenTemperedBasis {
    n_funcs: usize,
    alpha0: f64,
    ratio: f64,
    channel: KappaChannel,
    exponents: Vec<f64>,
}

impl EvenTemperedBasis {
    pub const DEFAULT_SIZE: usize = 40;
    pub const DEFAULT_RATIO: f64 = 2.0;

    /// Smallest exponent of the default basis, `0.01 Z^2`. Charges below one
    /// (including the free particle) use the `Z = 1` value.
    pub fn default_alpha0(z: f64) -> f64 {
        let z_eff = z.max(1.0);
        1e-2 * z_eff * z_eff
    }

    pub fn default_for(z: f64, channel: KappaChannel) -> Result<Self, ModelError> {
        make_even_tempered(
            Self::default_alpha0(z),
            Self::DEFAULT_RATIO,
            Self::DEFAULT_SIZE,
            channel,
        )
    }

    pub fn n_funcs(&self) -> usize {
        self.n_funcs
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn channel(&self) -> KappaChannel {
        self.channel
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }
}

pub fn make_even_tempered(
    alpha0: f64,
    ratio: f64,
    n_funcs: usize,
    channel: KappaChannel,
) -> Result<EvenTemperedBasis, ModelError> {
    if !(alpha0.is_finite() && alpha0 > 0.0) {
        return Err(ModelError::InvalidBasis(format!(
            "alpha0 must be positive and finite, got {alpha0}"
        )));
    }
    if !(ratio.is_finite() && ratio > 1.0) {
        return Err(ModelError::InvalidBasis(format!(
            "ratio must be finite and greater than 1, got {ratio}"
        )));
    }
    if n_funcs < 2 {
        return Err(ModelError::InvalidBasis(format!(
            "at least 2 functions required, got {n_funcs}"
        )));
    }
    let exponents: Vec<f64> = (0..n_funcs)
        .map(|i| alpha0 * ratio.powi(i as i32))
        .collect();
    if let Some(bad) = exponents.iter().position(|e| !e.is_finite()) {
        return Err(ModelError::InvalidBasis(format!(
            "exponent {bad} overflows"
        )));
    }
    if exponents.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ModelError::InvalidBasis(
            "exponents are not strictly increasing".into(),
        ));
    }
    Ok(EvenTemperedBasis {
        n_funcs,
        alpha0,
        ratio,
        channel,
        exponents,
    })
}

/// Large- and small-component expansion coefficients of a one-electron spinor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorCoefficients {
    pub large: DVector<f64>,
    pub small: DVector<f64>,
}

impl SpinorCoefficients {
    pub fn new(large: DVector<f64>, small: DVector<f64>) -> Self {
        Self { large, small }
    }

    /// Splits a stacked `[large; small]` vector of length `2N`.
    pub fn from_stacked(v: &DVector<f64>) -> Self {
        let n = v.len() / 2;
        Self {
            large: v.rows(0, n).into_owned(),
            small: v.rows(n, v.len() - n).into_owned(),
        }
    }

    pub fn stacked(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.large.len() + self.small.len());
        out.rows_mut(0, self.large.len()).copy_from(&self.large);
        out.rows_mut(self.large.len(), self.small.len())
            .copy_from(&self.small);
        out
    }
}

fn check_coulomb(
    z: f64,
    channel: KappaChannel,
    constants: &PhysicalConstants,
) -> Result<f64, ModelError> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(ModelError::InvalidCharge(z));
    }
    let z_alpha = z * constants.alpha();
    let kappa_abs = channel.kappa().unsigned_abs() as f64;
    if z_alpha >= kappa_abs {
        return Err(ModelError::Supercritical { z_alpha, kappa_abs });
    }
    Ok(z_alpha)
}

/// Rejects charges at or beyond the point-nucleus critical value `Z alpha = |kappa|`.
pub fn check_subcritical(
    z: f64,
    channel: KappaChannel,
    constants: &PhysicalConstants,
) -> Result<(), ModelError> {
    check_coulomb(z, channel, constants).map(|_| ())
}

/// `x = Z alpha / (n - |kappa| + gamma)`; `E = m c^2 / sqrt(1 + x^2)`.
fn sommerfeld_x(
    z: f64,
    n_principal: u32,
    channel: KappaChannel,
    constants: &PhysicalConstants,
) -> Result<f64, ModelError> {
    let z_alpha = check_coulomb(z, channel, constants)?;
    let kappa = channel.kappa();
    let k = kappa.unsigned_abs();
    // n_r = n - |kappa| = 0 only exists for negative kappa
    let allowed = n_principal >= k && !(kappa > 0 && n_principal == k);
    if !allowed {
        return Err(ModelError::InvalidPrincipal {
            n: n_principal,
            kappa,
        });
    }
    let kf = k as f64;
    let gamma = (kf * kf - z_alpha * z_alpha).sqrt();
    let denom = (n_principal - k) as f64 + gamma;
    Ok(z_alpha / denom)
}

/// Exact Dirac-Coulomb total energy of level `(n, kappa)` for a point nucleus.
pub fn sommerfeld_energy(
    z: f64,
    n_principal: u32,
    channel: KappaChannel,
    constants: &PhysicalConstants,
) -> Result<f64, ModelError> {
    let x = sommerfeld_x(z, n_principal, channel, constants)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(constants.rest_energy() / (1.0 + x * x).sqrt())
}

/// `E - m c^2`, evaluated without the cancellation of subtracting two large numbers.
pub fn sommerfeld_binding(
    z: f64,
    n_principal: u32,
    channel: KappaChannel,
    constants: &PhysicalConstants,
) -> Result<f64, ModelError> {
    let x = sommerfeld_x(z, n_principal, channel, constants)?;
    if x.is_infinite() {
        return Ok(-constants.rest_energy());
    }
    let root = (1.0 + x * x).sqrt();
    Ok(-constants.rest_energy() * x * x / (root * (1.0 + root)))
}
