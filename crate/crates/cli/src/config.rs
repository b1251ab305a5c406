//! Command-line flags, the optional `key=value` config file, and the validated
//! run configuration they resolve to.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use reldft_core::model::{
    check_subcritical, validate_channel, EvenTemperedBasis, PhysicalConstants, SPEED_OF_LIGHT_AU,
};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "reldft",
    version,
    about = "Relativistic one-electron energy experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound states of a hydrogen-like ion compared with the exact levels.
    Hydrogenic(Flags),
    /// Eigenvalue, mc²⟨β⟩ and the density-quadrature energy of every bound state.
    Virial(Flags),
    /// Minimum of the squared-Hamiltonian functional against ⟨H⟩ collapse.
    Functional(Flags),
    /// Ground-state density comparison over random lattice potential pairs.
    LatticeProbe(Flags),
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Hydrogenic(_) => CommandKind::Hydrogenic,
            Command::Virial(_) => CommandKind::Virial,
            Command::Functional(_) => CommandKind::Functional,
            Command::LatticeProbe(_) => CommandKind::LatticeProbe,
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Hydrogenic(f)
            | Command::Virial(f)
            | Command::Functional(f)
            | Command::LatticeProbe(f) => f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Hydrogenic,
    Virial,
    Functional,
    LatticeProbe,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Hydrogenic => "hydrogenic",
            CommandKind::Virial => "virial",
            CommandKind::Functional => "functional",
            CommandKind::LatticeProbe => "lattice-probe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every flag is optional so that values can also come from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Nuclear charge.
    #[arg(long = "Z")]
    pub z: Option<f64>,
    /// Relativistic angular quantum number (nonzero).
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<i32>,
    /// Number of large-component Gaussians.
    #[arg(long = "basis-size")]
    pub basis_size: Option<usize>,
    /// Smallest Gaussian exponent [default: 0.01 max(Z,1)^2].
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Geometric ratio of the exponents.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Speed of light [default: 137.035999084; 1 for lattice-probe].
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub seed: Option<u64>,
    /// Number of potential pairs (lattice-probe).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Lattice sites (lattice-probe).
    #[arg(long)]
    pub sites: Option<usize>,
    /// Potential amplitude as a fraction of mc² (lattice-probe).
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key=value` file with flag names as keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Iteration cap of the functional minimizer.
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Residual tolerance of the functional minimizer, relative to ‖H²‖_F.
    #[arg(long)]
    pub tol: Option<f64>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("config key '{key}': cannot parse '{value}'")))
}

/// Reads a `key=value` file. Blank lines and `#` comments are ignored.
pub fn read_config_file(path: &Path) -> Result<Flags, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("--config: cannot read {}: {e}", path.display())))?;
    let mut flags = Flags::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!(
                "{}:{}: expected key=value",
                path.display(),
                lineno + 1
            ))
        })?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        match key {
            "Z" => flags.z = Some(parse_value(key, value)?),
            "kappa" => flags.kappa = Some(parse_value(key, value)?),
            "basis-size" => flags.basis_size = Some(parse_value(key, value)?),
            "alpha0" => flags.alpha0 = Some(parse_value(key, value)?),
            "ratio" => flags.ratio = Some(parse_value(key, value)?),
            "c" => flags.c = Some(parse_value(key, value)?),
            "seed" => flags.seed = Some(parse_value(key, value)?),
            "trials" => flags.trials = Some(parse_value(key, value)?),
            "sites" => flags.sites = Some(parse_value(key, value)?),
            "amplitude" => flags.amplitude = Some(parse_value(key, value)?),
            "format" => {
                flags.format = Some(Format::from_str(value, true).map_err(|_| {
                    CliError::Config(format!(
                        "config key 'format': expected csv or json, got '{value}'"
                    ))
                })?)
            }
            "out" => flags.out = Some(PathBuf::from(value)),
            "max-iter" => flags.max_iter = Some(parse_value(key, value)?),
            "tol" => flags.tol = Some(parse_value(key, value)?),
            other => {
                return Err(CliError::Config(format!(
                    "{}:{}: unknown key '{other}'",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    Ok(flags)
}

impl Flags {
    /// Fills every unset field from `other`.
    pub fn or(self, other: Flags) -> Flags {
        Flags {
            z: self.z.or(other.z),
            kappa: self.kappa.or(other.kappa),
            basis_size: self.basis_size.or(other.basis_size),
            alpha0: self.alpha0.or(other.alpha0),
            ratio: self.ratio.or(other.ratio),
            c: self.c.or(other.c),
            seed: self.seed.or(other.seed),
            trials: self.trials.or(other.trials),
            sites: self.sites.or(other.sites),
            amplitude: self.amplitude.or(other.amplitude),
            format: self.format.or(other.format),
            out: self.out.or(other.out),
            config: self.config,
            max_iter: self.max_iter.or(other.max_iter),
            tol: self.tol.or(other.tol),
        }
    }
}

pub const DEFAULT_Z: f64 = 1.0;
pub const DEFAULT_KAPPA: i32 = -1;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_SITES: usize = 200;
pub const DEFAULT_AMPLITUDE: f64 = 0.3;
pub const DEFAULT_MAX_ITER: usize = reldft_core::functional::DEFAULT_F_MAX_ITER;
pub const DEFAULT_TOL: f64 = reldft_core::functional::DEFAULT_F_TOL;

/// Fully resolved and validated parameters of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(rename = "Z")]
    pub z: f64,
    pub kappa: i32,
    pub basis_size: usize,
    pub alpha0: f64,
    pub ratio: f64,
    pub c: f64,
    pub m: f64,
    pub seed: u64,
    pub trials: usize,
    pub sites: usize,
    pub amplitude: f64,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub max_iter: usize,
    pub tol: f64,
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn check_out_path(path: &Path) -> Result<(), CliError> {
    if path.as_os_str().is_empty() {
        return Err(CliError::Config("--out: empty path".into()));
    }
    if path.is_dir() || path.to_string_lossy().ends_with(std::path::MAIN_SEPARATOR) {
        return Err(CliError::Config(format!(
            "--out: {} is a directory",
            path.display()
        )));
    }
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(CliError::Config(format!(
            "--out: directory {} does not exist",
            parent.display()
        )));
    }
    Ok(())
}

impl RunConfig {
    pub fn resolve(command: &Command) -> Result<Self, CliError> {
        let kind = command.kind();
        let mut flags = command.flags().clone();
        if let Some(path) = flags.config.clone() {
            flags = flags.or(read_config_file(&path)?);
        }

        let z = flags.z.unwrap_or(DEFAULT_Z);
        if !(z.is_finite() && z >= 0.0) {
            return Err(CliError::Config(format!(
                "--Z must be finite and non-negative, got {z}"
            )));
        }
        let kappa = flags.kappa.unwrap_or(DEFAULT_KAPPA);
        let channel = validate_channel(kappa)
            .map_err(|_| CliError::Config("--kappa must be a nonzero integer".into()))?;
        let basis_size = flags.basis_size.unwrap_or(EvenTemperedBasis::DEFAULT_SIZE);
        if basis_size < 2 {
            return Err(CliError::Config(format!(
                "--basis-size must be at least 2, got {basis_size}"
            )));
        }
        let alpha0 = positive(
            "--alpha0",
            flags.alpha0.unwrap_or(EvenTemperedBasis::default_alpha0(z)),
        )?;
        let ratio = flags.ratio.unwrap_or(EvenTemperedBasis::DEFAULT_RATIO);
        if !(ratio.is_finite() && ratio > 1.0) {
            return Err(CliError::Config(format!(
                "--ratio must be finite and greater than 1, got {ratio}"
            )));
        }
        let default_c = if kind == CommandKind::LatticeProbe {
            1.0
        } else {
            SPEED_OF_LIGHT_AU
        };
        let c = positive("--c", flags.c.unwrap_or(default_c))?;
        let constants =
            PhysicalConstants::new(c, 1.0).map_err(|e| CliError::Config(format!("--c: {e}")))?;
        if kind != CommandKind::LatticeProbe {
            check_subcritical(z, channel, &constants)
                .map_err(|e| CliError::Config(format!("--Z {z} with --kappa {kappa}: {e}")))?;
        }
        let trials = flags.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(CliError::Config("--trials must be at least 1".into()));
        }
        let sites = flags.sites.unwrap_or(DEFAULT_SITES);
        if sites < 2 {
            return Err(CliError::Config(format!(
                "--sites must be at least 2, got {sites}"
            )));
        }
        let amplitude = flags.amplitude.unwrap_or(DEFAULT_AMPLITUDE);
        if !(amplitude.is_finite() && amplitude > 0.0 && amplitude < 1.0) {
            return Err(CliError::Config(format!(
                "--amplitude is a fraction of mc^2 and must lie in (0, 1), got {amplitude}"
            )));
        }
        let tol = positive("--tol", flags.tol.unwrap_or(DEFAULT_TOL))?;
        if let Some(out) = &flags.out {
            check_out_path(out)?;
        }
        Ok(RunConfig {
            command: kind,
            z,
            kappa,
            basis_size,
            alpha0,
            ratio,
            c,
            m: 1.0,
            seed: flags.seed.unwrap_or(DEFAULT_SEED),
            trials,
            sites,
            amplitude,
            format: flags.format.unwrap_or(Format::Csv),
            out: flags.out,
            max_iter: flags.max_iter.unwrap_or(DEFAULT_MAX_ITER),
            tol,
        })
    }

    pub fn constants(&self) -> PhysicalConstants {
        PhysicalConstants {
            c: self.c,
            m: self.m,
        }
    }
}
