//! Run configuration: a TOML file, overridden by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use qnd::experiment::{couplings_from_physics, log_spaced, PhysicalParams, DEFAULT_SEED};
use qnd::gaussian::{Integrator, ScheduleMode};
use qnd::spin_ops::Spin;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    AlgebraCheck,
    OracleCompare,
    Sweep,
    Suppression,
    Impact,
    Montecarlo,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Naive,
    Decoupled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorKind {
    SingleStep,
    Sliced,
    Continuous,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub sigma0: f64,
    pub gamma: f64,
    pub area: f64,
    pub delta: f64,
    pub delta_hfs: f64,
}

/// Everything a config file may set. Unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    /// `NL`, photons in the whole train.
    pub total_photons: Option<f64>,
    pub atom_number: Option<f64>,
    pub f: Option<f64>,
    pub schedule: Option<ScheduleKind>,
    pub p: Option<usize>,
    /// Pulse count for naive runs; defaults to `2p`.
    pub pulses: Option<usize>,
    pub na_min: Option<f64>,
    pub na_max: Option<f64>,
    pub na_points: Option<usize>,
    pub p_values: Option<Vec<usize>>,
    pub include_dropped_terms: Option<bool>,
    pub scattering_eps: Option<f64>,
    pub integrator: Option<IntegratorKind>,
    pub slices: Option<u32>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub n_ph: Option<usize>,
    pub oracle_atoms: Option<usize>,
    pub spins: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub physics: Option<PhysicsConfig>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub p: Option<usize>,
    pub schedule: Option<ScheduleKind>,
}

/// The validated, fully defaulted configuration of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub g1: f64,
    pub g2: f64,
    pub total_photons: f64,
    pub atom_number: f64,
    pub spin: Spin,
    pub schedule: ScheduleKind,
    pub p: usize,
    pub pulses: usize,
    pub na_values: Vec<f64>,
    pub p_values: Vec<usize>,
    pub include_dropped_terms: bool,
    pub scattering_eps: f64,
    pub integrator: Integrator,
    pub seed: u64,
    pub trials: usize,
    pub n_ph: usize,
    pub oracle_atoms: usize,
    pub spins: Vec<Spin>,
    pub output: Option<PathBuf>,
    pub physics: Option<PhysicalParams>,
}

pub const DEFAULT_P: usize = 5;
pub const DEFAULT_NA_POINTS: usize = 20;
pub const DEFAULT_TRIALS: usize = 100_000;
pub const DEFAULT_N_PH: usize = 4;
pub const DEFAULT_ORACLE_ATOMS: usize = 2;
pub const DEFAULT_P_VALUES: [usize; 3] = [1, 2, 5];
pub const DEFAULT_SPINS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

impl RunConfig {
    pub fn schedule_mode(&self) -> ScheduleMode {
        match self.schedule {
            ScheduleKind::Naive => ScheduleMode::Naive,
            ScheduleKind::Decoupled => ScheduleMode::Decoupled(self.p),
        }
    }

    /// Pulse count of the configured schedule.
    pub fn num_pulses(&self) -> usize {
        match self.schedule {
            ScheduleKind::Naive => self.pulses,
            ScheduleKind::Decoupled => 2 * self.p,
        }
    }
}

pub fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    parse_file_config(&text).map_err(|e| match e {
        CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_file_config(text: &str) -> Result<FileConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Validation(e.message().to_string()))
}

fn missing(command: Command, key: &str) -> CliError {
    CliError::Validation(format!("{command} needs `{key}`"))
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("`{key}` must be positive, got {v}")))
    }
}

fn spin(key: &str, f: f64) -> Result<Spin, CliError> {
    Spin::new(f).map_err(|e| CliError::Validation(format!("`{key}`: {e}")))
}

/// Applies `overrides`, fills defaults and checks what `command` needs.
pub fn resolve(command: Command, file: FileConfig, overrides: Overrides) -> Result<RunConfig, CliError> {
    use Command::*;

    let physics = match &file.physics {
        Some(p) => Some(PhysicalParams {
            sigma0: p.sigma0,
            gamma: p.gamma,
            area: p.area,
            delta: p.delta,
            delta_hfs: p.delta_hfs,
            atom_number: file
                .atom_number
                .ok_or_else(|| CliError::Validation("[physics] needs `atom_number` for the optical depth".into()))?,
        }),
        None => None,
    };
    let derived = physics
        .as_ref()
        .map(couplings_from_physics)
        .transpose()
        .map_err(|e| CliError::Validation(format!("[physics]: {e}")))?;

    let g1 = file.g1.or(derived.map(|c| c.g1));
    let g2 = file.g2.or(derived.map(|c| c.g2));
    let needs_g1 = !matches!(command, AlgebraCheck);
    let needs_g2 = matches!(command, OracleCompare | Suppression | Impact);
    let needs_photons = matches!(command, Sweep | Suppression | Impact | Montecarlo);
    let needs_atoms = matches!(command, Impact | Montecarlo);
    let needs_range = matches!(command, Sweep | Suppression);

    let g1 = match g1 {
        Some(v) if v.is_finite() => v,
        Some(v) => return Err(CliError::Validation(format!("`g1` must be finite, got {v}"))),
        None if needs_g1 => return Err(missing(command, "g1")),
        None => 0.0,
    };
    let g2 = match g2 {
        Some(v) if v.is_finite() => v,
        Some(v) => return Err(CliError::Validation(format!("`g2` must be finite, got {v}"))),
        None if needs_g2 => return Err(missing(command, "g2")),
        None => 0.0,
    };
    let total_photons = match file.total_photons {
        Some(v) => positive("total_photons", v)?,
        None if needs_photons => return Err(missing(command, "total_photons")),
        None => 1.0,
    };
    let atom_number = match file.atom_number {
        Some(v) => positive("atom_number", v)?,
        None if needs_atoms => return Err(missing(command, "atom_number")),
        None => 1.0,
    };

    let na_values = if needs_range {
        let lo = positive("na_min", file.na_min.ok_or_else(|| missing(command, "na_min"))?)?;
        let hi = positive("na_max", file.na_max.ok_or_else(|| missing(command, "na_max"))?)?;
        let points = file.na_points.unwrap_or(DEFAULT_NA_POINTS);
        if points == 0 || (points > 1 && lo >= hi) {
            return Err(CliError::Validation(format!(
                "atom-number range needs na_min < na_max and na_points ≥ 1 (got {lo}, {hi}, {points})"
            )));
        }
        log_spaced(lo, hi, points)
    } else {
        Vec::new()
    };

    let p = overrides.p.or(file.p).unwrap_or(DEFAULT_P);
    if p == 0 {
        return Err(CliError::Validation("`p` must be at least 1".into()));
    }
    let pulses = file.pulses.unwrap_or(2 * p);
    if pulses == 0 {
        return Err(CliError::Validation("`pulses` must be at least 1".into()));
    }
    let p_values = file.p_values.unwrap_or_else(|| DEFAULT_P_VALUES.to_vec());
    if p_values.is_empty() || p_values.contains(&0) || p_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Validation(
            "`p_values` must be non-empty, positive and strictly ascending".into(),
        ));
    }

    let scattering_eps = file.scattering_eps.unwrap_or(0.0);
    if !(0.0..=1.0).contains(&scattering_eps) {
        return Err(CliError::Validation(format!(
            "`scattering_eps` must lie in [0, 1], got {scattering_eps}"
        )));
    }
    let integrator = match (file.integrator.unwrap_or(IntegratorKind::Continuous), file.slices) {
        (IntegratorKind::SingleStep, None) => Integrator::SingleStep,
        (IntegratorKind::Continuous, None) => Integrator::Continuous,
        (IntegratorKind::Sliced, Some(k)) if k > 0 => Integrator::Sliced(k),
        (IntegratorKind::Sliced, _) => {
            return Err(CliError::Validation("integrator \"sliced\" needs `slices` ≥ 1".into()))
        }
        (_, Some(_)) => {
            return Err(CliError::Validation(
                "`slices` only applies to integrator \"sliced\"".into(),
            ))
        }
    };

    let trials = file.trials.unwrap_or(DEFAULT_TRIALS);
    if trials < 2 {
        return Err(CliError::Validation(format!(
            "`trials` must be at least 2, got {trials}"
        )));
    }
    let n_ph = file.n_ph.unwrap_or(DEFAULT_N_PH);
    let oracle_atoms = file.oracle_atoms.unwrap_or(DEFAULT_ORACLE_ATOMS);
    if n_ph == 0 || oracle_atoms == 0 {
        return Err(CliError::Validation(
            "`n_ph` and `oracle_atoms` must be at least 1".into(),
        ));
    }
    let spins = file
        .spins
        .unwrap_or_else(|| DEFAULT_SPINS.to_vec())
        .into_iter()
        .map(|f| spin("spins", f))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(RunConfig {
        command,
        g1,
        g2,
        total_photons,
        atom_number,
        spin: spin("f", file.f.unwrap_or(1.0))?,
        schedule: overrides.schedule.or(file.schedule).unwrap_or(ScheduleKind::Decoupled),
        p,
        pulses,
        na_values,
        p_values,
        include_dropped_terms: file.include_dropped_terms.unwrap_or(false),
        scattering_eps,
        integrator,
        seed: overrides.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        trials,
        n_ph,
        oracle_atoms,
        spins,
        output: overrides.output.or(file.output),
        physics,
    })
}
