use log::warn;
use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{
    run_schedule_from, CouplingParams, Ensemble, GaussianState, Integrator, PulseSchedule, Sign, JY, JZ,
};
use crate::oracle::evolve::{product_atomic_state, tilted_single_atom_state, OracleState, PulsePropagator};
use crate::oracle::operators::build_joint_operators;

/// Above this value of `g·max(n_ph, na)` the first-order engine is not
/// expected to track the exact evolution.
pub const LINEARIZATION_LIMIT: f64 = 0.1;

/// Initial single-atom state shared by both engines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialTilt {
    pub toward_y: f64,
    pub toward_z: f64,
}

impl InitialTilt {
    /// The plain x-polarized coherent spin state.
    pub const NONE: InitialTilt = InitialTilt {
        toward_y: 0.0,
        toward_z: 0.0,
    };
}

impl Default for InitialTilt {
    /// A small tilt so that `⟨Jy⟩` and `⟨Jz⟩` start away from zero and
    /// first-moment dynamics are visible.
    fn default() -> Self {
        InitialTilt {
            toward_y: 0.3,
            toward_z: 0.2,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub jz: f64,
    pub jy: f64,
    pub meter_mean: f64,
    pub meter_var: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseComparison {
    pub pulse: usize,
    pub oracle: Moments,
    pub gaussian: Moments,
}

impl PulseComparison {
    /// Largest first-moment difference (`Jz`, `Jy`, `⟨M⟩`).
    pub fn first_moment_deviation(&self) -> f64 {
        let (o, g) = (&self.oracle, &self.gaussian);
        (o.jz - g.jz)
            .abs()
            .max((o.jy - g.jy).abs())
            .max((o.meter_mean - g.meter_mean).abs())
    }

    pub fn meter_var_deviation(&self) -> f64 {
        (self.oracle.meter_var - self.gaussian.meter_var).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub initial: Moments,
    pub pulses: Vec<PulseComparison>,
    /// `g·max(n_ph, na)` exceeded [`LINEARIZATION_LIMIT`].
    pub coupling_warning: bool,
}

impl ComparisonReport {
    pub fn max_first_moment_deviation(&self) -> f64 {
        self.pulses
            .iter()
            .map(|p| p.first_moment_deviation())
            .fold(0.0, f64::max)
    }

    pub fn max_meter_var_deviation(&self) -> f64 {
        self.pulses.iter().map(|p| p.meter_var_deviation()).fold(0.0, f64::max)
    }

    /// Largest `|⟨Jz⟩ - ⟨Jz⟩₀|` seen by the oracle over the schedule.
    pub fn oracle_jz_excursion(&self) -> f64 {
        self.pulses
            .iter()
            .map(|p| (p.oracle.jz - self.initial.jz).abs())
            .fold(0.0, f64::max)
    }
}

/// Runs `schedule` through the exact oracle and through the covariance
/// engine (single first-order step per pulse) from the same product state.
pub fn oracle_vs_gaussian(
    na: usize,
    f: f64,
    n_ph: usize,
    g1: f64,
    g2: f64,
    schedule: &PulseSchedule,
) -> Result<ComparisonReport> {
    oracle_vs_gaussian_from(na, f, n_ph, g1, g2, schedule, InitialTilt::default())
}

pub fn oracle_vs_gaussian_from(
    na: usize,
    f: f64,
    n_ph: usize,
    g1: f64,
    g2: f64,
    schedule: &PulseSchedule,
    tilt: InitialTilt,
) -> Result<ComparisonReport> {
    if schedule.is_empty() {
        return Err(Error::param("schedule", "needs at least one pulse"));
    }
    let ops = build_joint_operators(na, f, n_ph)?;
    let strength = g1.abs().max(g2.abs()) * n_ph.max(na) as f64;
    let coupling_warning = strength > LINEARIZATION_LIMIT;
    if coupling_warning {
        warn!("coupling·size = {strength:.3} exceeds {LINEARIZATION_LIMIT}; linearization is not expected to hold");
    }

    let single: DVector<Complex64> = tilted_single_atom_state(&ops.single, tilt.toward_y, tilt.toward_z);
    let mut oracle = OracleState::pure(&product_atomic_state(&single, na));
    let oracle_moments = |s: &OracleState| Moments {
        jz: s.expect(&ops.atomic.jz),
        jy: s.expect(&ops.atomic.jy),
        meter_mean: s.meter_mean(),
        meter_var: s.meter_var(),
    };
    let initial = oracle_moments(&oracle);

    let propagator = PulsePropagator::new(&ops, g1, g2);
    let mut oracle_trace = Vec::with_capacity(schedule.len());
    for entry in &schedule.entries {
        oracle = propagator.evolve_pulse(&oracle, entry.sx_sign, entry.meter_sign)?.state;
        oracle_trace.push(oracle_moments(&oracle));
    }

    let mut params = CouplingParams::new(g1, g2, (n_ph * schedule.len()) as f64, schedule.len(), na as f64);
    params.spin = ops.spin;
    params.integrator = Integrator::SingleStep;
    let start = GaussianState::product_state(
        na as f64,
        &ops.single.moments(&single),
        Ensemble::new(na as f64, ops.spin),
    );
    let mut gaussian_trace = Vec::with_capacity(schedule.len());
    run_schedule_from(&start, &params, schedule, |_, s| {
        gaussian_trace.push(Moments {
            jz: s.mean[JZ],
            jy: s.mean[JY],
            meter_mean: s.meter_mean(),
            meter_var: s.meter_var(),
        })
    })?;

    let pulses = oracle_trace
        .into_iter()
        .zip(gaussian_trace)
        .enumerate()
        .map(|(i, (oracle, gaussian))| PulseComparison {
            pulse: i + 1,
            oracle,
            gaussian,
        })
        .collect();
    Ok(ComparisonReport {
        initial,
        pulses,
        coupling_warning,
    })
}

/// `⟨Jz⟩` after each pulse of `schedule`, from the oracle alone.
pub fn oracle_jz_trace(
    na: usize,
    f: f64,
    n_ph: usize,
    g1: f64,
    g2: f64,
    schedule: &PulseSchedule,
    tilt: InitialTilt,
) -> Result<Vec<f64>> {
    let ops = build_joint_operators(na, f, n_ph)?;
    let single = tilted_single_atom_state(&ops.single, tilt.toward_y, tilt.toward_z);
    let mut state = OracleState::pure(&product_atomic_state(&single, na));
    let propagator = PulsePropagator::new(&ops, g1, g2);
    let mut out = vec![state.expect(&ops.atomic.jz)];
    for entry in &schedule.entries {
        state = propagator.evolve_pulse(&state, entry.sx_sign, Sign::Plus)?.state;
        out.push(state.expect(&ops.atomic.jz));
    }
    Ok(out)
}
