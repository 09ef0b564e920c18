use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{apply_pulse, init_css, run_schedule, CouplingParams, GaussianState, PulseSchedule};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_2010;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub trials: usize,
    pub meter_mean: f64,
    /// Unbiased sample variance of the meter.
    pub meter_var: f64,
    /// Standard error of `meter_var` for Gaussian samples.
    pub stderr: f64,
    /// `var(M)` from the covariance engine.
    pub analytic_var: f64,
}

impl MonteCarloEstimate {
    /// `|sampled - analytic|` in standard errors.
    pub fn z_score(&self) -> f64 {
        (self.meter_var - self.analytic_var).abs() / self.stderr
    }
}

/// `x ↦ A x + L z` for one pulse, `z` standard normal.
struct AffineStep {
    a: Matrix4<f64>,
    l: Matrix4<f64>,
}

fn psd_sqrt(cov: &Matrix4<f64>) -> Matrix4<f64> {
    let eig = SymmetricEigen::new((cov + cov.transpose()) * 0.5);
    let root = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    eig.eigenvectors * Matrix4::from_diagonal(&root)
}

/// The per-pulse affine maps along the deterministic `Jx` trajectory.
fn affine_steps(initial: &GaussianState, params: &CouplingParams, schedule: &PulseSchedule) -> Result<Vec<AffineStep>> {
    let mut state = initial.clone();
    let mut steps = Vec::with_capacity(schedule.len());
    for &entry in &schedule.entries {
        let probe = |mean: Vector4<f64>| {
            let s = GaussianState {
                mean,
                cov: Matrix4::zeros(),
                ..state.clone()
            };
            apply_pulse(&s, entry, params)
        };
        let noise = probe(Vector4::zeros())?;
        let mut a = Matrix4::zeros();
        for k in 0..4 {
            a.set_column(k, &probe(Vector4::ith(k, 1.0))?.mean);
        }
        steps.push(AffineStep {
            a,
            l: psd_sqrt(&noise.cov),
        });
        state = apply_pulse(&state, entry, params)?;
    }
    Ok(steps)
}

fn normals(rng: &mut ChaCha8Rng) -> Vector4<f64> {
    Vector4::from_fn(|_, _| rng.sample(StandardNormal))
}

/// Samples the meter outcome of `trials` independent runs. Trial `t` draws
/// from its own ChaCha8 stream, so results do not depend on threading.
pub fn monte_carlo_sample(
    params: &CouplingParams,
    schedule: &PulseSchedule,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if trials < 2 {
        return Err(Error::param("trials", format!("need at least 2, got {trials}")));
    }
    if params.include_dropped_terms {
        return Err(Error::Unsupported(
            "the neglected terms make the noise state-dependent; sampling covers the linear model only".into(),
        ));
    }
    if schedule.len() != params.num_pulses {
        return Err(Error::ScheduleMismatch {
            expected: params.num_pulses,
            got: schedule.len(),
        });
    }
    let initial = init_css(params)?;
    let analytic_var = run_schedule(params, schedule)?.final_state.meter_var();
    let start_root = psd_sqrt(&initial.cov);
    let steps = affine_steps(&initial, params, schedule)?;

    let meters: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let mut x = initial.mean + start_root * normals(&mut rng);
            for step in &steps {
                x = step.a * x + step.l * normals(&mut rng);
            }
            x[crate::gaussian::METER]
        })
        .collect();

    let n = trials as f64;
    let mean = meters.iter().sum::<f64>() / n;
    let var = meters.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MonteCarloEstimate {
        trials,
        meter_mean: mean,
        meter_var: var,
        stderr: var * (2.0 / (n - 1.0)).sqrt(),
        analytic_var,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::PaperScale;
    use crate::gaussian::Integrator;

    fn small() -> (CouplingParams, PulseSchedule) {
        let params = PaperScale::default().params(4);
        (params, PulseSchedule::decoupled(2))
    }

    #[test]
    fn converges_to_engine_variance() {
        let (params, schedule) = small();
        let est = monte_carlo_sample(&params, &schedule, 20_000, 7).unwrap();
        assert!(est.z_score() < 4.0, "{est:?}");
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let (params, schedule) = small();
        let a = monte_carlo_sample(&params, &schedule, 500, 11).unwrap();
        let b = monte_carlo_sample(&params, &schedule, 500, 11).unwrap();
        assert_eq!(a.meter_var.to_bits(), b.meter_var.to_bits());
        let c = monte_carlo_sample(&params, &schedule, 500, 12).unwrap();
        assert_ne!(a.meter_var, c.meter_var);
    }

    #[test]
    fn two_trials_and_errors() {
        let (params, schedule) = small();
        let est = monte_carlo_sample(&params, &schedule, 2, 1).unwrap();
        assert!(est.stderr.is_finite());
        assert!(monte_carlo_sample(&params, &schedule, 1, 1).is_err());
        let dropped = CouplingParams {
            include_dropped_terms: true,
            ..params.clone()
        };
        assert!(matches!(
            monte_carlo_sample(&dropped, &schedule, 10, 1),
            Err(Error::Unsupported(_))
        ));
        assert!(monte_carlo_sample(&params, &PulseSchedule::naive(3), 10, 1).is_err());
    }

    #[test]
    fn single_step_and_decoherence_are_sampled_too() {
        let mut params = PaperScale::default().params(4).with_integrator(Integrator::SingleStep);
        params.atom_number = 1e4;
        params.scattering_eps = 0.05;
        let est = monte_carlo_sample(&params, &PulseSchedule::decoupled(2), 20_000, 3).unwrap();
        assert!(est.z_score() < 4.0, "{est:?}");
    }
}
