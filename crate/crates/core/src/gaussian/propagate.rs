//! Moment propagation through single pulses and whole schedules.
//!
//! Per photon, with `s = ±1` the probe sign and `μ = ±1` the meter sign, the
//! linearized relations read
//!
//! ```text
//! dJz  =  g2 (s/2) Jy                     [- g2 Jx dSy]
//! dJy  = -g1 Jx dSz - g2 (s/2) J[x,y]
//! dM   =  μ (dSy + g1 (s/2) Jz)           [- μ g2 dSz Jy]
//! ```
//!
//! where `dSy`, `dSz` are fresh shot noise of variance 1/4 per photon and
//! the bracketed terms are only kept with `include_dropped_terms`. All
//! right-hand sides use pre-step values. [`Integrator::SingleStep`] applies
//! this once with `nL` photons; [`Integrator::Continuous`] integrates it
//! exactly over the pulse.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, Matrix4, Matrix4x2, Vector4};

use crate::error::{Error, Result};
use crate::gaussian::state::{init_css, AlignmentClosure, GaussianState, JXY, JY, JZ, METER};
use crate::gaussian::{CouplingParams, Integrator, PulseEntry, PulseSchedule};

const SHOT_NOISE_PER_PHOTON: f64 = 0.25;
const SY: usize = 0;
const SZ: usize = 1;

/// Drift `F` and noise loading `G` per photon.
#[derive(Clone, Copy, Debug)]
struct Generator {
    drift: Matrix4<f64>,
    noise: Matrix4x2<f64>,
    /// Coefficient of the `dSz · Jy` product in the meter, if kept.
    product: Option<f64>,
}

impl Generator {
    fn new(entry: PulseEntry, jx: f64, closure: AlignmentClosure, params: &CouplingParams) -> Self {
        let s = entry.sx_sign.value();
        let mu = entry.meter_sign.value();
        let (g1, g2) = (params.g1, params.g2);

        let mut drift = Matrix4::zeros();
        drift[(JY, JXY)] = -g2 * s / 2.0;
        drift[(JZ, JY)] = g2 * s / 2.0;
        drift[(METER, JZ)] = mu * g1 * s / 2.0;

        let mut noise = Matrix4x2::zeros();
        noise[(JY, SZ)] = -g1 * jx;
        noise[(METER, SY)] = mu;

        let mut product = None;
        if params.include_dropped_terms {
            noise[(JZ, SY)] = -g2 * jx;
            product = Some(-mu * g2);
        }

        if closure == AlignmentClosure::MirrorsJz {
            let dz = drift.row(JZ).into_owned();
            drift.set_row(JXY, &dz);
            let nz = noise.row(JZ).into_owned();
            noise.set_row(JXY, &nz);
        }

        Generator { drift, noise, product }
    }

    /// One first-order step carrying `photons` photons.
    fn linear_step(&self, state: &GaussianState, photons: f64) -> GaussianState {
        let a = Matrix4::identity() + self.drift * photons;
        let mut b = self.noise;
        let q = SHOT_NOISE_PER_PHOTON * photons;
        let mut extra = 0.0;
        if let Some(k) = self.product {
            // dSz·Jy = dSz·⟨Jy⟩ + dSz·δJy; the second piece is uncorrelated
            // with everything linear and has variance q·var(Jy).
            b[(METER, SZ)] += k * state.mean[JY];
            extra = k * k * q * state.cov[(JY, JY)];
        }
        let mut cov = a * state.cov * a.transpose() + b * b.transpose() * q;
        cov[(METER, METER)] += extra;
        GaussianState {
            mean: a * state.mean,
            cov: symmetrize(cov),
            jx_mean: state.jx_mean,
            ensemble: state.ensemble.clone(),
        }
    }

    /// Linear generator of `v = (m, vec R, 1)` with `R = ⟨x xᵀ⟩`.
    fn moment_generator(&self) -> DMatrix<f64> {
        const DIM: usize = 4 + 16 + 1;
        let r = |i: usize, j: usize| 4 + 4 * i + j;
        let one = DIM - 1;
        let mut l = DMatrix::zeros(DIM, DIM);
        let f = &self.drift;
        let ggt = self.noise * self.noise.transpose() * SHOT_NOISE_PER_PHOTON;
        for i in 0..4 {
            for k in 0..4 {
                l[(i, k)] = f[(i, k)];
            }
            for j in 0..4 {
                for k in 0..4 {
                    l[(r(i, j), r(k, j))] += f[(i, k)];
                    l[(r(i, j), r(i, k))] += f[(j, k)];
                }
                l[(r(i, j), one)] += ggt[(i, j)];
            }
        }
        if let Some(k) = self.product {
            l[(r(METER, METER), r(JY, JY))] += k * k * SHOT_NOISE_PER_PHOTON;
            for j in 0..4 {
                let cross = k * SHOT_NOISE_PER_PHOTON * self.noise[(j, SZ)];
                l[(r(METER, j), JY)] += cross;
                l[(r(j, METER), JY)] += cross;
            }
        }
        l
    }

    fn continuous_map(&self, photons: f64) -> DMatrix<f64> {
        (self.moment_generator() * photons).exp()
    }
}

fn symmetrize(m: Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

fn apply_moment_map(map: &DMatrix<f64>, state: &GaussianState) -> GaussianState {
    let mut v = DVector::zeros(21);
    let raw = state.cov + state.mean * state.mean.transpose();
    for i in 0..4 {
        v[i] = state.mean[i];
        for j in 0..4 {
            v[4 + 4 * i + j] = raw[(i, j)];
        }
    }
    v[20] = 1.0;
    let w = map * v;
    let mean = Vector4::from_fn(|i, _| w[i]);
    let raw = Matrix4::from_fn(|i, j| w[4 + 4 * i + j]);
    GaussianState {
        mean,
        cov: symmetrize(raw - mean * mean.transpose()),
        jx_mean: state.jx_mean,
        ensemble: state.ensemble.clone(),
    }
}

/// Pushes one pulse through the atoms (no decoherence).
fn propagate_pulse(state: &GaussianState, entry: PulseEntry, params: &CouplingParams) -> GaussianState {
    let generator = Generator::new(entry, state.jx_mean, state.ensemble.closure, params);
    let photons = params.photons_per_pulse;
    match params.integrator {
        Integrator::SingleStep => generator.linear_step(state, photons),
        Integrator::Sliced(k) => {
            let dn = photons / k as f64;
            (0..k).fold(state.clone(), |s, _| generator.linear_step(&s, dn))
        }
        Integrator::Continuous => apply_moment_map(&generator.continuous_map(photons), state),
    }
}

/// One pulse followed by the per-pulse depolarization `params.scattering_eps`.
pub fn apply_pulse(state: &GaussianState, entry: PulseEntry, params: &CouplingParams) -> Result<GaussianState> {
    let next = propagate_pulse(state, entry, params);
    apply_decoherence(&next, params.scattering_eps)
}

/// Isotropic depolarization of a fraction `eps` of the atoms.
///
/// `Jx` and the atomic means shrink by `1 - eps`, the atomic covariance
/// becomes `(1-eps)² C + eps·NA·K` with `K` the single-atom fully mixed
/// covariance, atom–meter cross terms shrink by `1 - eps`, and `var(M)` is
/// untouched.
pub fn apply_decoherence(state: &GaussianState, eps: f64) -> Result<GaussianState> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::param("scattering_eps", format!("{eps} is outside [0, 1]")));
    }
    if eps == 0.0 {
        return Ok(state.clone());
    }
    let keep = 1.0 - eps;
    let d = Matrix4::from_diagonal(&Vector4::new(keep, keep, keep, 1.0));
    let mut cov = d * state.cov * d;
    let na = state.ensemble.atom_number;
    for a in 0..3 {
        for b in 0..3 {
            cov[(a, b)] += eps * na * state.ensemble.mixed_cov[(a, b)];
        }
    }
    Ok(GaussianState {
        mean: d * state.mean,
        cov: symmetrize(cov),
        jx_mean: keep * state.jx_mean,
        ensemble: state.ensemble.clone(),
    })
}

/// Meter statistics at the end of a schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub meter_mean: f64,
    pub meter_var: f64,
    pub final_state: GaussianState,
}

impl RunOutcome {
    /// `4·var(M)/NL`: meter variance in units of the shot-noise floor.
    pub fn normalized_meter_var(&self, total_photons: f64) -> f64 {
        4.0 * self.meter_var / total_photons
    }
}

/// Starts from [`init_css`] and applies every pulse of `schedule`.
pub fn run_schedule(params: &CouplingParams, schedule: &PulseSchedule) -> Result<RunOutcome> {
    let initial = init_css(params)?;
    run_schedule_from(&initial, params, schedule, |_, _| {})
}

/// As [`run_schedule`] from an arbitrary initial state; `observe` sees the
/// state after each pulse (0-based index).
pub fn run_schedule_from(
    initial: &GaussianState,
    params: &CouplingParams,
    schedule: &PulseSchedule,
    mut observe: impl FnMut(usize, &GaussianState),
) -> Result<RunOutcome> {
    params.validate()?;
    if schedule.len() != params.num_pulses {
        return Err(Error::ScheduleMismatch {
            expected: params.num_pulses,
            got: schedule.len(),
        });
    }

    // The continuous map depends only on the signs and Jx; reuse it while
    // those repeat.
    let mut cache: HashMap<(i8, i8, u64), DMatrix<f64>> = HashMap::new();
    let mut state = initial.clone();
    for (index, &entry) in schedule.entries.iter().enumerate() {
        let next = match params.integrator {
            Integrator::Continuous => {
                let key = (
                    entry.sx_sign.value() as i8,
                    entry.meter_sign.value() as i8,
                    state.jx_mean.to_bits(),
                );
                let map = cache.entry(key).or_insert_with(|| {
                    Generator::new(entry, state.jx_mean, state.ensemble.closure, params)
                        .continuous_map(params.photons_per_pulse)
                });
                apply_moment_map(map, &state)
            }
            _ => propagate_pulse(&state, entry, params),
        };
        state = apply_decoherence(&next, params.scattering_eps)?;
        state.check_physical()?;
        observe(index, &state);
    }
    Ok(RunOutcome {
        meter_mean: state.meter_mean(),
        meter_var: state.meter_var(),
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{PulseSchedule, Sign};

    const PLUS: PulseEntry = PulseEntry {
        sx_sign: Sign::Plus,
        meter_sign: Sign::Plus,
    };

    fn displaced(params: &CouplingParams) -> GaussianState {
        let mut s = init_css(params).unwrap();
        s.mean[JY] = 40.0;
        s.mean[JZ] = -25.0;
        s.mean[JXY] = -25.0;
        s.cov[(JY, JZ)] = 3.0;
        s.cov[(JZ, JY)] = 3.0;
        s.cov[(JXY, JY)] = 3.0;
        s.cov[(JY, JXY)] = 3.0;
        s
    }

    #[test]
    fn pure_qnd_single_pulse() {
        let p = CouplingParams::new(1e-3, 0.0, 200.0, 1, 1000.0);
        let s0 = displaced(&p);
        let s1 = apply_pulse(&s0, PLUS, &p).unwrap();
        let nl = p.photons_per_pulse;
        assert!((s1.mean[METER] - p.g1 * nl / 2.0 * s0.mean[JZ]).abs() < 1e-12);
        assert_eq!(s1.cov[(JZ, JZ)], s0.cov[(JZ, JZ)]);
        assert_eq!(s1.mean[JZ], s0.mean[JZ]);
    }

    #[test]
    fn free_propagation_adds_shot_noise_only() {
        let p = CouplingParams::new(0.0, 0.0, 200.0, 1, 1000.0);
        let s0 = displaced(&p);
        let s1 = apply_pulse(&s0, PLUS, &p).unwrap();
        assert_eq!(s1.mean, s0.mean);
        let mut expected = s0.cov;
        expected[(METER, METER)] += 50.0;
        assert_eq!(s1.cov, expected);
    }

    #[test]
    fn g2_feeds_jy_into_jz() {
        let p = CouplingParams::new(0.0, 2e-3, 100.0, 1, 1000.0);
        let s0 = displaced(&p);
        let s1 = apply_pulse(&s0, PLUS, &p).unwrap();
        let sx = p.photons_per_pulse / 2.0;
        let expected = s0.cov[(JZ, JZ)] + p.g2 * p.g2 * sx * sx * s0.cov[(JY, JY)] + 2.0 * p.g2 * sx * s0.cov[(JZ, JY)];
        assert!((s1.cov[(JZ, JZ)] - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn back_action_on_jy() {
        let p = CouplingParams::new(1e-3, 0.0, 100.0, 1, 1000.0);
        let s0 = init_css(&p).unwrap();
        let s1 = apply_pulse(&s0, PLUS, &p).unwrap();
        let added = p.g1 * p.g1 * (p.photons_per_pulse / 4.0) * s0.jx_mean * s0.jx_mean;
        assert!((s1.var(JY) - s0.var(JY) - added).abs() < 1e-9 * added);
    }

    #[test]
    fn continuous_matches_fine_slicing() {
        let mut p = CouplingParams::new(2e-3, 1.5e-3, 400.0, 2, 500.0);
        p.include_dropped_terms = true;
        let s0 = displaced(&p);
        let schedule = PulseSchedule::decoupled(1);
        let run = |integrator| {
            run_schedule_from(&s0, &p.with_integrator(integrator), &schedule, |_, _| {})
                .unwrap()
                .final_state
        };
        let exact = run(Integrator::Continuous);
        let coarse = run(Integrator::Sliced(200));
        let fine = run(Integrator::Sliced(400));
        let err = |s: &GaussianState| (s.cov - exact.cov).abs().max() + (s.mean - exact.mean).abs().max();
        // first-order slicing: error halves with the slice width
        let ratio = err(&coarse) / err(&fine);
        assert!(err(&fine) < 1e-3 * exact.cov.abs().max(), "err {}", err(&fine));
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn sliced_one_is_single_step() {
        let p = CouplingParams::new(1e-3, 1e-3, 100.0, 1, 200.0);
        let s0 = displaced(&p);
        let a = apply_pulse(&s0, PLUS, &p).unwrap();
        let b = apply_pulse(&s0, PLUS, &p.with_integrator(Integrator::Sliced(1))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn decoupled_pair_returns_jz_exactly_in_continuous_limit() {
        let p = CouplingParams::new(0.0, 1e-2, 400.0, 2, 1000.0).with_integrator(Integrator::Continuous);
        let s0 = displaced(&p);
        let out = run_schedule_from(&s0, &p, &PulseSchedule::decoupled(1), |_, _| {}).unwrap();
        let s = out.final_state;
        assert!((s.mean[JZ] - s0.mean[JZ]).abs() < 1e-9);
        assert!((s.cov[(JZ, JZ)] - s0.cov[(JZ, JZ)]).abs() < 1e-9 * s0.cov[(JZ, JZ)]);
    }

    #[test]
    fn decoherence_limits() {
        let p = CouplingParams::new(1e-3, 1e-3, 100.0, 1, 1e6);
        let s0 = init_css(&p).unwrap();
        assert_eq!(apply_decoherence(&s0, 0.0).unwrap(), s0);

        let s = apply_decoherence(&s0, 0.01).unwrap();
        assert!((s.jx_mean - 4.95e5).abs() < 1e-6);

        let full = apply_decoherence(&s0, 1.0).unwrap();
        assert_eq!(full.jx_mean, 0.0);
        // f = 1 mixed state: ⟨jz²⟩ = Tr(fz²)/12 = 1/6
        assert!((full.var(JZ) - 1e6 / 6.0).abs() < 1e-6);
        assert!((full.var(JY) - 1e6 * s0.ensemble.mixed_cov[(JY, JY)]).abs() < 1e-6);
        assert!(full.check_physical().is_ok());

        assert!(apply_decoherence(&s0, -0.1).is_err());
        assert!(apply_decoherence(&s0, 1.1).is_err());
    }

    #[test]
    fn decoherence_leaves_meter_variance() {
        let p = CouplingParams::new(1e-3, 0.0, 100.0, 1, 100.0);
        let mut s0 = init_css(&p).unwrap();
        s0 = apply_pulse(&s0, PLUS, &p).unwrap();
        let s = apply_decoherence(&s0, 0.3).unwrap();
        assert_eq!(s.meter_var(), s0.meter_var());
        assert!((s.cov[(METER, JZ)] - 0.7 * s0.cov[(METER, JZ)]).abs() < 1e-15);
    }

    #[test]
    fn schedule_length_must_match() {
        let p = CouplingParams::new(1e-3, 0.0, 100.0, 4, 100.0);
        let err = run_schedule(&p, &PulseSchedule::decoupled(1)).unwrap_err();
        assert_eq!(err, Error::ScheduleMismatch { expected: 4, got: 2 });
    }

    #[test]
    fn naive_without_g1_leaves_only_shot_noise_in_meter() {
        let p = CouplingParams::new(0.0, 3e-3, 1000.0, 5, 1000.0);
        let out = run_schedule(&p, &PulseSchedule::naive(5)).unwrap();
        assert_eq!(out.meter_var, 1000.0 / 4.0);
        assert_eq!(out.meter_mean, 0.0);
    }

    #[test]
    fn decoupled_pure_qnd_meter_is_projection_line() {
        let p = CouplingParams::new(1e-4, 0.0, 2000.0, 6, 5000.0);
        let out = run_schedule(&p, &PulseSchedule::decoupled(3)).unwrap();
        let nl = p.total_photons();
        let expected = 1.0 + p.g1 * p.g1 * nl * 5000.0 / 4.0;
        let got = out.normalized_meter_var(nl);
        assert!((got - expected).abs() < 1e-12 * expected);
    }
}
