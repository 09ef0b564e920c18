use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{init_css, run_schedule, run_schedule_from, CouplingParams, PulseSchedule, ScheduleMode, JY, JZ};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub atom_number: f64,
    /// `4·var(M)/NL`
    pub normalized_meter_var: f64,
    pub mode: ScheduleMode,
    pub jx_final: f64,
}

/// The schedule for `mode` and the parameters it runs with. Naive runs use
/// `params.num_pulses`; decoupled runs use `2p` pulses. The photon budget
/// is kept either way.
pub fn schedule_for(params: &CouplingParams, mode: ScheduleMode) -> (CouplingParams, PulseSchedule) {
    match mode {
        ScheduleMode::Naive => (params.clone(), PulseSchedule::naive(params.num_pulses)),
        ScheduleMode::Decoupled(p) => (params.with_pulses(2 * p), PulseSchedule::decoupled(p)),
    }
}

pub fn sweep_atom_number(params: &CouplingParams, atom_numbers: &[f64], mode: ScheduleMode) -> Result<Vec<SweepRow>> {
    if atom_numbers.is_empty() {
        return Err(Error::param("atom_numbers", "need at least one value"));
    }
    if atom_numbers.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param("atom_numbers", "must be strictly ascending"));
    }
    if let ScheduleMode::Decoupled(0) = mode {
        return Err(Error::param("p", "must be at least 1"));
    }
    let (base, schedule) = schedule_for(params, mode);
    atom_numbers
        .par_iter()
        .map(|&na| {
            let run = base.with_atoms(na);
            let outcome = run_schedule(&run, &schedule)?;
            Ok(SweepRow {
                atom_number: na,
                normalized_meter_var: outcome.normalized_meter_var(run.total_photons()),
                mode,
                jx_final: outcome.final_state.jx_mean,
            })
        })
        .collect()
}

/// `y ≈ c0 + c1·na + c2·na²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticFit {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

impl QuadraticFit {
    /// `c2·x² / (c1·x)` at `x`: how much of the excess noise is quadratic.
    pub fn quadratic_share(&self, x: f64) -> f64 {
        self.c2 * x * x / (self.c1 * x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c0 + self.c1 * x + self.c2 * x * x
    }
}

/// Unweighted least squares through a QR factorization of the column-scaled
/// design matrix.
pub fn fit_linear_quadratic(rows: &[SweepRow]) -> Result<QuadraticFit> {
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.atom_number, r.normalized_meter_var)).collect();
    fit_points(&points)
}

pub fn fit_points(points: &[(f64, f64)]) -> Result<QuadraticFit> {
    if points.len() < 4 {
        return Err(Error::param(
            "rows",
            format!("need at least 4 points, got {}", points.len()),
        ));
    }
    let scale = points.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::RankDeficient("all abscissae are zero".into()));
    }
    let n = points.len();
    let design = DMatrix::from_fn(n, 3, |i, j| (points[i].0 / scale).powi(j as i32));
    let y = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let qr = design.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let largest = (0..3).fold(0.0f64, |m, k| m.max(r[(k, k)].abs()));
    if (0..3).any(|k| r[(k, k)].abs() <= 1e-10 * largest) {
        return Err(Error::RankDeficient(
            "abscissae do not determine a quadratic (fewer than 3 distinct values)".into(),
        ));
    }
    let b = r
        .solve_upper_triangular(&(q.transpose() * &y))
        .ok_or_else(|| Error::RankDeficient("triangular solve failed".into()))?;
    let residual = ((&design * &b - &y).norm_squared() / n as f64).sqrt();
    Ok(QuadraticFit {
        c0: b[0],
        c1: b[1] / scale,
        c2: b[2] / (scale * scale),
        residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuppressionPoint {
    pub p: usize,
    pub fit: QuadraticFit,
}

/// The fitted coefficients of a decoupled sweep for each order `p`.
pub fn quadratic_suppression_curve(
    params: &CouplingParams,
    atom_numbers: &[f64],
    p_values: &[usize],
) -> Result<Vec<SuppressionPoint>> {
    if p_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("p_values", "must be strictly ascending"));
    }
    p_values
        .iter()
        .map(|&p| {
            let rows = sweep_atom_number(params, atom_numbers, ScheduleMode::Decoupled(p))?;
            Ok(SuppressionPoint {
                p,
                fit: fit_linear_quadratic(&rows)?,
            })
        })
        .collect()
}

/// Relative increase of the final `var(Jz)` when the neglected terms are
/// kept.
pub fn dropped_terms_impact(params: &CouplingParams, mode: ScheduleMode) -> Result<f64> {
    let (base, schedule) = schedule_for(params, mode);
    let var_jz = |dropped: bool| -> Result<f64> {
        let run = CouplingParams {
            include_dropped_terms: dropped,
            ..base.clone()
        };
        Ok(run_schedule(&run, &schedule)?.final_state.var(JZ))
    };
    let without = var_jz(false)?;
    Ok(var_jz(true)? / without - 1.0)
}

/// How far a decoupled run moves `Jz` from where it started.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QndResidual {
    pub p: usize,
    /// `|Δ⟨Jz⟩|` in units of the initial standard deviation of `Jz`.
    pub mean_shift: f64,
    /// `|Δvar(Jz)| / var(Jz)₀`.
    pub var_change: f64,
}

impl QndResidual {
    pub fn max(&self) -> f64 {
        self.mean_shift.max(self.var_change)
    }
}

/// Runs `mode` from the coherent spin state displaced by one standard
/// deviation along `Jy`, so that both the mean and the spread of `Jz` can
/// be fed by the `g2` rotation.
pub fn qnd_residual(params: &CouplingParams, mode: ScheduleMode) -> Result<QndResidual> {
    let (base, schedule) = schedule_for(params, mode);
    let mut start = init_css(&base)?;
    start.mean[JY] += start.var(JY).sqrt();
    let sigma = start.var(JZ).sqrt();
    let end = run_schedule_from(&start, &base, &schedule, |_, _| {})?.final_state;
    Ok(QndResidual {
        p: match mode {
            ScheduleMode::Decoupled(p) => p,
            ScheduleMode::Naive => 0,
        },
        mean_shift: (end.mean[JZ] - start.mean[JZ]).abs() / sigma,
        var_change: (end.var(JZ) - start.var(JZ)).abs() / start.var(JZ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{projection_noise_line, PaperScale};
    use crate::spin_ops::Spin;
    use approx::assert_relative_eq;

    fn row(na: f64, y: f64) -> SweepRow {
        SweepRow {
            atom_number: na,
            normalized_meter_var: y,
            mode: ScheduleMode::Naive,
            jx_final: na / 2.0,
        }
    }

    #[test]
    fn fit_recovers_exact_quadratic() {
        let (c0, c1, c2) = (1.0, 3.2e-6, 4.0e-13);
        let rows: Vec<_> = PaperScale::atom_grid()
            .into_iter()
            .map(|x| row(x, c0 + c1 * x + c2 * x * x))
            .collect();
        let fit = fit_linear_quadratic(&rows).unwrap();
        assert_relative_eq!(fit.c0, c0, max_relative = 1e-9);
        assert_relative_eq!(fit.c1, c1, max_relative = 1e-9);
        assert_relative_eq!(fit.c2, c2, max_relative = 1e-9);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        let few: Vec<_> = (1..4).map(|k| row(k as f64, 1.0)).collect();
        assert!(matches!(
            fit_linear_quadratic(&few),
            Err(Error::InvalidParameter { .. })
        ));
        let collinear: Vec<_> = [1.0, 1.0, 2.0, 2.0, 1.0].iter().map(|&x| row(x, x)).collect();
        assert!(matches!(fit_linear_quadratic(&collinear), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn g2_free_sweep_is_the_projection_line() {
        let params = PaperScale::default().with_g2(0.0).params(10);
        let grid = PaperScale::atom_grid();
        let rows = sweep_atom_number(&params, &grid, ScheduleMode::Decoupled(5)).unwrap();
        assert_eq!(rows.len(), grid.len());
        for r in &rows {
            let line = projection_noise_line(params.g1, params.total_photons(), r.atom_number, Spin::ONE);
            assert_relative_eq!(r.normalized_meter_var, line, max_relative = 1e-9);
        }
        let fit = fit_linear_quadratic(&rows).unwrap();
        let na_max = grid[grid.len() - 1];
        assert!(fit.c2.abs() * na_max * na_max < 1e-6 * fit.c1 * na_max);
    }

    #[test]
    fn sweep_inputs() {
        let params = PaperScale::default().params(10);
        assert_eq!(
            sweep_atom_number(&params, &[1e6], ScheduleMode::Naive).unwrap().len(),
            1
        );
        assert!(sweep_atom_number(&params, &[], ScheduleMode::Naive).is_err());
        assert!(sweep_atom_number(&params, &[2e6, 1e6], ScheduleMode::Naive).is_err());
        assert!(sweep_atom_number(&params, &[1e6], ScheduleMode::Decoupled(0)).is_err());
    }

    #[test]
    fn naive_probing_is_noisier() {
        let params = PaperScale::default().params(10);
        let naive = sweep_atom_number(&params, &[1e6], ScheduleMode::Naive).unwrap();
        let decoupled = sweep_atom_number(&params, &[1e6], ScheduleMode::Decoupled(5)).unwrap();
        assert!(naive[0].normalized_meter_var > decoupled[0].normalized_meter_var);
    }

    #[test]
    fn dropped_terms_scale_with_g2_squared() {
        let scale = PaperScale::default();
        let mode = ScheduleMode::Decoupled(scale.p);
        assert_eq!(dropped_terms_impact(&scale.with_g2(0.0).params(10), mode).unwrap(), 0.0);
        let small = dropped_terms_impact(&scale.with_g2(2.5e-9).params(10), mode).unwrap();
        let double = dropped_terms_impact(&scale.with_g2(5e-9).params(10), mode).unwrap();
        assert!(small > 0.0);
        let ratio = double / small;
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn g2_free_runs_leave_jz_alone() {
        let params = PaperScale::default().with_g2(0.0).params(10);
        let r = qnd_residual(&params, ScheduleMode::Decoupled(3)).unwrap();
        assert_eq!(r.mean_shift, 0.0);
        assert!(r.var_change < 1e-12);
    }
}
