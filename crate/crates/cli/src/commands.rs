use qnd::experiment::{
    dropped_terms_impact, fit_linear_quadratic, monte_carlo_sample, projection_noise_line, quadratic_suppression_curve,
    schedule_for, sweep_atom_number, QuadraticFit,
};
use qnd::gaussian::{CouplingParams, PulseSchedule, ScheduleMode};
use qnd::linalg::{commutator, max_abs, CMatrix, Complex64};
use qnd::oracle::{bangbang_deviation, build_heff, build_joint_operators, oracle_vs_gaussian};
use qnd::spin_ops::SpinOperatorSet;

use crate::config::{Command, RunConfig, ScheduleKind};
use crate::output::{Table, Value};
use crate::CliError;

/// Tolerance of the operator identities in `algebra-check`.
pub const ALGEBRA_TOLERANCE: f64 = 1e-12;

/// A finished run: the table to write and, if a check failed, why.
#[derive(Debug)]
pub struct Report {
    pub table: Table,
    pub failure: Option<String>,
}

impl Report {
    fn ok(table: Table) -> Self {
        Report { table, failure: None }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command {
        Command::AlgebraCheck => algebra_check(cfg),
        Command::OracleCompare => oracle_compare(cfg),
        Command::Sweep => sweep(cfg),
        Command::Suppression => suppression(cfg),
        Command::Impact => impact(cfg),
        Command::Montecarlo => montecarlo(cfg),
    }
}

fn coupling_params(cfg: &RunConfig) -> CouplingParams {
    let mut params = CouplingParams::new(cfg.g1, cfg.g2, cfg.total_photons, cfg.num_pulses(), cfg.atom_number)
        .with_integrator(cfg.integrator);
    params.spin = cfg.spin;
    params.scattering_eps = cfg.scattering_eps;
    params.include_dropped_terms = cfg.include_dropped_terms;
    params
}

fn schedule(cfg: &RunConfig) -> PulseSchedule {
    match cfg.schedule {
        ScheduleKind::Naive => PulseSchedule::naive(cfg.pulses),
        ScheduleKind::Decoupled => PulseSchedule::decoupled(cfg.p),
    }
}

fn mode_label(mode: ScheduleMode) -> (Value, Value) {
    match mode {
        ScheduleMode::Naive => ("naive".into(), "".into()),
        ScheduleMode::Decoupled(p) => ("decoupled".into(), p.into()),
    }
}

fn note_fit(table: &mut Table, fit: &QuadraticFit, na_max: f64) {
    table.note("c0", fit.c0);
    table.note("c1", fit.c1);
    table.note("c2", fit.c2);
    table.note("fit_rms_residual", fit.residual);
    table.note("quadratic_share_at_na_max", fit.quadratic_share(na_max));
}

fn algebra_check(cfg: &RunConfig) -> Result<Report, CliError> {
    // each residual is max |lhs - rhs| of one identity, e.g. comm_jx_jy is [jx, jy] - i·jxy
    let mut table = Table::new(&["f", "check", "residual"]);
    let mut worst: f64 = 0.0;
    for &spin in &cfg.spins {
        let ops = SpinOperatorSet::new(spin);
        let i = |m: &CMatrix| m * Complex64::i();
        let f = spin.value();
        let closed_form = &ops.fz * Complex64::from(f * (f + 1.0) - 0.5) - &ops.fz * &ops.fz * &ops.fz;
        let mut checks = vec![
            ("comm_fx_fy", max_abs(&(commutator(&ops.fx, &ops.fy)? - i(&ops.fz)))),
            ("comm_fy_fz", max_abs(&(commutator(&ops.fy, &ops.fz)? - i(&ops.fx)))),
            ("comm_fz_fx", max_abs(&(commutator(&ops.fz, &ops.fx)? - i(&ops.fy)))),
            ("comm_jz_jx", max_abs(&(commutator(&ops.jz, &ops.jx)? - i(&ops.jy)))),
            ("comm_jy_jz", max_abs(&(commutator(&ops.jy, &ops.jz)? - i(&ops.jx)))),
            ("comm_jx_jy", max_abs(&(commutator(&ops.jx, &ops.jy)? - i(&ops.jxy)))),
            ("jxy_closed_form", max_abs(&(&ops.jxy - closed_form))),
        ];
        if spin == qnd::spin_ops::Spin::HALF {
            checks.push((
                "alignment_vanishes",
                max_abs(&ops.jx).max(max_abs(&ops.jy)).max(max_abs(&ops.jxy)),
            ));
        }
        if spin == qnd::spin_ops::Spin::ONE {
            checks.push(("jxy_equals_jz", max_abs(&(&ops.jxy - &ops.jz))));
        }
        for (name, residual) in checks {
            worst = worst.max(residual);
            table.row(vec![spin.to_string().into(), name.into(), residual.into()]);
        }
    }
    table.note("max_residual", worst);
    table.note("tolerance", ALGEBRA_TOLERANCE);
    let pass = worst < ALGEBRA_TOLERANCE;
    table.note("pass", pass);
    Ok(Report {
        table,
        failure: (!pass).then(|| format!("operator identities violated: max residual {worst:e}")),
    })
}

fn oracle_compare(cfg: &RunConfig) -> Result<Report, CliError> {
    let sched = schedule(cfg);
    let report = oracle_vs_gaussian(cfg.oracle_atoms, cfg.spin.value(), cfg.n_ph, cfg.g1, cfg.g2, &sched)?;
    let mut table = Table::new(&[
        "pulse",
        "oracle_jz",
        "gaussian_jz",
        "oracle_jy",
        "gaussian_jy",
        "oracle_meter_mean",
        "gaussian_meter_mean",
        "oracle_meter_var",
        "gaussian_meter_var",
    ]);
    for p in &report.pulses {
        table.row(vec![
            p.pulse.into(),
            p.oracle.jz.into(),
            p.gaussian.jz.into(),
            p.oracle.jy.into(),
            p.gaussian.jy.into(),
            p.oracle.meter_mean.into(),
            p.gaussian.meter_mean.into(),
            p.oracle.meter_var.into(),
            p.gaussian.meter_var.into(),
        ]);
    }
    let ops = build_joint_operators(cfg.oracle_atoms, cfg.spin.value(), cfg.n_ph)?;
    let h = build_heff(&ops, cfg.g1, cfg.g2);
    table.note("max_first_moment_deviation", report.max_first_moment_deviation());
    table.note("max_meter_var_deviation", report.max_meter_var_deviation());
    table.note("coupling_warning", report.coupling_warning);
    table.note(
        "commutator_h_sz_plus_jz",
        max_abs(&commutator(&h, &(&ops.sz + &ops.jz))?),
    );
    table.note("bangbang_deviation", bangbang_deviation(&ops, cfg.g1, cfg.g2));
    Ok(Report::ok(table))
}

fn sweep(cfg: &RunConfig) -> Result<Report, CliError> {
    let params = coupling_params(cfg);
    let mode = cfg.schedule_mode();
    let rows = sweep_atom_number(&params, &cfg.na_values, mode)?;
    let (label, p) = mode_label(mode);
    let pulses = schedule_for(&params, mode).1.len();
    let mut table = Table::new(&[
        "na",
        "mode",
        "p",
        "pulses",
        "normalized_meter_var",
        "projection_line",
        "jx_final",
    ]);
    for r in &rows {
        table.row(vec![
            r.atom_number.into(),
            label.clone(),
            p.clone(),
            pulses.into(),
            r.normalized_meter_var.into(),
            projection_noise_line(cfg.g1, cfg.total_photons, r.atom_number, cfg.spin).into(),
            r.jx_final.into(),
        ]);
    }
    if rows.len() >= 4 {
        let fit = fit_linear_quadratic(&rows)?;
        note_fit(&mut table, &fit, rows[rows.len() - 1].atom_number);
    } else {
        table.note("fit", "skipped (fewer than 4 points)");
    }
    Ok(Report::ok(table))
}

fn suppression(cfg: &RunConfig) -> Result<Report, CliError> {
    let params = coupling_params(cfg);
    let na_max = cfg.na_values[cfg.na_values.len() - 1];
    let curve = quadratic_suppression_curve(&params, &cfg.na_values, &cfg.p_values)?;
    let mut table = Table::new(&["p", "c0", "c1", "c2", "fit_rms_residual", "quadratic_share_at_na_max"]);
    for point in &curve {
        let f = &point.fit;
        table.row(vec![
            point.p.into(),
            f.c0.into(),
            f.c1.into(),
            f.c2.into(),
            f.residual.into(),
            f.quadratic_share(na_max).into(),
        ]);
    }
    let naive_params = CouplingParams {
        num_pulses: cfg.pulses,
        photons_per_pulse: cfg.total_photons / cfg.pulses as f64,
        ..params
    };
    let naive = fit_linear_quadratic(&sweep_atom_number(&naive_params, &cfg.na_values, ScheduleMode::Naive)?)?;
    table.note("naive_pulses", cfg.pulses);
    table.note("naive_c2", naive.c2);
    table.note("naive_quadratic_share_at_na_max", naive.quadratic_share(na_max));
    table.note(
        "c2_non_increasing",
        curve.windows(2).all(|w| w[1].fit.c2 <= w[0].fit.c2),
    );
    Ok(Report::ok(table))
}

fn impact(cfg: &RunConfig) -> Result<Report, CliError> {
    let params = coupling_params(cfg);
    let naive_params = CouplingParams {
        num_pulses: cfg.pulses,
        photons_per_pulse: cfg.total_photons / cfg.pulses as f64,
        ..params.clone()
    };
    let mut table = Table::new(&["mode", "p", "pulses", "var_jz_relative_increase"]);
    for (mode, base) in [
        (ScheduleMode::Naive, &naive_params),
        (ScheduleMode::Decoupled(cfg.p), &params),
    ] {
        let (label, p) = mode_label(mode);
        let pulses = schedule_for(base, mode).1.len();
        table.row(vec![label, p, pulses.into(), dropped_terms_impact(base, mode)?.into()]);
    }
    table.note("g2_impact", cfg.g2 / (cfg.g1 * cfg.g1 * cfg.atom_number / 2.0));
    table.note("train_rotation_rad", cfg.g2 * cfg.total_photons / 2.0);
    if let Some(phys) = &cfg.physics {
        let c = qnd::experiment::couplings_from_physics(phys)?;
        table.note("physics_g1", c.g1);
        table.note("physics_g2", c.g2);
        table.note("physics_d0", c.d0);
        table.note("physics_g2_impact", c.g2_impact);
    }
    Ok(Report::ok(table))
}

fn montecarlo(cfg: &RunConfig) -> Result<Report, CliError> {
    let params = coupling_params(cfg);
    let est = monte_carlo_sample(&params, &schedule(cfg), cfg.trials, cfg.seed)?;
    let mut table = Table::new(&[
        "trials",
        "seed",
        "meter_mean",
        "meter_var",
        "stderr",
        "analytic_var",
        "z_score",
    ]);
    table.row(vec![
        est.trials.into(),
        cfg.seed.into(),
        est.meter_mean.into(),
        est.meter_var.into(),
        est.stderr.into(),
        est.analytic_var.into(),
        est.z_score().into(),
    ]);
    Ok(Report::ok(table))
}
