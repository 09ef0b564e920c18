//! Atom-number sweeps, noise decomposition, figures of merit and a sampling
//! cross-check, all driven by the covariance engine.

mod montecarlo;
mod physics;
mod sweep;

pub use montecarlo::{monte_carlo_sample, MonteCarloEstimate, DEFAULT_SEED};
pub use physics::{
    atoms_for_db, couplings_from_physics, css_variance_per_atom, db_below_projection, g2_from_impact, log_spaced,
    projection_noise_line, Couplings, PaperScale, PhysicalParams,
};
pub use sweep::{
    dropped_terms_impact, fit_linear_quadratic, fit_points, qnd_residual, quadratic_suppression_curve, schedule_for,
    sweep_atom_number, QndResidual, QuadraticFit, SuppressionPoint, SweepRow,
};
