//! Covariance engine: first and second moments of the collective atomic
//! variables and the accumulated meter under a pulse train.
//!
//! `Sx` and `Jx` are classical (`Sx = ±nL/2`, `Jx` a decaying c-number);
//! `Sy` and `Sz` enter every pulse as fresh shot noise of variance `nL/4`.

mod params;
mod propagate;
mod schedule;
mod state;

pub use params::{CouplingParams, Integrator};
pub use propagate::{apply_decoherence, apply_pulse, run_schedule, run_schedule_from, RunOutcome};
pub use schedule::{PulseEntry, PulseSchedule, ScheduleMode, Sign};
pub use state::{init_css, AlignmentClosure, Ensemble, GaussianState, JXY, JY, JZ, METER, PSD_TOLERANCE};
