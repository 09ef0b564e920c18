use crate::error::{Error, Result};
use crate::spin_ops::Spin;

/// How the photons of one pulse are pushed through the linearized relations.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum Integrator {
    /// One first-order step with all `nL` photons: the weak-pulse
    /// input–output map applied once.
    #[default]
    SingleStep,
    /// `k` first-order steps of `nL/k` photons each.
    Sliced(u32),
    /// The `k → ∞` limit of [`Integrator::Sliced`], computed exactly with a
    /// matrix exponential of the moment generator.
    Continuous,
}

/// Couplings and sizes of one probing run.
///
/// `g1`, `g2` are the dimensionless constants of `τH = g1 Sz Jz + g2 (Sx Jx + Sy Jy)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingParams {
    pub g1: f64,
    pub g2: f64,
    /// `nL`, photons in each pulse.
    pub photons_per_pulse: f64,
    pub num_pulses: usize,
    /// `NA`
    pub atom_number: f64,
    pub spin: Spin,
    /// Per-pulse depolarization probability.
    pub scattering_eps: f64,
    /// Keep the `-g2 Sy Jx` (into Jz) and `-g2 Sz Jy` (into the meter) terms.
    pub include_dropped_terms: bool,
    pub integrator: Integrator,
}

impl CouplingParams {
    /// Spin-1 parameters with `total_photons` split evenly over `num_pulses`.
    pub fn new(g1: f64, g2: f64, total_photons: f64, num_pulses: usize, atom_number: f64) -> Self {
        CouplingParams {
            g1,
            g2,
            photons_per_pulse: total_photons / num_pulses.max(1) as f64,
            num_pulses,
            atom_number,
            spin: Spin::ONE,
            scattering_eps: 0.0,
            include_dropped_terms: false,
            integrator: Integrator::SingleStep,
        }
    }

    /// `NL = num_pulses · nL`.
    pub fn total_photons(&self) -> f64 {
        self.photons_per_pulse * self.num_pulses as f64
    }

    /// Same photon budget redistributed over a different pulse count.
    pub fn with_pulses(&self, num_pulses: usize) -> Self {
        let total = self.total_photons();
        CouplingParams {
            photons_per_pulse: total / num_pulses.max(1) as f64,
            num_pulses,
            ..self.clone()
        }
    }

    pub fn with_atoms(&self, atom_number: f64) -> Self {
        CouplingParams {
            atom_number,
            ..self.clone()
        }
    }

    pub fn with_g2(&self, g2: f64) -> Self {
        CouplingParams { g2, ..self.clone() }
    }

    pub fn with_integrator(&self, integrator: Integrator) -> Self {
        CouplingParams {
            integrator,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.g1.is_finite() {
            return Err(Error::param("g1", "must be finite"));
        }
        if !self.g2.is_finite() {
            return Err(Error::param("g2", "must be finite"));
        }
        if !(self.photons_per_pulse.is_finite() && self.photons_per_pulse > 0.0) {
            return Err(Error::param("photons_per_pulse", "must be positive"));
        }
        if self.num_pulses == 0 {
            return Err(Error::param("num_pulses", "must be at least 1"));
        }
        if !(self.atom_number.is_finite() && self.atom_number > 0.0) {
            return Err(Error::param("atom_number", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.scattering_eps) {
            return Err(Error::param("scattering_eps", "must lie in [0, 1]"));
        }
        if let Integrator::Sliced(0) = self.integrator {
            return Err(Error::param("integrator", "slice count must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn photon_budget_is_split_evenly() {
        let p = CouplingParams::new(1e-7, 0.0, 8e8, 10, 1e6);
        assert_eq!(p.photons_per_pulse, 8e7);
        assert_eq!(p.total_photons(), 8e8);
        let q = p.with_pulses(4);
        assert_eq!(q.photons_per_pulse, 2e8);
        assert_eq!(q.total_photons(), 8e8);
    }

    #[test]
    fn validation() {
        let ok = CouplingParams::new(1e-7, 1e-8, 8e8, 10, 1e6);
        assert!(ok.validate().is_ok());
        let mut bad = ok.clone();
        bad.scattering_eps = 1.5;
        assert!(bad.validate().is_err());
        bad = ok.clone();
        bad.atom_number = 0.0;
        assert!(bad.validate().is_err());
        bad = ok.clone();
        bad.g2 = f64::NAN;
        assert!(bad.validate().is_err());
        bad = ok.with_integrator(Integrator::Sliced(0));
        assert!(bad.validate().is_err());
        bad = ok.clone();
        bad.num_pulses = 0;
        assert!(bad.validate().is_err());
    }
}
