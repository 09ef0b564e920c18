use log::warn;

use crate::error::{Error, Result};
use crate::gaussian::{CouplingParams, Integrator};
use crate::spin_ops::{Spin, SpinOperatorSet};

/// Atomic and optical constants behind the couplings. Frequencies share one
/// unit, areas share another.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    pub sigma0: f64,
    pub gamma: f64,
    pub area: f64,
    pub delta: f64,
    pub delta_hfs: f64,
    pub atom_number: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Couplings {
    pub g1: f64,
    pub g2: f64,
    /// On-resonance optical depth `σ0·NA/A`.
    pub d0: f64,
    /// `g2 / (g1²·Jx)`, which does not depend on the detuning.
    pub g2_impact: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("sigma0", self.sigma0),
            ("gamma", self.gamma),
            ("area", self.area),
            ("delta", self.delta),
            ("delta_hfs", self.delta_hfs),
            ("atom_number", self.atom_number),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("{v} must be positive")));
            }
        }
        Ok(())
    }
}

/// Far-detuned estimates of `g1`, `g2`, the optical depth and the relative
/// weight of the `g2` term.
pub fn couplings_from_physics(phys: &PhysicalParams) -> Result<Couplings> {
    if phys.delta == 0.0 {
        return Err(Error::param("delta", "zero detuning"));
    }
    phys.validate()?;
    if phys.delta < 10.0 * phys.gamma {
        warn!(
            "detuning {} is not large compared with the linewidth {}",
            phys.delta, phys.gamma
        );
    }
    let g1 = phys.sigma0 * phys.gamma / (4.0 * phys.area * phys.delta);
    let d0 = phys.sigma0 * phys.atom_number / phys.area;
    Ok(Couplings {
        g1,
        g2: g1 * phys.delta_hfs / phys.delta,
        d0,
        g2_impact: 8.0 * phys.delta_hfs / (d0 * phys.gamma),
    })
}

/// `g2 = impact·g1²·Jx` with `Jx = na/2`.
pub fn g2_from_impact(g2_impact: f64, g1: f64, atom_number: f64) -> f64 {
    g2_impact * g1 * g1 * atom_number / 2.0
}

/// `var(Jz)` of the x-polarized coherent spin state, per atom.
pub fn css_variance_per_atom(spin: Spin) -> f64 {
    if spin == Spin::ONE {
        return 0.25;
    }
    let ops = SpinOperatorSet::new(spin);
    ops.moments(&ops.x_polarized_state()).cov[1][1]
}

/// `4·var(M)/NL = 1 + g1²·NL·var(Jz)` for an unperturbed coherent spin state.
pub fn projection_noise_line(g1: f64, total_photons: f64, atom_number: f64, spin: Spin) -> f64 {
    1.0 + g1 * g1 * total_photons * atom_number * css_variance_per_atom(spin)
}

/// Atomic contribution over the shot-noise floor, in dB.
pub fn db_below_projection(g1: f64, total_photons: f64, atom_number: f64, spin: Spin) -> Result<f64> {
    let excess = projection_noise_line(g1, total_photons, atom_number, spin) - 1.0;
    if !(excess > 0.0) {
        return Err(Error::param(
            "atom_number",
            format!("atomic excess {excess} is not positive"),
        ));
    }
    Ok(10.0 * excess.log10())
}

/// The atom number at which [`db_below_projection`] equals `db`.
pub fn atoms_for_db(g1: f64, total_photons: f64, db: f64, spin: Spin) -> Result<f64> {
    let scale = g1 * g1 * total_photons * css_variance_per_atom(spin);
    if !(scale > 0.0) {
        return Err(Error::param("g1", "needs a non-zero coupling and photon number"));
    }
    Ok(10f64.powf(db / 10.0) / scale)
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut out: Vec<f64> = (0..count)
                .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
                .collect();
            out[0] = lo;
            out[count - 1] = hi;
            out
        }
    }
}

/// Reference couplings for a ~10⁶-atom spin-1 ensemble probed with
/// 8×10⁸ photons.
#[derive(Clone, Debug, PartialEq)]
pub struct PaperScale {
    pub g1: f64,
    pub g2: f64,
    pub total_photons: f64,
    pub reference_atoms: f64,
    /// Decoupling order used where one is needed (`2p` pulses).
    pub p: usize,
    pub integrator: Integrator,
}

impl PaperScale {
    pub const G1: f64 = 1.27e-7;
    pub const TOTAL_PHOTONS: f64 = 8e8;
    pub const REFERENCE_ATOMS: f64 = 1e6;
    /// Total `Jz ↔ Jy` rotation of an all-same-sign train that fixes
    /// [`PaperScale::default`]'s `g2`.
    pub const TRAIN_ROTATION: f64 = 1.0;

    /// `g2` for which `Sx = NL/2` rotates the alignment by `angle` over the
    /// whole train.
    pub fn g2_from_rotation(total_photons: f64, angle: f64) -> f64 {
        2.0 * angle / total_photons
    }

    /// `g2` at which the neglected `g2·Sy·Jx` noise adds the fraction
    /// `bound` to the projection variance, `g2²·NL·Jx/2 = bound`.
    pub fn g2_from_dropped_bound(total_photons: f64, atom_number: f64, bound: f64) -> f64 {
        let jx = atom_number / 2.0;
        (2.0 * bound / (total_photons * jx)).sqrt()
    }

    /// Total rotation angle `g2·NL/2` of an all-same-sign train.
    pub fn train_rotation(&self) -> f64 {
        self.g2 * self.total_photons / 2.0
    }

    /// `g2` from the order-of-magnitude estimate `g2/(g1²Jx) ≈ 4.8`. Strong
    /// enough to rotate the collective alignment by ~15 rad over the train.
    pub fn order_of_magnitude() -> Self {
        PaperScale {
            g2: g2_from_impact(4.8, Self::G1, Self::REFERENCE_ATOMS),
            ..Self::default()
        }
    }

    pub fn with_g2(&self, g2: f64) -> Self {
        PaperScale { g2, ..self.clone() }
    }

    /// Engine parameters at the reference size for `num_pulses` pulses.
    pub fn params(&self, num_pulses: usize) -> CouplingParams {
        CouplingParams::new(self.g1, self.g2, self.total_photons, num_pulses, self.reference_atoms)
            .with_integrator(self.integrator)
    }

    /// `g2/(g1²·Jx)` at the reference size.
    pub fn g2_impact(&self) -> f64 {
        self.g2 / (self.g1 * self.g1 * self.reference_atoms / 2.0)
    }

    /// The default sweep grid: 20 log-spaced sizes from 10⁴ to 2×10⁶.
    pub fn atom_grid() -> Vec<f64> {
        log_spaced(1e4, 2e6, 20)
    }
}

impl Default for PaperScale {
    fn default() -> Self {
        PaperScale {
            g1: Self::G1,
            g2: Self::g2_from_rotation(Self::TOTAL_PHOTONS, Self::TRAIN_ROTATION),
            total_photons: Self::TOTAL_PHOTONS,
            reference_atoms: Self::REFERENCE_ATOMS,
            p: 5,
            integrator: Integrator::Continuous,
        }
    }
}
