use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::Sign;
use crate::linalg::{c, extremal_eigenvector, kron, trace, unitary_from_hermitian, CMatrix};
use crate::oracle::operators::{build_heff, CollectiveOperators};
use crate::spin_ops::SpinOperatorSet;

/// Allowed drift of `‖ψ‖` or `Tr ρ` away from 1.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// A pure state on the joint atoms ⊗ photons space.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactState {
    pub amplitudes: DVector<Complex64>,
}

impl ExactState {
    pub fn product(atoms: &DVector<Complex64>, photons: &DVector<Complex64>) -> Self {
        ExactState {
            amplitudes: atoms.kronecker(photons),
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn expect(&self, op: &CMatrix) -> f64 {
        (self.amplitudes.adjoint() * op * &self.amplitudes)[(0, 0)].re
    }

    pub fn evolve(&self, unitary: &CMatrix) -> Result<Self> {
        let next = ExactState {
            amplitudes: unitary * &self.amplitudes,
        };
        let drift = (next.norm() - 1.0).abs();
        if drift > NORM_TOLERANCE {
            return Err(Error::NotNormalized(drift));
        }
        Ok(next)
    }
}

/// `na` copies of one single-atom state.
pub fn product_atomic_state(single: &DVector<Complex64>, na: usize) -> DVector<Complex64> {
    (1..na).fold(single.clone(), |acc, _| acc.kronecker(single))
}

/// The x-polarized reference state rotated by `exp(-i·toward_z·jy)` after
/// `exp(-i·toward_y·jz)`, which for f = 1 tips the pseudo-spin from x
/// toward y and then toward z.
pub fn tilted_single_atom_state(ops: &SpinOperatorSet, toward_y: f64, toward_z: f64) -> DVector<Complex64> {
    let rz = crate::linalg::exp_i_hermitian(&ops.jz, -toward_y);
    let ry = crate::linalg::exp_i_hermitian(&ops.jy, toward_z);
    ry * rz * ops.x_polarized_state()
}

/// The fully `±45°` polarized `n`-photon state, `Sx = ±n/2`.
pub fn photon_pulse_state(ops: &CollectiveOperators, sign: Sign) -> DVector<Complex64> {
    extremal_eigenvector(&ops.stokes.sx, sign == Sign::Plus).1
}

/// Unconditional atomic state plus the meter moments, carried as
/// `ρ`, `E[M·ρ]` and `E[M²·ρ]` (atomic operators whose traces are `1`,
/// `⟨M⟩`, `⟨M²⟩`).
#[derive(Clone, Debug, PartialEq)]
pub struct OracleState {
    pub rho: CMatrix,
    pub meter_first: CMatrix,
    pub meter_second: CMatrix,
}

impl OracleState {
    pub fn pure(atoms: &DVector<Complex64>) -> Self {
        let rho = atoms * atoms.adjoint();
        let d = rho.nrows();
        OracleState {
            rho,
            meter_first: CMatrix::zeros(d, d),
            meter_second: CMatrix::zeros(d, d),
        }
    }

    pub fn expect(&self, op: &CMatrix) -> f64 {
        trace(&(&self.rho * op)).re
    }

    pub fn meter_mean(&self) -> f64 {
        trace(&self.meter_first).re
    }

    pub fn meter_var(&self) -> f64 {
        let m = self.meter_mean();
        trace(&self.meter_second).re - m * m
    }
}

#[derive(Clone, Debug)]
pub struct PulseResult {
    pub state: OracleState,
    pub sy_mean: f64,
    pub sy_var: f64,
}

/// `U = exp(-iτH)` for one pulse, reused across a schedule.
#[derive(Clone, Debug)]
pub struct PulsePropagator<'a> {
    pub ops: &'a CollectiveOperators,
    pub unitary: CMatrix,
    plus: DVector<Complex64>,
    minus: DVector<Complex64>,
    sy_sq: CMatrix,
}

impl<'a> PulsePropagator<'a> {
    pub fn new(ops: &'a CollectiveOperators, g1: f64, g2: f64) -> Self {
        PulsePropagator {
            ops,
            unitary: unitary_from_hermitian(&build_heff(ops, g1, g2)),
            plus: photon_pulse_state(ops, Sign::Plus),
            minus: photon_pulse_state(ops, Sign::Minus),
            sy_sq: &ops.stokes.sy * &ops.stokes.sy,
        }
    }

    fn photons(&self, sign: Sign) -> &DVector<Complex64> {
        match sign {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }

    fn evolve_joint(&self, atomic: &CMatrix, photons: &CMatrix) -> CMatrix {
        &self.unitary * kron(atomic, photons) * self.unitary.adjoint()
    }

    /// `Tr_ph[(1 ⊗ O) X]`, or the plain partial trace when `observable` is
    /// `None`.
    fn trace_photons(&self, joint: &CMatrix, observable: Option<&CMatrix>) -> CMatrix {
        let na = self.ops.atom_dim;
        let np = self.ops.photon_dim;
        let mut out = CMatrix::zeros(na, na);
        for a in 0..na {
            for b in 0..na {
                let mut acc = Complex64::new(0.0, 0.0);
                match observable {
                    None => {
                        for p in 0..np {
                            acc += joint[(a * np + p, b * np + p)];
                        }
                    }
                    Some(o) => {
                        for p in 0..np {
                            for q in 0..np {
                                acc += o[(p, q)] * joint[(a * np + q, b * np + p)];
                            }
                        }
                    }
                }
                out[(a, b)] = acc;
            }
        }
        hermitian_part(out)
    }

    /// One pulse with probe sign `sign`; the photons are read out along `Sy`
    /// and added to the meter with `meter_sign`, then discarded.
    pub fn evolve_pulse(&self, state: &OracleState, sign: Sign, meter_sign: Sign) -> Result<PulseResult> {
        let drift = (trace(&state.rho).re - 1.0).abs();
        if drift > NORM_TOLERANCE {
            return Err(Error::NotNormalized(drift));
        }
        let phi = self.photons(sign);
        let photons = phi * phi.adjoint();
        let sy = &self.ops.stokes.sy;
        let mu = meter_sign.value();

        let zeroth = self.evolve_joint(&state.rho, &photons);
        let first = self.evolve_joint(&state.meter_first, &photons);
        let second = self.evolve_joint(&state.meter_second, &photons);

        let rho = self.trace_photons(&zeroth, None);
        let sy_on_zeroth = self.trace_photons(&zeroth, Some(sy));
        let sy_mean = trace(&sy_on_zeroth).re;
        let sy_sq_mean = trace(&self.trace_photons(&zeroth, Some(&self.sy_sq))).re;

        let meter_first = self.trace_photons(&first, None) + sy_on_zeroth * c(mu);
        let meter_second = self.trace_photons(&second, None)
            + self.trace_photons(&first, Some(sy)) * c(2.0 * mu)
            + self.trace_photons(&zeroth, Some(&self.sy_sq));

        let drift = (trace(&rho).re - 1.0).abs();
        if drift > NORM_TOLERANCE {
            return Err(Error::NotNormalized(drift));
        }
        Ok(PulseResult {
            state: OracleState {
                rho,
                meter_first,
                meter_second,
            },
            sy_mean,
            sy_var: sy_sq_mean - sy_mean * sy_mean,
        })
    }
}

fn hermitian_part(m: CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (m + adj) * c(0.5)
}

/// Convenience wrapper: one pulse with fresh operators and unitary.
pub fn evolve_pulse(
    ops: &CollectiveOperators,
    state: &OracleState,
    sign: Sign,
    g1: f64,
    g2: f64,
) -> Result<PulseResult> {
    PulsePropagator::new(ops, g1, g2).evolve_pulse(state, sign, Sign::Plus)
}
