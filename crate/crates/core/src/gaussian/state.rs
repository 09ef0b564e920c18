use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector4};

use crate::error::{Error, Result};
use crate::gaussian::CouplingParams;
use crate::spin_ops::{SingleAtomMoments, Spin, SpinOperatorSet};

/// Row/column of `Jy` in [`GaussianState`].
pub const JY: usize = 0;
pub const JZ: usize = 1;
/// `J[x,y]`
pub const JXY: usize = 2;
/// Accumulated meter `Σ ±Sy`.
pub const METER: usize = 3;

/// Relative slack allowed below zero in the covariance spectrum.
pub const PSD_TOLERANCE: f64 = 1e-9;

/// How `J[x,y]` moves during a pulse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlignmentClosure {
    /// f = 1: `J[x,y] ≡ Jz`, so it follows the `Jz` update exactly.
    MirrorsJz,
    /// No input–output relation is available; held at its initial value.
    Frozen,
}

/// Atom count, spin and the single-atom fully mixed covariance used by the
/// depolarization channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub atom_number: f64,
    pub spin: Spin,
    pub closure: AlignmentClosure,
    /// Covariance of `(jy, jz, jxy)` for one maximally mixed atom.
    pub mixed_cov: Matrix3<f64>,
}

impl Ensemble {
    pub fn new(atom_number: f64, spin: Spin) -> Self {
        let ops = SpinOperatorSet::new(spin);
        Ensemble::from_ops(atom_number, &ops)
    }

    fn from_ops(atom_number: f64, ops: &SpinOperatorSet) -> Self {
        let k = ops.mixed_state_covariance();
        Ensemble {
            atom_number,
            spin: ops.spin,
            closure: if ops.spin == Spin::ONE {
                AlignmentClosure::MirrorsJz
            } else {
                AlignmentClosure::Frozen
            },
            mixed_cov: Matrix3::from_fn(|a, b| k[a][b]),
        }
    }
}

/// First and second moments of `(Jy, Jz, J[x,y], M)` with `Jx` carried as a
/// c-number.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
    pub jx_mean: f64,
    pub ensemble: Ensemble,
}

/// Coherent spin state polarized along x, with the meter at zero.
///
/// For f = 1 this gives `⟨Jx⟩ = NA/2` and `var(Jz) = var(Jy) = NA/4`, with
/// `J[x,y]` perfectly correlated with `Jz`.
pub fn init_css(params: &CouplingParams) -> Result<GaussianState> {
    params.validate()?;
    let ops = SpinOperatorSet::new(params.spin);
    let moments = ops.moments(&ops.x_polarized_state());
    Ok(GaussianState::product_state(
        params.atom_number,
        &moments,
        Ensemble::from_ops(params.atom_number, &ops),
    ))
}

impl GaussianState {
    /// `NA` independent atoms, each with the given single-atom moments.
    pub fn product_state(atom_number: f64, single: &SingleAtomMoments, ensemble: Ensemble) -> Self {
        let mut mean = Vector4::zeros();
        let mut cov = Matrix4::zeros();
        for a in 0..3 {
            mean[a] = atom_number * single.mean[a];
            for b in 0..3 {
                cov[(a, b)] = atom_number * single.cov[a][b];
            }
        }
        GaussianState {
            mean,
            cov,
            jx_mean: atom_number * single.jx,
            ensemble,
        }
    }

    pub fn meter_mean(&self) -> f64 {
        self.mean[METER]
    }

    pub fn meter_var(&self) -> f64 {
        self.cov[(METER, METER)]
    }

    pub fn var(&self, index: usize) -> f64 {
        self.cov[(index, index)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (self.cov + self.cov.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.min()
    }

    /// Finite entries, symmetric, and no eigenvalue below
    /// `-PSD_TOLERANCE · max(1, max diagonal)`.
    pub fn check_physical(&self) -> Result<()> {
        let finite = self.mean.iter().chain(self.cov.iter()).all(|x| x.is_finite()) && self.jx_mean.is_finite();
        if !finite {
            return Err(Error::NotPositiveSemidefinite(f64::NAN));
        }
        let scale = self.cov.diagonal().iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        let asym = (self.cov - self.cov.transpose()).abs().max();
        if asym > PSD_TOLERANCE * scale {
            return Err(Error::NotPositiveSemidefinite(-asym));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOLERANCE * scale {
            return Err(Error::NotPositiveSemidefinite(min));
        }
        Ok(())
    }
}
