//! Single-atom spin-f operators, the rank-2 alignment operators built from
//! them, and the Stokes operators of a fixed-photon-number light pulse.
//!
//! All matrices are written in the `|f, m⟩` basis ordered `m = f, f-1, …, -f`
//! (row/column 0 is `m = +f`). The Stokes operators use the two-mode Fock
//! basis `|n₊, n₋⟩` ordered `n₊ = n, n-1, …, 0`.
//!
//! The alignment operators are
//!
//! ```text
//! jx  = (fx² - fy²)/2
//! jy  = (fx fy + fy fx)/2
//! jz  = fz/2
//! jxy = -i[jx, jy] = fz (f(f+1) - fz² - 1/2)
//! ```
//!
//! `jx`, `jy` and `jxy` are assembled from the integer-valued squared ladder
//! coefficients rather than from floating-point products of `fx`, `fy`, so
//! the special cases (all zero for f = 1/2, `jxy == jz` for f = 1) hold bit
//! for bit.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, extremal_eigenvector, CMatrix, I};

/// Default cap on `2f + 1`.
pub const DEFAULT_DIM_CAP: usize = 21;

/// A spin quantum number `f ∈ {1/2, 1, 3/2, …}`, stored as `2f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice: 1 };
    pub const ONE: Spin = Spin { twice: 2 };

    /// Spin with `2f = twice`. `twice` must be at least 1.
    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        Ok(Spin { twice })
    }

    /// Parse a floating-point spin; rejects anything that is not a positive
    /// multiple of 1/2.
    pub fn new(f: f64) -> Result<Self> {
        let twice = 2.0 * f;
        if !f.is_finite() || twice < 1.0 || twice.fract() != 0.0 || twice > u32::MAX as f64 {
            return Err(Error::InvalidSpin(f));
        }
        Ok(Spin { twice: twice as u32 })
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// `f(f+1)`.
    pub fn casimir(self) -> f64 {
        let f = self.value();
        f * (f + 1.0)
    }

    /// Magnetic quantum number of basis index `k`.
    pub fn m(self, k: usize) -> f64 {
        self.value() - k as f64
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(out, "{}", self.twice / 2)
        } else {
            write!(out, "{}/2", self.twice)
        }
    }
}

impl std::str::FromStr for Spin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidSpin(f64::NAN);
        match s.split_once('/') {
            Some((num, "2")) => {
                let twice: u32 = num.trim().parse().map_err(|_| bad())?;
                Spin::from_twice(twice)
            }
            Some(_) => Err(bad()),
            None => Spin::new(s.parse::<f64>().map_err(|_| bad())?),
        }
    }
}

/// Squared ladder coefficient `|⟨m+1| f₊ |m⟩|² = f(f+1) - m(m+1)`.
fn raise_sq(spin: Spin, m: f64) -> f64 {
    spin.casimir() - m * (m + 1.0)
}

/// `fx`, `fy`, `fz` for spin `twice/2` in the `m = f … -f` basis.
fn angular_momentum(spin: Spin) -> [CMatrix; 3] {
    let dim = spin.dim();
    let mut fx = CMatrix::zeros(dim, dim);
    let mut fy = CMatrix::zeros(dim, dim);
    let mut fz = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let m = spin.m(k);
        fz[(k, k)] = c(m);
        if k > 0 {
            // f₊ |m⟩ lands on index k - 1
            let up = raise_sq(spin, m).sqrt();
            fx[(k - 1, k)] = c(up / 2.0);
            fx[(k, k - 1)] = c(up / 2.0);
            fy[(k - 1, k)] = -I * (up / 2.0);
            fy[(k, k - 1)] = I * (up / 2.0);
        }
    }
    [fx, fy, fz]
}

/// Single-atom spin and alignment operators for one value of `f`.
#[derive(Clone, Debug)]
pub struct SpinOperatorSet {
    pub spin: Spin,
    pub dim: usize,
    pub fx: CMatrix,
    pub fy: CMatrix,
    pub fz: CMatrix,
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
    pub jxy: CMatrix,
}

/// Builds the operator set with the default dimension cap.
pub fn build_spin_operators(f: f64) -> Result<SpinOperatorSet> {
    build_spin_operators_with_cap(f, DEFAULT_DIM_CAP)
}

pub fn build_spin_operators_with_cap(f: f64, cap: usize) -> Result<SpinOperatorSet> {
    let spin = Spin::new(f)?;
    if spin.dim() > cap {
        return Err(Error::SpinTooLarge {
            f,
            dim: spin.dim(),
            cap,
        });
    }
    Ok(SpinOperatorSet::new(spin))
}

impl SpinOperatorSet {
    /// Uncapped constructor; prefer [`build_spin_operators`] for user input.
    pub fn new(spin: Spin) -> Self {
        let dim = spin.dim();
        let [fx, fy, fz] = angular_momentum(spin);

        // f₊² connects index k to k - 2 with coefficient
        // sqrt(raise_sq(m) · raise_sq(m + 1)); the product is a multiple of
        // 1/16 and so exact in f64.
        let mut jx = CMatrix::zeros(dim, dim);
        let mut jy = CMatrix::zeros(dim, dim);
        for k in 2..dim {
            let m = spin.m(k);
            let amp = (raise_sq(spin, m) * raise_sq(spin, m + 1.0)).sqrt() / 4.0;
            jx[(k - 2, k)] = c(amp);
            jx[(k, k - 2)] = c(amp);
            jy[(k - 2, k)] = -I * amp;
            jy[(k, k - 2)] = I * amp;
        }

        // -i[jx, jy] = [f₊², f₋²]/8, which is diagonal.
        let mut jxy = CMatrix::zeros(dim, dim);
        for k in 0..dim {
            let m = spin.m(k);
            let lower_sq = |m: f64| spin.casimir() - m * (m - 1.0);
            let down_up = lower_sq(m) * lower_sq(m - 1.0);
            let up_down = raise_sq(spin, m) * raise_sq(spin, m + 1.0);
            // Outside the ladder the coefficient is zero, never negative.
            let down_up = if k + 2 < dim { down_up } else { 0.0 };
            let up_down = if k >= 2 { up_down } else { 0.0 };
            jxy[(k, k)] = c((down_up - up_down) / 8.0);
        }

        let jz = &fz * c(0.5);
        SpinOperatorSet {
            spin,
            dim,
            fx,
            fy,
            fz,
            jx,
            jy,
            jz,
            jxy,
        }
    }

    /// `(jy, jz, jxy)` in the order used by the covariance engine.
    pub fn tracked(&self) -> [&CMatrix; 3] {
        [&self.jy, &self.jz, &self.jxy]
    }

    /// Single-atom state used as the x-polarized coherent spin state.
    ///
    /// For f ≥ 1 this is the top eigenvector of `jx` (for f = 1 it is
    /// `(|1⟩ + |-1⟩)/√2`, with `⟨jx⟩ = 1/2`). For f = 1/2, where the
    /// alignment operators vanish, it is the top eigenvector of `fx`.
    pub fn x_polarized_state(&self) -> DVector<Complex64> {
        if self.spin == Spin::ONE {
            let mut v = DVector::zeros(3);
            v[0] = c(std::f64::consts::FRAC_1_SQRT_2);
            v[2] = c(std::f64::consts::FRAC_1_SQRT_2);
            return v;
        }
        let generator = if self.spin == Spin::HALF { &self.fx } else { &self.jx };
        extremal_eigenvector(generator, true).1
    }

    /// First and second moments of `(jx; jy, jz, jxy)` in a single-atom state.
    pub fn moments(&self, psi: &DVector<Complex64>) -> SingleAtomMoments {
        let expect = |op: &CMatrix| (psi.adjoint() * op * psi)[(0, 0)].re;
        let tracked = self.tracked();
        let mean = [expect(tracked[0]), expect(tracked[1]), expect(tracked[2])];
        let mut cov = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let sym = (tracked[a] * tracked[b] + tracked[b] * tracked[a]) * c(0.5);
                cov[a][b] = expect(&sym) - mean[a] * mean[b];
            }
        }
        SingleAtomMoments {
            jx: expect(&self.jx),
            mean,
            cov,
        }
    }

    /// Covariance of `(jy, jz, jxy)` in the maximally mixed state,
    /// `Tr(A B)/(2f+1)`.
    pub fn mixed_state_covariance(&self) -> [[f64; 3]; 3] {
        let tracked = self.tracked();
        let mut k = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let prod = tracked[a] * tracked[b];
                k[a][b] = crate::linalg::trace(&prod).re / self.dim as f64;
            }
        }
        k
    }
}

/// One-atom expectation values of the collective variables' building blocks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleAtomMoments {
    pub jx: f64,
    /// `⟨jy⟩, ⟨jz⟩, ⟨jxy⟩`
    pub mean: [f64; 3],
    /// Symmetrized covariance of `(jy, jz, jxy)`.
    pub cov: [[f64; 3]; 3],
}

/// Stokes operators restricted to the `n`-photon sector of two circular
/// modes.
#[derive(Clone, Debug)]
pub struct StokesOperatorSet {
    pub n: usize,
    pub dim: usize,
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
}

/// `Ŝᵢ = ½ (a₊†, a₋†) σᵢ (a₊, a₋)ᵀ` on the fixed-`n` subspace.
///
/// With `n₊ = n - k` these coincide with spin-`n/2` angular momentum
/// matrices (Schwinger representation), which is how they are built.
pub fn build_stokes_operators(n: i64) -> Result<StokesOperatorSet> {
    if n < 1 {
        return Err(Error::InvalidPhotonNumber(n));
    }
    let n = n as usize;
    let spin = Spin::from_twice(n as u32)?;
    let [sx, sy, sz] = angular_momentum(spin);
    Ok(StokesOperatorSet {
        n,
        dim: n + 1,
        sx,
        sy,
        sz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, hermitian_eigenvalues, hermiticity_residual, max_abs, max_abs_diff, trace};

    const SPINS: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

    fn ops(f: f64) -> SpinOperatorSet {
        build_spin_operators(f).unwrap()
    }

    #[test]
    fn spin_parsing() {
        assert_eq!("1/2".parse::<Spin>().unwrap(), Spin::HALF);
        assert_eq!("1".parse::<Spin>().unwrap(), Spin::ONE);
        assert_eq!("1.5".parse::<Spin>().unwrap().twice(), 3);
        assert!("1/3".parse::<Spin>().is_err());
        assert!("0".parse::<Spin>().is_err());
        assert_eq!(Spin::new(1.5).unwrap().to_string(), "3/2");
        assert_eq!(Spin::ONE.to_string(), "1");
    }

    #[test]
    fn rejects_bad_spins() {
        assert!(matches!(build_spin_operators(0.3), Err(Error::InvalidSpin(_))));
        assert!(matches!(build_spin_operators(-1.0), Err(Error::InvalidSpin(_))));
        assert!(matches!(build_spin_operators(0.0), Err(Error::InvalidSpin(_))));
        assert!(matches!(build_spin_operators(f64::NAN), Err(Error::InvalidSpin(_))));
        assert!(matches!(
            build_spin_operators(10.5),
            Err(Error::SpinTooLarge { dim: 22, cap: 21, .. })
        ));
        assert!(build_spin_operators(10.0).is_ok());
        assert!(build_spin_operators_with_cap(2.0, 4).is_err());
    }

    #[test]
    fn spin_half_alignment_vanishes() {
        let o = ops(0.5);
        assert!(o.jx.iter().all(|z| *z == c(0.0)));
        assert!(o.jy.iter().all(|z| *z == c(0.0)));
        assert!(o.jxy.iter().all(|z| *z == c(0.0)));
    }

    #[test]
    fn spin_one_jxy_equals_jz() {
        let o = ops(1.0);
        assert_eq!(o.jxy, o.jz);
        let diag: Vec<f64> = o.jxy.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![0.5, 0.0, -0.5]);
        assert_eq!(hermitian_eigenvalues(&o.fz), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn angular_momentum_algebra() {
        for f in SPINS {
            let o = ops(f);
            let xy = commutator(&o.fx, &o.fy).unwrap();
            let yz = commutator(&o.fy, &o.fz).unwrap();
            let zx = commutator(&o.fz, &o.fx).unwrap();
            assert!(max_abs_diff(&xy, &(&o.fz * I)) < 1e-12, "f={f}");
            assert!(max_abs_diff(&yz, &(&o.fx * I)) < 1e-12, "f={f}");
            assert!(max_abs_diff(&zx, &(&o.fy * I)) < 1e-12, "f={f}");
        }
    }

    #[test]
    fn alignment_definitions_and_commutators() {
        for f in SPINS {
            let o = ops(f);
            let half = c(0.5);
            let jx_def = (&o.fx * &o.fx - &o.fy * &o.fy) * half;
            let jy_def = (&o.fx * &o.fy + &o.fy * &o.fx) * half;
            assert!(max_abs_diff(&o.jx, &jx_def) < 1e-12, "f={f}");
            assert!(max_abs_diff(&o.jy, &jy_def) < 1e-12, "f={f}");

            let zx = commutator(&o.jz, &o.jx).unwrap();
            let yz = commutator(&o.jy, &o.jz).unwrap();
            let xy = commutator(&o.jx, &o.jy).unwrap();
            assert!(max_abs_diff(&zx, &(&o.jy * I)) < 1e-12, "f={f}");
            assert!(max_abs_diff(&yz, &(&o.jx * I)) < 1e-12, "f={f}");
            assert!(max_abs_diff(&xy, &(&o.jxy * I)) < 1e-12, "f={f}");

            // closed form fz (f(f+1) - fz² - 1/2)
            let id = CMatrix::identity(o.dim, o.dim);
            let closed = &o.fz * (id * c(o.spin.casimir() - 0.5) - &o.fz * &o.fz);
            assert!(max_abs_diff(&o.jxy, &closed) < 1e-12, "f={f}");
        }
    }

    #[test]
    fn commutator_jx_jy_for_spin_two_by_hand() {
        // f = 2: jxy = fz (6 - fz² - 1/2) = diag(2·1.5, 1·4.5, 0, …)
        let o = ops(2.0);
        let xy = commutator(&o.jx, &o.jy).unwrap();
        let expected = [3.0, 4.5, 0.0, -4.5, -3.0];
        for (k, e) in expected.iter().enumerate() {
            assert!((xy[(k, k)] - I * *e).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitian_and_traceless() {
        for f in SPINS {
            let o = ops(f);
            for op in [&o.fx, &o.fy, &o.fz, &o.jx, &o.jy, &o.jz, &o.jxy] {
                assert!(hermiticity_residual(op) < 1e-12);
            }
            for op in [&o.fz, &o.jz, &o.jy, &o.jx] {
                assert_eq!(trace(op), c(0.0), "f={f}");
            }
            assert!(trace(&o.jxy).norm() < 1e-12);
        }
    }

    #[test]
    fn spin_one_css_moments() {
        let o = ops(1.0);
        let m = o.moments(&o.x_polarized_state());
        assert!((m.jx - 0.5).abs() < 1e-15);
        assert!(m.mean.iter().all(|x| x.abs() < 1e-15));
        assert!((m.cov[0][0] - 0.25).abs() < 1e-15);
        assert!((m.cov[1][1] - 0.25).abs() < 1e-15);
        assert!((m.cov[1][2] - 0.25).abs() < 1e-15);
        assert!(m.cov[0][1].abs() < 1e-15);
    }

    #[test]
    fn spin_half_css_is_fx_eigenstate() {
        let o = ops(0.5);
        let m = o.moments(&o.x_polarized_state());
        assert_eq!(m.jx, 0.0);
        assert!((m.cov[1][1] - 1.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn mixed_state_jz_variance() {
        for f in SPINS {
            let o = ops(f);
            let k = o.mixed_state_covariance();
            let expected = o.spin.casimir() / 3.0 / 4.0;
            assert!((k[1][1] - expected).abs() < 1e-12, "f={f}");
        }
    }

    #[test]
    fn stokes_single_photon_is_half_pauli() {
        let s = build_stokes_operators(1).unwrap();
        let h = c(0.5);
        assert_eq!(s.sx, CMatrix::from_row_slice(2, 2, &[c(0.0), h, h, c(0.0)]));
        assert_eq!(
            s.sy,
            CMatrix::from_row_slice(2, 2, &[c(0.0), -I * 0.5, I * 0.5, c(0.0)])
        );
        assert_eq!(s.sz, CMatrix::from_row_slice(2, 2, &[h, c(0.0), c(0.0), -h]));
    }

    #[test]
    fn stokes_two_photons() {
        let s = build_stokes_operators(2).unwrap();
        let diag: Vec<f64> = s.sz.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn stokes_algebra_and_extremes() {
        for n in 1..=8 {
            let s = build_stokes_operators(n).unwrap();
            assert!(max_abs_diff(&commutator(&s.sx, &s.sy).unwrap(), &(&s.sz * I)) < 1e-12);
            assert!(max_abs_diff(&commutator(&s.sy, &s.sz).unwrap(), &(&s.sx * I)) < 1e-12);
            assert!(max_abs_diff(&commutator(&s.sz, &s.sx).unwrap(), &(&s.sy * I)) < 1e-12);
            for op in [&s.sx, &s.sy, &s.sz] {
                assert!(hermiticity_residual(op) < 1e-12);
            }
            let ev = hermitian_eigenvalues(&s.sx);
            assert!((ev[ev.len() - 1] - n as f64 / 2.0).abs() < 1e-12);
            assert!((ev[0] + n as f64 / 2.0).abs() < 1e-12);
        }
        assert!(matches!(build_stokes_operators(0), Err(Error::InvalidPhotonNumber(0))));
        assert!(build_stokes_operators(-3).is_err());
    }

    #[test]
    fn stokes_from_mode_operators() {
        // Independent route: build a₊, a₋ on the two-mode Fock space with
        // a per-mode cutoff, then restrict to n₊ + n₋ = n.
        let n = 3usize;
        let cut = n + 1;
        let mut a = CMatrix::zeros(cut, cut);
        for k in 1..cut {
            a[(k - 1, k)] = c((k as f64).sqrt());
        }
        let id = CMatrix::identity(cut, cut);
        let ap = a.kronecker(&id);
        let am = id.kronecker(&a);
        let sx_full = (ap.adjoint() * &am + am.adjoint() * &ap) * c(0.5);
        let s = build_stokes_operators(n as i64).unwrap();
        // basis index k ↔ (n₊, n₋) = (n - k, k) ↔ full index n₊·cut + n₋
        let idx = |k: usize| (n - k) * cut + k;
        for r in 0..=n {
            for col in 0..=n {
                assert!((s.sx[(r, col)] - sx_full[(idx(r), idx(col))]).norm() < 1e-12);
            }
        }
        assert!(max_abs(&s.sx) > 0.0);
    }
}
