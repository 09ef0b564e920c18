use crate::error::{Error, Result};
use crate::linalg::{c, exp_i_hermitian, identity, kron, CMatrix};
use crate::spin_ops::{build_stokes_operators, Spin, SpinOperatorSet, StokesOperatorSet};

/// Default cap on the joint (atoms ⊗ photons) dimension.
pub const DEFAULT_JOINT_CAP: usize = 20_000;

/// Collective operators on the atomic space alone.
#[derive(Clone, Debug)]
pub struct AtomicOperators {
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
    pub jxy: CMatrix,
}

/// `Ĵk = Σᵢ ĵk⁽ⁱ⁾` and the Stokes operators, all lifted to the joint space
/// `atoms ⊗ photons` (atom index major).
#[derive(Clone, Debug)]
pub struct CollectiveOperators {
    pub na: usize,
    pub spin: Spin,
    pub n_ph: usize,
    pub atom_dim: usize,
    pub photon_dim: usize,
    pub dim: usize,
    pub single: SpinOperatorSet,
    pub atomic: AtomicOperators,
    pub stokes: StokesOperatorSet,
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
    pub jxy: CMatrix,
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
}

/// `Σᵢ 1 ⊗ … ⊗ op ⊗ … ⊗ 1` over `na` sites.
fn collective(op: &CMatrix, na: usize) -> CMatrix {
    let d = op.nrows();
    let mut total = CMatrix::zeros(d.pow(na as u32), d.pow(na as u32));
    for site in 0..na {
        let mut term = CMatrix::identity(1, 1);
        for k in 0..na {
            term = if k == site {
                kron(&term, op)
            } else {
                kron(&term, &identity(d))
            };
        }
        total += term;
    }
    total
}

pub fn build_joint_operators(na: usize, f: f64, n_ph: usize) -> Result<CollectiveOperators> {
    build_joint_operators_with_cap(na, f, n_ph, DEFAULT_JOINT_CAP)
}

pub fn build_joint_operators_with_cap(na: usize, f: f64, n_ph: usize, cap: usize) -> Result<CollectiveOperators> {
    if na == 0 {
        return Err(Error::param("na", "need at least one atom"));
    }
    let spin = Spin::new(f)?;
    let atom_dim = (spin.dim() as u64)
        .checked_pow(na as u32)
        .filter(|&d| d <= cap as u64)
        .ok_or(Error::DimensionCap { dim: usize::MAX, cap })? as usize;
    let photon_dim = n_ph + 1;
    let dim = atom_dim * photon_dim;
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }

    let single = SpinOperatorSet::new(spin);
    let stokes = build_stokes_operators(n_ph as i64)?;
    let atomic = AtomicOperators {
        jx: collective(&single.jx, na),
        jy: collective(&single.jy, na),
        jz: collective(&single.jz, na),
        jxy: collective(&single.jxy, na),
    };
    let id_ph = identity(photon_dim);
    let id_at = identity(atom_dim);
    Ok(CollectiveOperators {
        na,
        spin,
        n_ph,
        atom_dim,
        photon_dim,
        dim,
        jx: kron(&atomic.jx, &id_ph),
        jy: kron(&atomic.jy, &id_ph),
        jz: kron(&atomic.jz, &id_ph),
        jxy: kron(&atomic.jxy, &id_ph),
        sx: kron(&id_at, &stokes.sx),
        sy: kron(&id_at, &stokes.sy),
        sz: kron(&id_at, &stokes.sz),
        single,
        atomic,
        stokes,
    })
}

/// `τH = g1 Sz Jz + g2 (Sx Jx + Sy Jy)`.
pub fn build_heff(ops: &CollectiveOperators, g1: f64, g2: f64) -> CMatrix {
    &ops.sz * &ops.jz * c(g1) + (&ops.sx * &ops.jx + &ops.sy * &ops.jy) * c(g2)
}

/// The Hamiltonian with the probe's `Sx` and `Sy` inverted.
pub fn build_heff_flipped(ops: &CollectiveOperators, g1: f64, g2: f64) -> CMatrix {
    &ops.sz * &ops.jz * c(g1) - (&ops.sx * &ops.jx + &ops.sy * &ops.jy) * c(g2)
}

/// `exp(iπ Jz)` on the joint space.
pub fn decoupling_rotation(ops: &CollectiveOperators) -> CMatrix {
    exp_i_hermitian(&ops.jz, std::f64::consts::PI)
}

/// `max |Ub† U_H Ub - U_H'|` where `Ub = exp(iπJz)`, `U_H = exp(-iH)` and
/// `H'` has `Sx → -Sx`, `Sy → -Sy`.
pub fn check_bangbang_equivalence(na: usize, f: f64, n_ph: usize, g1: f64, g2: f64) -> Result<f64> {
    let ops = build_joint_operators(na, f, n_ph)?;
    Ok(bangbang_deviation(&ops, g1, g2))
}

pub fn bangbang_deviation(ops: &CollectiveOperators, g1: f64, g2: f64) -> f64 {
    let ub = decoupling_rotation(ops);
    let u = crate::linalg::unitary_from_hermitian(&build_heff(ops, g1, g2));
    let u_flipped = crate::linalg::unitary_from_hermitian(&build_heff_flipped(ops, g1, g2));
    crate::linalg::max_abs_diff(&(ub.adjoint() * u * ub), &u_flipped)
}
