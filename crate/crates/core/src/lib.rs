//! Quantum non-demolition probing of spin-`f` ensembles with dynamically
//! decoupled light pulses.
//!
//! - [`spin_ops`]: single-atom spin, alignment and Stokes matrices.
//! - [`gaussian`]: moments of `(Jy, Jz, J[x,y], M)` through a pulse train.
//! - [`oracle`]: exact few-body evolution used to check the Gaussian model.
//! - [`experiment`]: atom-number sweeps, fits, figures of merit and Monte
//!   Carlo sampling.

pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod linalg;
pub mod oracle;
pub mod spin_ops;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spin-operators.md")]
    mod spin_operators {}
    #[doc = include_str!("../../../book/src/hamiltonian.md")]
    mod hamiltonian {}
    #[doc = include_str!("../../../book/src/covariance-engine.md")]
    mod covariance_engine {}
    #[doc = include_str!("../../../book/src/exact-oracle.md")]
    mod exact_oracle {}
    #[doc = include_str!("../../../book/src/noise-scaling.md")]
    mod noise_scaling {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
