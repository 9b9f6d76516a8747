//! Linear stability of the viscous, zero-resistivity two-phase MHD
//! Rayleigh-Taylor problem in the slab `(-1, 1)`.
//!
//! Each horizontal Fourier mode `xi` reduces to a fourth-order interface
//! eigenproblem for the vertical velocity profile `psi`. Replacing the
//! viscosity `mu` by `s mu` makes the problem variational:
//! `alpha(s) = min (|xi|^2 E0 + s E1) / J`, and the true growth rate is the
//! fixed point `s = sqrt(-alpha(s))`.
//!
//! Modules, bottom up:
//! - [`params`], [`mesh`]: physical data and the interface-pinned mesh
//! - [`forms`]: Hermite-cubic (`H_0^2`) and linear (`H_0^1`) spaces, energy forms
//! - [`variational`]: critical magnetic number and critical frequencies
//! - [`eigen`]: the modified eigenproblem `alpha(s)`
//! - [`growth`]: fixed-point growth rates, dispersion sweeps, mode shapes
//! - [`evolve`]: per-mode time integration and energy identities
//! - [`verify`]: the acceptance checks, shared by tests and the CLI

pub mod eigen;
pub mod error;
pub mod evolve;
pub mod forms;
pub mod growth;
pub mod mesh;
pub mod par;
pub mod params;
pub mod roots;
pub mod variational;
pub mod verify;

pub use error::{Error, Result};
pub use forms::{FormSet, HermiteSpace, LinearSpace};
pub use mesh::{build_mesh, InterfaceMesh};
pub use par::Execution;
pub use params::{FluidParams, Frequency, MagneticConfig, Orientation, Side};
