//! Cell-centered updated-Lagrangian finite volume solver for the unified GPR
//! (Godunov-Peshkov-Romenski) model of continuum mechanics on unstructured
//! triangular meshes. One set of equations covers inviscid gas dynamics,
//! viscous heat-conducting fluids, and elastic or elasto-plastic solids; the
//! strain and thermal-impulse relaxation sources are integrated with
//! semi-analytical stiff solvers so the Navier-Stokes-Fourier limit is
//! recovered for arbitrarily small relaxation times.

pub mod error;
pub mod tensor;
pub mod eos;
pub mod state;
pub mod mesh;
pub mod meshgen;
pub mod relax;
pub mod recon;
pub mod nodal;
pub mod stepper;
pub mod output;
pub mod cases;
pub mod refsol;
pub mod ns1d;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Result, SolverError};
