//! Core algorithms for coupled interior/exterior 2D elasticity solvers.
//!
//! The crate couples a finite element discretization of a (possibly
//! nonlinear) elastic body with a boundary element discretization of the
//! surrounding unbounded linear medium. Three coupling formulations are
//! provided (symmetric, Johnson-Nedelec, Bielak-MacCamy), together with an
//! optional low-rank stabilization that restores ellipticity without
//! changing the solution, and an analysis toolbox that certifies the
//! structural properties the formulations rely on (rigid-body projections,
//! layer-operator kernels, contraction constants, convergence rates).
//!
//! The crate is `no_std` (with `alloc`); everything that touches files,
//! configuration, or the command line lives in the companion `lamecouple`
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod bem;
pub mod coupling;
pub mod fem;
pub mod linalg;
pub mod material;
pub mod mesh;
pub mod num;
pub mod solver;

pub use coupling::{CoupledSolution, CoupledSystem, CouplingMethod, ProblemData, XiChoice};
pub use material::{MaterialLaw, MuTilde, SymTensor2};
pub use mesh::{Mesh, ScaleRecord, SurfaceMesh3};
pub use solver::{SolveMethod, SolveOptions, SolveTrace};
