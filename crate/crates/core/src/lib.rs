//! Reconstruction of a spatially varying conductivity on the square (-1,1)^2
//! from noisy pairs of boundary current and boundary voltage measurements.
//!
//! The forward problem is discretized with piecewise linear finite elements
//! on structured triangulations. Reconstruction minimizes a Kohn-Vogelius
//! misfit between a Neumann and a Dirichlet solution, regularized by a
//! smoothed total variation term, using projected gradient descent with an
//! Armijo line search. The [`experiments`] module drives multilevel
//! reconstruction runs with synthetic noisy data and reports errors and
//! convergence orders; [`io`] holds the file formats of the command line
//! driver.

pub mod error;
pub mod experiments;
pub mod fem;
pub mod forward;
pub mod io;
pub mod mesh;
pub mod objective;
pub mod optimizer;
pub mod solve;
pub mod sparse;

pub use error::{Error, Result};
pub use mesh::{boundary_trace, interpolate_nodal, Mesh, NodalField, Side};
pub use sparse::CsrMatrix;
