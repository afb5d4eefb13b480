//! Discrete Dirichlet Laplacians on grid domains, their spectral and
//! Helffer–Sjöstrand functional calculus, heat-flow square functions and a
//! numerical harness for the associated `L^p` estimates.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Banded sweeps and jet arithmetic index several arrays in lockstep.
#![allow(clippy::needless_range_loop)]

pub mod dhs;
pub mod error;
pub mod field;
pub mod grid;
pub mod harness;
pub mod heat;
pub mod opnorm;
pub mod quadrature;
pub mod sparse;
pub mod spectral;
pub mod square;
pub mod symbol;

pub use error::{Error, Result};
pub use field::{lp_norm, Field, Scalar};
pub use grid::{dirichlet_laplacian, gradient, neumann_laplacian, DomainDescriptor, GridDomain};
pub use sparse::{BandedLu, Definiteness, SparseOperator};
pub use spectral::SpectralDecomposition;
