//! Linearised Calderón problem on the unit disk.
//!
//! The forward operator `F` maps an `L²` perturbation of the unit conductivity
//! to the Fréchet derivative of the Neumann-to-Dirichlet map. In the Zernike
//! basis for the disk and the Fourier basis on its boundary, all matrix
//! elements of `F` have closed forms, the perturbation can be recovered
//! exactly layer by layer, and the Hilbert–Schmidt/Lipschitz stability
//! constants are explicit. This crate implements:
//!
//! - [`zernike`]: the orthonormal Zernike basis of `L²(D)`, monomial
//!   expansions and projections;
//! - [`forward`]: closed-form boundary data matrices, an independent
//!   quadrature oracle, certified Hilbert–Schmidt norms and the adjoint;
//! - [`reconstruction`]: inductive exact recovery of Zernike coefficients
//!   from the data matrix, plus injectivity witnesses;
//! - [`stability`]: the explicit upper/lower stability constants and their
//!   verification against computed norms;
//! - [`conformal`]: transfer of perturbations, Neumann data and norm bounds
//!   between the disk and explicitly-mapped planar domains;
//! - [`io`]: the JSON/CSV interchange formats used by the CLI.

pub mod comb;
pub mod conformal;
pub mod error;
pub mod forward;
pub mod io;
pub mod quad;
pub mod reconstruction;
pub mod stability;
pub mod zernike;

pub use error::{Error, Result};
pub use quad::QuadratureGrid;
pub use zernike::{BasisIndex, ZernikeCoeffs};

/// Complex scalar used throughout the crate.
pub type Complex = num_complex::Complex64;
