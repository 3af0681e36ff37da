//! Volterra-type integral operators `V_(g,psi)`, `J_(g,psi)` on Fock spaces.
//!
//! Two independent routes to the same questions:
//!
//! - [`classify`] decides boundedness, compactness, Schatten membership,
//!   compact differences and spectra from polynomial degrees and the shape of
//!   the affine self-map.
//! - [`fockmat`] builds exact truncated matrices in the orthonormal basis
//!   `z^n / sqrt(n!)` and reads the same properties off singular values and
//!   resolvent norms; [`planequad`] evaluates the Gaussian-weighted integrals
//!   (kernel norms, Berezin-type transforms, `L^r` norms of the criteria).
//!
//! [`cli`] runs scenario files through both routes and reports agreement.

// `!(x > 0.0)` guards reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cli;
pub mod error;
pub mod fockmat;
pub mod planequad;
pub mod symbols;

pub use error::{FockError, Result};
pub use symbols::{AffineMap, ComplexPolynomial, OperatorKind, SymbolPair};
