//! Coordinate calculus for higher-order stresses on jet bundles.
//!
//! The crate provides, over an `n`-dimensional base with a rank-`m` fiber
//! and theory order `k`:
//!
//! * multi-index combinatorics and symmetric/almost-symmetric component
//!   arrays with explicit component conventions ([`multiindex`], [`symalg`]);
//! * truncated Taylor arithmetic and expression-tree smooth maps — the
//!   differentiation backend for everything else ([`series`], [`expr`],
//!   [`field`]);
//! * jet points, prolongation and first jets of jet-bundle sections
//!   ([`jet`]);
//! * the three stress objects (variational, traction, non-holonomic) with
//!   body forces, all maps between them, and constitutive evaluation
//!   ([`stress`]);
//! * coordinate changes: jet transition matrices and covariant pushforwards
//!   of every stress kind ([`chart`]);
//! * regions, oriented boundaries, quadrature and the integral identities
//!   tying stresses to force systems ([`measure`]);
//! * a batch verification harness with seeded randomized inputs
//!   ([`verify`]).

pub mod error;
pub mod expr;
pub mod field;
pub mod jet;
pub mod multiindex;
pub mod oracle;
pub mod series;
pub mod stress;
pub mod symalg;

pub use error::{Error, Result};
