//! Multidimensional (Υ-) fixed points of mixed-monotone operators on product
//! spaces, and their use for nonlinear Hammerstein integral equations on
//! `C[1, T]`.
//!
//! The crate is organised bottom-up:
//!
//! * [`order`]: partitioned index sets, the product order and max metric, and
//!   Υ-tuples of index maps.
//! * [`contraction`]: altering-distance contraction triples `(ψ, θ, φ)`.
//! * [`space`]: the discretised function space (grids, quadrature,
//!   interpolation, CSV export).
//! * [`engine`]: the Picard sweep over all components and its diagnostics.
//! * [`hammerstein`]: integral-equation problems, the product operator and
//!   the assumption checkers.
//! * [`oracle`]: brute-force enumeration on small finite ordered metric spaces.
//! * [`run`]: config-driven `check` / `solve` / `verify` commands used by the
//!   CLI.

pub mod contraction;
pub mod engine;
pub mod error;
pub mod hammerstein;
pub mod oracle;
pub mod order;
pub mod run;
pub mod sampling;
pub mod space;

pub use error::{Error, Result};
