//! Strengthened Cauchy-Schwarz and Hölder constants in finite dimensions.
//!
//! * [`space`]: inner-product spaces (optionally with a Gram matrix), norms.
//! * [`identities`]: exact real/imaginary/modulus Cauchy-Schwarz identities
//!   and the variational bound for `|(x, y)|`.
//! * [`subspace`]: γ and κ for linear subspaces via principal angles.
//! * [`cone`]: projection onto finitely generated cones, γ and κ for cones
//!   and finite unions of cones.
//! * [`holder`]: weighted L^p norms, the Mazur map, the sharpened Hölder
//!   inequality and Mazur-route γ bounds.
//! * [`oracle`]: seeded brute-force baselines for all of the above.
//! * [`cli`]: problem files, reports and the `cbs` command line.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cone;
pub mod error;
pub mod gamma;
pub mod holder;
pub mod identities;
pub mod linalg;
pub mod nnls;
pub mod oracle;
pub mod problem;
pub mod rng;
pub mod space;
pub mod subspace;
pub mod verify;

pub use error::{Error, Result};
pub use gamma::{GammaReport, Method};
