//! Numerical construction and verification of Bonnet surfaces in isothermal
//! coordinates: the Q families, the rotation angle ψ, the mean-curvature
//! profile H(s), and the immersed surface with its isometric deformations.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bonnet_solver;
pub mod config;
pub mod convergence;
pub mod error;
pub mod forms2d;
pub mod lax_psi;
pub mod ode;
pub mod pipeline;
pub mod q_family;
pub mod surface_embed;
pub mod verify;

pub use error::{Error, Result};
