//! Numerical toolkit for packing norms `V^{pq}(log V)^α`, their classical neighbours
//! (Lorentz-Zygmund, Morrey), Haar-based negative Sobolev estimates, and 2D/3D
//! vorticity energy diagnostics.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod euler2d;
pub mod euler3d;
pub mod field;
pub mod geometry;
pub mod io;
pub mod packing;
pub mod rearrange;
pub mod spectral;
pub mod wavelet;

pub use error::{Error, Result};
