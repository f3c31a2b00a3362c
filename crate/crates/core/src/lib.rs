//! Numerical laboratory for the spectral geometry of finite-area hyperbolic
//! surfaces: Selberg transforms, trace formula, Eisenstein series on the
//! modular surface, Fuchsian group enumeration, and Weil–Petersson bounds.

// `!(x > 0.0)` is used on purpose so NaN falls into the rejection branch;
// tabulated constants keep the digits they were published with.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cheb;
pub mod error;
pub mod experiments;
pub mod fuchsian;
pub mod hgeom;
pub mod modsurf;
pub mod quad;
pub mod qvar;
pub mod specfun;
pub mod traceform;
pub mod transforms;
pub mod wpbound;

pub use error::{Error, Result};
pub use quad::Estimate;
