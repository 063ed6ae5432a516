//! Reduced-basis boundary integral solver for TM scattering by elliptical
//! plasmonic particles, with adjoint shape gradients and an absorber design
//! loop.

pub mod adjoint;
pub mod bessel;
pub mod design;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod gradient;
pub mod initializer;
pub mod kernels;
pub mod linalg;
pub mod materials;
pub mod nnls;
pub mod nystrom;
pub mod observables;
pub mod operators;
pub mod optimizer;
pub mod pso;
pub mod spectral;

pub use error::{Error, Result};
