//! Sharp large deviation estimates for rescaled q-norms of random vectors
//! drawn from the cone measure on the l_p^n sphere or the uniform measure on
//! the l_p^n ball, together with seeded Monte Carlo oracles.
//!
//! The default `parallel` feature runs Monte Carlo chunks and grid sweeps on
//! rayon; without it every `Exec::Parallel` request runs sequentially. Both
//! paths give bit-identical results.

pub mod cgf;
pub mod error;
pub mod gengauss;
pub mod geometry;
pub mod legendre;
pub mod montecarlo;
pub mod params;
pub mod quad;
pub mod rng;
pub mod sld;

pub use error::{Result, SldError};
pub use params::PqParams;
