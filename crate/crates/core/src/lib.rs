//! Operator fractional Brownian motion: exact synthesis, multivariate
//! wavelet analysis and eigenvalue-based estimation of the Hurst matrix.

pub mod asymvar;
pub mod error;
pub mod estim;
pub mod experiment;
pub mod io;
pub mod matfun;
pub mod model;
pub mod plot;
pub mod poly;
pub mod quad;
pub mod stats;
pub mod synth;
pub mod wavelet;

pub use error::{Error, Result};
