//! Default cascades on random directed weighted interbank networks.
//!
//! * [`netgen`]: G(N,p) generation, degree laws and structural metrics.
//! * [`balance`]: balance sheets and the solvency condition.
//! * [`cascade`]: initial shocks and round-by-round default propagation.
//! * [`spread`]: diffusion and random walks on networks.
//! * [`experiment`]: Monte-Carlo probability sweeps and their statistics.
//! * [`cli`]: the `contagion` command-line front end.

pub mod balance;
pub mod cascade;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod netgen;
pub mod rng;
pub mod spread;

pub use error::{Error, Result};
