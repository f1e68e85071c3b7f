//! Compilation of discrete parametric probability models (Bayesian networks,
//! context-specific networks, unrolled dynamic networks) into sparse
//! interpolating polynomials, plus the sensitivity toolbox built on that
//! representation: covariation schemes, sensitivity functions, the
//! Chan-Darwiche distance, phi-divergences and a brute-force optimality
//! verifier.

pub mod compile;
pub mod covariation;
pub mod divergence;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod oracle;
pub mod poly;
pub mod rng;
pub mod sensitivity;
pub mod space;

pub use error::{Error, Result};
pub use model::{Model, Variable};
pub use poly::{AtomId, EventSet, Monomial, Polynomial, Term};
pub use space::{Assignment, Block, BlockId, IndetId, Indeterminate, ParameterSpace};
