//! Numerical toolkit for the duality between noisy quantum channels and
//! entangled states on finite-dimensional systems.
//!
//! The crate converts between channel representations (isometry, channel ket,
//! dynamical operator, transition operator, Kraus set), computes statistical
//! correlations for states and channels, decides where information about one
//! subsystem is perfectly present or completely absent in others, and audits
//! quantum error-correcting codes (security, Knill-Laflamme condition,
//! Singleton bound).
//!
//! All values are immutable after construction and all operations are pure,
//! so everything is safe to use concurrently.

pub mod channel;
pub mod codes;
pub mod config;
pub mod error;
pub mod hilbert;
pub mod infoloc;
pub mod json;
pub mod kernels;
pub mod opbasis;
pub mod random;
pub mod space;
pub mod suites;

pub use channel::{ChannelBundle, LinearMap, Route, StandardChannel};
pub use config::Config;
pub use error::{Error, Result};
pub use hilbert::{Decomposition, Ket, Operator, SchmidtForm};
pub use infoloc::{InfoVerdict, PreProbability, ProbTable, Verdict};
pub use space::SpaceRegistry;
