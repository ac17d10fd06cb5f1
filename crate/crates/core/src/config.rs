use serde::{Deserialize, Serialize};

/// Numeric policy shared by every verdict in the crate.
///
/// All comparisons are absolute on Frobenius-normalized quantities. Rank
/// decisions use a threshold relative to the largest eigenvalue or singular
/// value of the matrix at hand, and eigenvalues below `clamp` are treated as
/// exact zeros inside logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// Absolute tolerance for equality checks and verdicts.
    pub tol: f64,
    /// Relative rank threshold: an eigenvalue or singular value counts as
    /// nonzero when it exceeds `rank_rel` times the largest one.
    pub rank_rel: f64,
    /// Eigenvalues below this are clamped to zero before entropies.
    pub clamp: f64,
    /// Logarithm base for entropies and mutual information (2.0 = bits).
    pub log_base: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol: 1e-9,
            rank_rel: 1e-9,
            clamp: 1e-12,
            log_base: 2.0,
        }
    }
}

impl Config {
    pub fn with_tol(tol: f64) -> Self {
        Config {
            tol,
            ..Config::default()
        }
    }

    /// Absolute rank threshold for a matrix whose largest eigenvalue or
    /// singular value is `largest`.
    pub fn rank_threshold(&self, largest: f64) -> f64 {
        self.rank_rel * largest.max(f64::MIN_POSITIVE)
    }

    pub fn log(&self, x: f64) -> f64 {
        x.ln() / self.log_base.ln()
    }
}
