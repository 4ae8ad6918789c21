//! Numerical toolkit for the nonlocal advantage of quantum coherence (NAQC)
//! in two- and three-qubit systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`qlin`]: dense complex linear algebra for 2/4/8-dimensional states.
//! * [`coherence`]: l1-norm coherence and mutually unbiased basis triads.
//! * [`steering`]: conditional ensembles produced by projective measurements.
//! * [`optim`]: Nelder–Mead simplex search and quasi-random start points.
//! * [`naqc`]: the standard and generalized NAQC functionals, lower bound and
//!   tripartite monogamy sums.
//! * [`states`]: state families and seeded samplers.
//! * [`experiment`]: sweeps, threshold bisection, monogamy scans,
//!   verification suites and table output.

pub mod coherence;
pub mod error;
pub mod experiment;
pub mod naqc;
pub mod optim;
pub mod qlin;
pub mod states;
pub mod statefile;
pub mod steering;

pub use error::{Error, Result};

/// Upper bound on the sum of qubit coherences over a triad of mutually
/// unbiased bases.
pub const COMPLEMENTARITY_BOUND: f64 = 2.449_489_742_783_178;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_is_sqrt_six() {
        assert_eq!(COMPLEMENTARITY_BOUND, 6f64.sqrt());
    }
}
