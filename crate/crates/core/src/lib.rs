//! Steady-state mean-square noise index of randomized averaging with
//! additive noise, for update matrices built from randomly induced
//! subgraphs of an underlying graph.
//!
//! The crate computes the index three ways: exactly, from the
//! `N²`-dimensional second-moment operator; through spectral lower and
//! upper bounds that only need the Laplacian spectrum; and by Monte Carlo
//! simulation of the noisy dynamics.
//!
//! ```
//! use noisy_consensus::graphs::make_star;
//! use noisy_consensus::noise_index::{noise_report, ReportOptions};
//! use noisy_consensus::ridl::RidlConfig;
//!
//! let g = make_star(8).unwrap();
//! let cfg = RidlConfig::from_k(&g, 0.9, 0.8, 1.0).unwrap();
//! let report = noise_report(&g, &cfg, &ReportOptions::default()).unwrap();
//! let exact = report.j_exact.unwrap();
//! assert!(report.j_lb <= exact && exact <= report.j_ub);
//! ```
//!
//! The `parallel` feature (on by default) runs ensembles, pattern
//! enumeration and the large eliminations on the rayon pool; without it
//! every [`Exec`] request falls back to sequential loops. Both paths give
//! identical results.

pub mod error;
pub mod exec;
pub mod graphs;
pub mod linalg;
pub mod noise_index;
pub mod ridl;
pub mod simulator;
pub mod tol;

pub use error::{Error, Result};
pub use exec::Exec;
