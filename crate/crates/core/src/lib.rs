//! Simulation engine and verification harness for critical continuous-time
//! Markov branching processes with very heavy-tailed offspring: exact
//! offspring laws, analytic oracles (generating functions, survival decay,
//! reduced-process identities), genealogy simulation with MRCA extraction,
//! limit-tree samplers, coalescent merger laws and Monte Carlo experiments.

pub mod analytic;
pub mod error;
pub mod limit_process;
pub mod numeric;
pub mod offspring;
pub mod rng;
pub mod simulator;

pub use analytic::{f_closed, limit_cdfs, AnalyticModel, ClosedMode, LimitLaws};
pub use error::{Error, Result};
pub use offspring::{LawKind, OffspringLaw};
