//! Verification toolkit for the two-star exponential random graph model.
//!
//! * [`graph`]: edge indexing, wedges and homomorphism densities of `K_n`.
//! * [`gibbs`]: exact partition functions and expectations by enumeration.
//! * [`inequalities`]: Ursell functions and FKG / GKS / GHS verifiers.
//! * [`duplication`]: the doubled-system mixture decomposition.
//! * [`meanfield`]: fixed points, phase classification, critical curve.
//! * [`mcmc`]: Glauber dynamics for sizes beyond enumeration.
//! * [`report`] and [`cli`]: tabular reports and the command-line driver.

pub mod cli;
pub mod duplication;
pub mod error;
pub mod gibbs;
pub mod graph;
pub mod inequalities;
pub mod mcmc;
pub mod meanfield;
pub mod numeric;
pub mod report;

pub use error::{Error, Result};
pub use gibbs::{Coupling, ErgmParams, ExactSystem, GeneralizedParams, Observable, ScalarParams};
pub use graph::{Config, EdgeIndex, SubgraphPattern, WedgeList};
