//! Core algorithms for comparing structural causal models.
//!
//! This crate carries the model representation (DAGs, mechanisms, noise),
//! ancestral sampling and do-surgery, empirical Wasserstein distances via an
//! exact assignment solver, the closed-form linear-Gaussian oracle, posterior
//! noise inference (abduction), the three causal distances OD/ID/CD, and the
//! graph metrics SHD/SID.
//!
//! The crate is `no_std`-compatible (with `alloc`); all IO, file formats and
//! the CLI live in the companion crates.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub(crate) mod prelude {
    pub use alloc::borrow::ToOwned;
    pub use alloc::boxed::Box;
    pub use alloc::format;
    #[allow(unused_imports)]
    pub use alloc::string::{String, ToString};
    pub use alloc::sync::Arc;
    pub use alloc::vec;
    pub use alloc::vec::Vec;
}

pub mod abduct;
pub mod analytic;
pub mod dist;
pub mod gauss;
pub mod graph;
pub mod graphdist;
pub mod linalg;
pub mod mds;
pub mod ot;
pub mod rng;
pub mod scm;

pub use abduct::{abduct, counterfactual_sample, evidence_likelihood, CounterfactualModel, McmcConfig};
pub use analytic::{analytic_id, analytic_od, LinearGaussianView};
pub use dist::{cd, id, od, DistanceConfig, DistanceEstimate, SeedMode, WeightScheme};
pub use gauss::GaussianDist;
pub use graph::{Dag, NodeSet};
pub use graphdist::{shd, sid};
pub use ot::{empirical_distance, BaseDistance, BaseDistanceConfig};
pub use scm::{
    Evidence, Intervention, Mechanism, ModelKind, NoiseSpec, SampleMatrix, Scm, VariableDomain,
};

use alloc::string::String;
use core::fmt;

/// Errors surfaced by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A graph constructor or operation received an invalid graph.
    Graph(String),
    /// A model constructor or operation received an invalid model.
    Model(String),
    /// Two operands do not live on the same variables.
    Mismatch(String),
    /// A value lies outside a node's domain.
    Domain(String),
    /// Counterfactuals were requested on a model without structural equations.
    CounterfactualUnsupported,
    /// Discrete evidence with probability zero under the model.
    InfeasibleEvidence(String),
    /// The Gibbs chains disagree; the posterior pool cannot be trusted.
    McmcNotConverged(String),
    /// Numerical failure (singular matrix, non-PSD covariance, ...).
    Numerical(String),
    /// A configured enumeration or size cap was exceeded.
    CapExceeded(String),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::Graph(m) => write!(f, "graph error: {m}"),
            CoreError::Model(m) => write!(f, "model error: {m}"),
            CoreError::Mismatch(m) => write!(f, "operand mismatch: {m}"),
            CoreError::Domain(m) => write!(f, "domain error: {m}"),
            CoreError::CounterfactualUnsupported => write!(
                f,
                "counterfactuals are unsupported for causal Bayesian networks \
                 (no structural equations to abduct)"
            ),
            CoreError::InfeasibleEvidence(m) => write!(f, "infeasible evidence: {m}"),
            CoreError::McmcNotConverged(m) => write!(f, "mcmc did not converge: {m}"),
            CoreError::Numerical(m) => write!(f, "numerical error: {m}"),
            CoreError::CapExceeded(m) => write!(f, "cap exceeded: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CoreError {}

pub type Result<T> = core::result::Result<T, CoreError>;
