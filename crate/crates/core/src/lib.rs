//! Variable-depth most permissive simulation of Boolean networks.
//!
//! Networks are read from `.bnet` files ([`bnet`]), analysed with the most
//! permissive update rule ([`engine`]), and sampled with a depth drawn at every
//! step ([`sampler`]). [`attractors`] computes minimal trap spaces and estimates
//! how often each is reached; [`oracle`] holds brute-force references for small
//! networks.

pub mod attractors;
pub mod bnet;
pub mod engine;
pub mod error;
pub mod model;
pub mod oracle;
pub mod random;
pub mod sampler;
pub mod subcube;

pub use attractors::{
    estimate_propensities, filter_reachable_attractors, in_attractor, is_trap_space, minimal_trap_spaces, AttractorSet,
    Outcome, Propensities,
};
pub use bnet::{parse_bnet, parse_configuration, serialize_bnet};
pub use engine::{Limits, MpNetwork, Space, SpaceSet};
pub use error::{Error, Result};
pub use model::{BooleanNetwork, ComponentSet, Configuration, Expr, InfluenceGraph, Mutation, Sign};
pub use oracle::{ExactPropensities, Oracle};
pub use sampler::{
    random_stream, sample_next_configuration, simulate_trajectory, transition_rates, DepthDistribution, DepthSpec,
    LRowMode, RateMatrix, SimulationParams, StopPolicy, StopReason, Trajectory, WeightSpec, WeightVector,
};
pub use subcube::Subhypercube;
