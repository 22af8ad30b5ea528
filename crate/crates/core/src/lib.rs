//! Worst-case payoff guarantees for two-period moral hazard with exploration.
//!
//! A principal contracts with two agents in sequence. The agents share an
//! action set (a *technology*) that the principal knows only partially: she
//! knows some actions exist, but the true set may contain more. She observes
//! the first agent's chosen action and designs the second contract with that
//! knowledge, maximizing the worst case over all technologies consistent with
//! what she saw.
//!
//! The library provides:
//!
//! - domain types for output grids, actions, contracts and technologies
//!   ([`domain`]),
//! - agent best responses with principal-favored tie-breaking and the
//!   compatibility relation that encodes the principal's updating rule
//!   ([`agent`]),
//! - closed-form optimal second-period guarantees for the baseline, general
//!   known-set and technological-advances variants, together with worst-case
//!   technology witnesses ([`second_period`]),
//! - the first-period minimax programs over linear shares, contract
//!   linearization and optimal-share search ([`first_period`]),
//! - a brute-force adversary oracle that independently verifies every closed
//!   form by searching compatible technologies ([`adversary`]).
//!
//! All numeric code is generic over the scalar type through [`Scalar`];
//! `f64` aliases are exported at the crate root for everyday use.

pub mod adversary;
pub mod agent;
pub mod domain;
mod error;
pub mod first_period;
mod scalar;
mod search;
pub mod second_period;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use domain::{
    agent_utility, evaluate_contract, expectation, principal_payoff, Action, Contract,
    Distribution, ModelConfig, OutputGrid, Technology, Tolerances, Variant,
};

/// `f64` instantiations of the domain types.
pub type OutputGrid64 = OutputGrid<f64>;
pub type Distribution64 = Distribution<f64>;
pub type Action64 = Action<f64>;
pub type Contract64 = Contract<f64>;
pub type Technology64 = Technology<f64>;
pub type ModelConfig64 = ModelConfig<f64>;
pub type Tolerances64 = Tolerances<f64>;
