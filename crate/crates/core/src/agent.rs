//! Agent best responses, compatibility checks and incentive gaps.
//!
//! Agents maximize expected payment minus cost. Ties within tolerance are
//! broken in the principal's favor. Quitting is modeled by explicitly adding
//! the null action (zero output, zero cost) to a technology; `best_response`
//! itself never injects it.

use crate::domain::{agent_utility, principal_payoff, Contract, OutputGrid, Technology};
use crate::error::Result;
use crate::scalar::Scalar;

/// Outcome of the agent's utility maximization over a technology.
#[derive(Debug, Clone)]
pub struct BestResponse<S> {
    /// The maximized agent utility.
    pub agent_value: S,
    /// Index of the principal-favored selection among the ties.
    pub chosen: usize,
    /// Indices of all actions with utility within the tie tolerance of
    /// `agent_value`, in technology order.
    pub argmax: Vec<usize>,
    /// Agent utility per action, in technology order.
    pub utilities: Vec<S>,
    /// Principal payoff per action, in technology order.
    pub payoffs: Vec<S>,
}

impl<S: Scalar> BestResponse<S> {
    /// Principal payoff of the chosen action.
    pub fn principal_value(&self) -> S {
        self.payoffs[self.chosen]
    }
}

/// The agent's best response to `w` when the technology is `tech`.
///
/// `tie_tol` is the absolute tolerance for argmax membership; among tied
/// actions the one with the highest principal payoff is chosen (lowest index
/// on exact payoff ties, for reproducibility).
pub fn best_response<S: Scalar>(
    grid: &OutputGrid<S>,
    w: &Contract<S>,
    tech: &Technology<S>,
    tie_tol: S,
) -> Result<BestResponse<S>> {
    let mut utilities = Vec::with_capacity(tech.len());
    let mut payoffs = Vec::with_capacity(tech.len());
    for a in tech.actions() {
        utilities.push(agent_utility(grid, w, a)?);
        payoffs.push(principal_payoff(grid, w, a)?);
    }
    let agent_value = utilities
        .iter()
        .copied()
        .fold(S::neg_infinity(), |a, b| a.max(b));
    let argmax: Vec<usize> = (0..tech.len())
        .filter(|&i| utilities[i] >= agent_value - tie_tol)
        .collect();
    let chosen = argmax
        .iter()
        .copied()
        .fold(None::<usize>, |best, i| match best {
            Some(b) if payoffs[b] >= payoffs[i] => Some(b),
            _ => Some(i),
        })
        .expect("technology is nonempty");
    Ok(BestResponse {
        agent_value,
        chosen,
        argmax,
        utilities,
        payoffs,
    })
}

/// Difference in agent 1's payoff between the observed action `a1` and a
/// reference action `a` under the first-period contract.
///
/// This is the compensation scale for inducing `a` in the second period.
pub fn incentive_gap<S: Scalar>(
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    a1: &crate::domain::Action<S>,
    a: &crate::domain::Action<S>,
) -> Result<S> {
    Ok(agent_utility(grid, w1, a1)? - agent_utility(grid, w1, a)?)
}

/// Whether `tech` is consistent with observing `a1` under `w1`: it must
/// contain every known action and `a1`, and no action may beat `a1` for
/// agent 1 by more than the tie tolerance.
pub fn is_compatible<S: Scalar>(
    grid: &OutputGrid<S>,
    tech: &Technology<S>,
    w1: &Contract<S>,
    a1: &crate::domain::Action<S>,
    known: &Technology<S>,
    tie_tol: S,
) -> Result<bool> {
    if !tech.contains(a1) {
        return Ok(false);
    }
    for k in known.actions() {
        if !tech.contains(k) {
            return Ok(false);
        }
    }
    let cap = agent_utility(grid, w1, a1)?;
    for a in tech.actions() {
        if agent_utility(grid, w1, a)? > cap + tie_tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First-period principal payoff plus the discounted second-period guarantee.
pub fn interim_guarantee<S: Scalar>(
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    a1: &crate::domain::Action<S>,
    v2_star: S,
    beta: S,
) -> Result<S> {
    Ok(principal_payoff(grid, w1, a1)? + beta * v2_star)
}
