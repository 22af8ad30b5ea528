//! Closed-form optimal second-period payoff guarantees and the contracts
//! that attain them, for all three model variants.
//!
//! After observing the first agent's action, the principal's optimal
//! worst-case payoff is the square of a *margin*: the best of several
//! square-root terms, each corresponding to one way of responding to the
//! observation. Offering the first contract again earns the margin
//! `sqrt(E_F1[y - w1])`; modifying it with extra compensation for a reference
//! action `a` earns `sqrt(E_Fa[y - w1]) - sqrt(gap(a))`; a static linear
//! contract keyed to `a` earns `sqrt(E_Fa[y]) - sqrt(c_a)`. Negative
//! radicands exclude a term from the maximum.
//!
//! Each closed form comes with a worst-case technology witness built from
//! mixtures of an existing distribution with a point mass at zero output;
//! the adversary module executes the witnesses to confirm tightness.

use crate::agent::incentive_gap;
use crate::domain::{
    expectation, principal_payoff, Action, Contract, OutputGrid, Technology, Tolerances,
};
use crate::error::{Error, Result};
use crate::scalar::{checked_sqrt, Scalar};

/// Which of the closed-form cases attains the optimal guarantee.
///
/// The first four label the baseline (single known action) analysis; the last
/// two label the general known-set and technological-advances analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecondPeriodCase {
    /// Repeat the first-period contract.
    RepeatW1,
    /// First-period contract plus a share of the residual output, compensating
    /// the agent for not repeating the observed action.
    BlendCompensate,
    /// Static linear contract keyed to the known action.
    LinearKnown,
    /// Static linear contract keyed to the observed action.
    LinearObserved,
    /// Modified first-period contract keyed to the best reference action.
    ModifiedW1,
    /// Static linear contract keyed to the best reference action.
    LinearStatic,
}

impl SecondPeriodCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            SecondPeriodCase::RepeatW1 => "repeat-w1",
            SecondPeriodCase::BlendCompensate => "blend-compensate",
            SecondPeriodCase::LinearKnown => "linear-known",
            SecondPeriodCase::LinearObserved => "linear-observed",
            SecondPeriodCase::ModifiedW1 => "modified-w1",
            SecondPeriodCase::LinearStatic => "linear-static",
        }
    }
}

/// Result of the second-period analysis.
#[derive(Debug, Clone)]
pub struct SecondPeriodReport<S> {
    /// Square-root margin whose square is the guarantee.
    pub margin: S,
    /// Optimal second-period payoff guarantee.
    pub guarantee: S,
    pub case: SecondPeriodCase,
    /// Reference action whose margin term attains the maximum.
    pub attaining_action: Action<S>,
    /// A contract achieving the guarantee.
    pub contract: Contract<S>,
    /// Worst-case technology under which the contract earns exactly the
    /// guarantee.
    pub witness: Technology<S>,
}

/// Which candidate slot a margin term belongs to: the observed action or a
/// known action by index. Needed for case labeling, since the observed
/// action may coincide with a known one by value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Observed,
    Known(usize),
}

fn slot_action<'a, S: Scalar>(
    slot: Slot,
    a1: &'a Action<S>,
    known: &'a Technology<S>,
) -> &'a Action<S> {
    match slot {
        Slot::Observed => a1,
        Slot::Known(i) => &known.actions()[i],
    }
}

/// Margin of the modified-first-contract family: the best over the observed
/// action and every known action `a` of `sqrt(E_Fa[y - w1]) - sqrt(gap(a))`.
///
/// Returns the attaining action alongside the value, or `None` when every
/// term is excluded (the contract overpays all candidate actions in
/// expectation). The observed action is preferred on exact ties.
///
/// Errors with [`Error::IncompatibleObservation`] if some known action beats
/// the observed one by more than the tie tolerance; a rational first agent
/// cannot be observed choosing a dominated action.
pub fn modified_margin<S: Scalar>(
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    a1: &Action<S>,
    known: &Technology<S>,
    tols: &Tolerances<S>,
) -> Result<Option<(S, Action<S>)>> {
    Ok(modified_margin_slot(grid, w1, a1, known, tols)?
        .map(|(v, slot)| (v, slot_action(slot, a1, known).clone())))
}

fn modified_margin_slot<S: Scalar>(
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    a1: &Action<S>,
    known: &Technology<S>,
    tols: &Tolerances<S>,
) -> Result<Option<(S, Slot)>> {
    let mut best: Option<(S, Slot)> = None;
    for (slot, gap) in candidate_gaps(grid, w1, a1, known, tols)? {
        let candidate = slot_action(slot, a1, known);
        let residual = principal_payoff(grid, w1, candidate)?;
        let term = checked_sqrt(residual).map(|r| r - gap.sqrt());
        if let Some(v) = term {
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, slot));
            }
        }
    }
    Ok(best)
}

/// Margin of the static linear family: the best over known actions and the
/// observed action of `sqrt(E_Fa[y]) - sqrt(c_a)`.
///
/// Known actions are preferred on exact ties.
pub fn static_margin<S: Scalar>(
    grid: &OutputGrid<S>,
    a1: &Action<S>,
    known: &Technology<S>,
) -> Result<(S, Action<S>)> {
    let (v, slot) = static_margin_slot(grid, a1, known)?;
    Ok((v, slot_action(slot, a1, known).clone()))
}

fn static_margin_slot<S: Scalar>(
    grid: &OutputGrid<S>,
    a1: &Action<S>,
    known: &Technology<S>,
) -> Result<(S, Slot)> {
    let mut best: Option<(S, Slot)> = None;
    let slots = (0..known.len())
        .map(Slot::Known)
        .chain(std::iter::once(Slot::Observed));
    for slot in slots {
        let a = slot_action(slot, a1, known);
        let v = a.mean(grid)?.sqrt() - a.cost.sqrt();
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, slot));
        }
    }
    Ok(best.expect("technology is nonempty"))
}

/// Observed action first, then the known actions, with incentive gaps
/// validated and clamped to be nonnegative.
fn candidate_gaps<S: Scalar>(
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    a1: &Action<S>,
    known: &Technology<S>,
    tols: &Tolerances<S>,
) -> Result<Vec<(Slot, S)>> {
    let mut out = Vec::with_capacity(known.len() + 1);
    out.push((Slot::Observed, S::zero()));
    for (i, k) in known.actions().iter().enumerate() {
        let gap = incentive_gap(grid, w1, a1, k)?;
        if gap < -tols.tie {
            return Err(Error::IncompatibleObservation(
                "a known action pays the first agent strictly more than the observed one",
            ));
        }
        out.push((Slot::Known(i), gap.max(S::zero())));
    }
    Ok(out)
}

/// Optimal second-period guarantee and contract for a general known set.
///
/// The guarantee is the squared maximum of [`modified_margin`] and
/// [`static_margin`]; the modified route wins ties.
pub fn optimal_contract_general<S: Scalar>(
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    a1: &Action<S>,
    known: &Technology<S>,
    tols: &Tolerances<S>,
) -> Result<SecondPeriodReport<S>> {
    Ok(optimal_contract_slotted(grid, w1, a1, known, tols)?.0)
}

fn optimal_contract_slotted<S: Scalar>(
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    a1: &Action<S>,
    known: &Technology<S>,
    tols: &Tolerances<S>,
) -> Result<(SecondPeriodReport<S>, Slot)> {
    let modified = modified_margin_slot(grid, w1, a1, known, tols)?;
    let (static_value, static_slot) = static_margin_slot(grid, a1, known)?;

    let use_modified = match &modified {
        Some((v, _)) => *v >= static_value,
        None => false,
    };

    if use_modified {
        let (margin, slot) = modified.expect("checked above");
        if margin <= S::zero() {
            return Err(Error::NoProfitableAction);
        }
        let attaining = slot_action(slot, a1, known).clone();
        let (contract, m) = blend_contract(grid, w1, a1, &attaining, tols)?;
        let witness = if m == S::zero() {
            known.extended([a1.clone()])
        } else {
            let deviation = blend_deviation(grid, w1, a1, &attaining, m, tols)?;
            known.extended([a1.clone(), deviation])
        };
        Ok((
            SecondPeriodReport {
                margin,
                guarantee: margin * margin,
                case: SecondPeriodCase::ModifiedW1,
                attaining_action: attaining,
                contract,
                witness,
            },
            slot,
        ))
    } else {
        if static_value <= S::zero() {
            return Err(Error::NoProfitableAction);
        }
        let attaining = slot_action(static_slot, a1, known).clone();
        let contract = static_contract(grid, &attaining)?;
        let deviation = static_deviation(grid, &attaining)?;
        let witness = known.extended([a1.clone(), deviation]);
        Ok((
            SecondPeriodReport {
                margin: static_value,
                guarantee: static_value * static_value,
                case: SecondPeriodCase::LinearStatic,
                attaining_action: attaining,
                contract,
                witness,
            },
            static_slot,
        ))
    }
}

/// Margin and attaining case of the baseline (single known action) analysis.
///
/// Ties resolve in the fixed order repeat, blend, linear-known,
/// linear-observed.
pub fn margin_baseline<S: Scalar>(
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    a1: &Action<S>,
    a0: &Action<S>,
    tols: &Tolerances<S>,
) -> Result<(S, SecondPeriodCase)> {
    let report = optimal_contract_baseline(grid, w1, a1, a0, tols)?;
    Ok((report.margin, report.case))
}

/// Optimal second-period guarantee and contract when a single action is
/// known. Specializes [`optimal_contract_general`]; only the case labels
/// differ.
pub fn optimal_contract_baseline<S: Scalar>(
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    a1: &Action<S>,
    a0: &Action<S>,
    tols: &Tolerances<S>,
) -> Result<SecondPeriodReport<S>> {
    if a0.mean(grid)? - a0.cost <= S::zero() {
        return Err(Error::NoProfitableAction);
    }
    let known = Technology::new(vec![a0.clone()])?;
    let (mut report, slot) = optimal_contract_slotted(grid, w1, a1, &known, tols)?;
    let attains_observed = slot == Slot::Observed;
    report.case = match report.case {
        SecondPeriodCase::ModifiedW1 => {
            if attains_observed {
                SecondPeriodCase::RepeatW1
            } else {
                SecondPeriodCase::BlendCompensate
            }
        }
        SecondPeriodCase::LinearStatic => {
            if attains_observed {
                SecondPeriodCase::LinearObserved
            } else {
                SecondPeriodCase::LinearKnown
            }
        }
        other => other,
    };
    Ok(report)
}

/// Optimal second-period guarantee under technological advances.
///
/// The principal's updating keeps only set containment, so the guarantee is
/// the squared static margin regardless of the first-period contract.
pub fn advances_guarantee<S: Scalar>(
    grid: &OutputGrid<S>,
    a1: &Action<S>,
    known: &Technology<S>,
) -> Result<SecondPeriodReport<S>> {
    let (margin, attaining) = static_margin(grid, a1, known)?;
    if margin <= S::zero() {
        return Err(Error::NoProfitableAction);
    }
    let contract = static_contract(grid, &attaining)?;
    let deviation = static_deviation(grid, &attaining)?;
    let witness = known.extended([a1.clone(), deviation]);
    Ok(SecondPeriodReport {
        margin,
        guarantee: margin * margin,
        case: SecondPeriodCase::LinearStatic,
        attaining_action: attaining,
        contract,
        witness,
    })
}

/// Worst-case technology for the given case: the known actions, the observed
/// action, and the case's constructed deviation on the same grid.
pub fn worst_case_witness<S: Scalar>(
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    a1: &Action<S>,
    known: &Technology<S>,
    case: SecondPeriodCase,
    tols: &Tolerances<S>,
) -> Result<Technology<S>> {
    match case {
        SecondPeriodCase::RepeatW1 => Ok(known.extended([a1.clone()])),
        SecondPeriodCase::BlendCompensate | SecondPeriodCase::ModifiedW1 => {
            let modified = modified_margin(grid, w1, a1, known, tols)?
                .ok_or(Error::Internal("modified margin is empty for a blend case"))?;
            let attaining = modified.1;
            let (_, m) = blend_contract(grid, w1, a1, &attaining, tols)?;
            if m == S::zero() {
                return Ok(known.extended([a1.clone()]));
            }
            let deviation = blend_deviation(grid, w1, a1, &attaining, m, tols)?;
            Ok(known.extended([a1.clone(), deviation]))
        }
        SecondPeriodCase::LinearKnown
        | SecondPeriodCase::LinearObserved
        | SecondPeriodCase::LinearStatic => {
            let (_, attaining) = static_margin(grid, a1, known)?;
            let deviation = static_deviation(grid, &attaining)?;
            Ok(known.extended([a1.clone(), deviation]))
        }
    }
}

/// Blend of the first contract achieving the modified-route margin for the
/// reference action, together with the residual fraction used.
fn blend_contract<S: Scalar>(
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    a1: &Action<S>,
    a_star: &Action<S>,
    tols: &Tolerances<S>,
) -> Result<(Contract<S>, S)> {
    let gap = incentive_gap(grid, w1, a1, a_star)?.max(S::zero());
    if gap == S::zero() {
        // No compensation needed: the modification is the contract itself.
        return Ok((w1.clone(), S::zero()));
    }
    let residual = principal_payoff(grid, w1, a_star)?;
    if residual <= S::zero() {
        return Err(Error::Internal(
            "blend case attained with nonpositive residual expectation",
        ));
    }
    let mut m = (gap / residual).sqrt();
    if m > S::one() {
        if m > S::one() + tols.validation {
            return Err(Error::Internal("blend fraction exceeded one"));
        }
        m = S::one();
    }
    Ok((Contract::blend(w1.clone(), m)?, m))
}

/// Static linear contract keyed to the reference action.
fn static_contract<S: Scalar>(grid: &OutputGrid<S>, a_star: &Action<S>) -> Result<Contract<S>> {
    let mean = a_star.mean(grid)?;
    if mean <= S::zero() {
        return Err(Error::Internal(
            "static case attained by an action with zero expected output",
        ));
    }
    let share = (a_star.cost / mean).sqrt().min(S::one());
    Contract::linear(share)
}

/// Deviation action making agent 1 indifferent to the observed action under
/// the first contract and agent 2 indifferent to the reference action under
/// the blend.
pub(crate) fn blend_deviation<S: Scalar>(
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    a1: &Action<S>,
    a_star: &Action<S>,
    m: S,
    tols: &Tolerances<S>,
) -> Result<Action<S>> {
    let gap = incentive_gap(grid, w1, a1, a_star)?.max(S::zero());
    let w1_payments = w1.payments(grid)?;
    let expected_payment = expectation(&a_star.dist, &w1_payments)?;
    let cost = a_star.cost - (m * expected_payment + gap);
    if cost < -tols.closed_form {
        return Err(Error::Internal("constructed worst-case cost is negative"));
    }
    let dist = a_star.dist.mix_toward_zero(S::one() - m)?;
    Action::new(dist, cost.max(S::zero()))
}

/// Zero-cost deviation diluting the reference action so that the static
/// linear contract earns exactly its guarantee.
pub(crate) fn static_deviation<S: Scalar>(
    grid: &OutputGrid<S>,
    a_star: &Action<S>,
) -> Result<Action<S>> {
    let mean = a_star.mean(grid)?;
    if mean <= S::zero() {
        return Err(Error::Internal(
            "static deviation requires positive expected output",
        ));
    }
    let keep = (S::one() - (a_star.cost / mean).sqrt()).max(S::zero());
    let dist = a_star.dist.mix_toward_zero(keep)?;
    Action::new(dist, S::zero())
}

/// Guarantee of the variant's second-period closed form, used when only the
/// value is needed.
pub fn variant_guarantee<S: Scalar>(
    variant: crate::domain::Variant,
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    a1: &Action<S>,
    known: &Technology<S>,
    tols: &Tolerances<S>,
) -> Result<S> {
    use crate::domain::Variant;
    match variant {
        Variant::Baseline | Variant::General => {
            let modified = modified_margin(grid, w1, a1, known, tols)?;
            let (static_value, _) = static_margin(grid, a1, known)?;
            let margin = match modified {
                Some((v, _)) => v.max(static_value),
                None => static_value,
            };
            Ok(margin * margin)
        }
        Variant::Advances => {
            let (margin, _) = static_margin(grid, a1, known)?;
            Ok(margin * margin)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::is_compatible;
    use crate::domain::{agent_utility, evaluate_contract, Distribution};

    fn grid() -> OutputGrid<f64> {
        OutputGrid::new(vec![0.0, 4000.0]).unwrap()
    }

    fn act(mean: f64, cost: f64) -> Action<f64> {
        Action::with_mean(&grid(), mean, cost).unwrap()
    }

    fn tols() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn a0() -> Action<f64> {
        act(2000.0, 500.0)
    }

    #[test]
    fn repeat_case_on_known_action() {
        let g = grid();
        let w1 = Contract::linear(0.5).unwrap();
        let (margin, case) = margin_baseline(&g, &w1, &a0(), &a0(), &tols()).unwrap();
        assert!((margin - 1000.0_f64.sqrt()).abs() < 1e-12);
        assert_eq!(case, SecondPeriodCase::RepeatW1);
        let report = optimal_contract_baseline(&g, &w1, &a0(), &a0(), &tols()).unwrap();
        assert_eq!(report.contract, w1);
        assert!((report.guarantee - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn blend_case_low_cost_low_output() {
        let g = grid();
        let w1 = Contract::linear(0.5).unwrap();
        let a1p = act(1200.0, 90.0);
        let report = optimal_contract_baseline(&g, &w1, &a1p, &a0(), &tols()).unwrap();
        assert_eq!(report.case, SecondPeriodCase::BlendCompensate);
        assert!((report.margin - (1000.0_f64.sqrt() - 10.0_f64.sqrt())).abs() < 1e-12);
        assert!((report.guarantee - 810.0).abs() < 1e-9);
        // Blend fraction 0.1 on an equal split is an effective share of 55%.
        let payments = evaluate_contract(&report.contract, &g).unwrap();
        assert!((payments[1] - 0.55 * 4000.0).abs() < 1e-9);
        match report.contract {
            Contract::Blend { m, .. } => assert!((m - 0.1).abs() < 1e-12),
            ref other => panic!("expected blend, got {other:?}"),
        }
    }

    #[test]
    fn linear_observed_case_high_output() {
        let g = grid();
        let w1 = Contract::linear(0.5).unwrap();
        let a1 = act(4000.0, 250.0);
        let report = optimal_contract_baseline(&g, &w1, &a1, &a0(), &tols()).unwrap();
        assert_eq!(report.case, SecondPeriodCase::LinearObserved);
        assert!((report.margin - (4000.0_f64.sqrt() - 250.0_f64.sqrt())).abs() < 1e-12);
        assert!((report.guarantee - 2250.0).abs() < 1e-9);
        assert_eq!(report.contract, Contract::linear(0.25).unwrap());
    }

    #[test]
    fn linear_known_case_under_generous_contract() {
        let g = grid();
        let w1 = Contract::linear(0.9).unwrap();
        let report = optimal_contract_baseline(&g, &w1, &a0(), &a0(), &tols()).unwrap();
        assert_eq!(report.case, SecondPeriodCase::LinearKnown);
        assert_eq!(report.contract, Contract::linear(0.5).unwrap());
        assert!((report.guarantee - 500.0).abs() < 1e-9);
    }

    #[test]
    fn null_observation_under_zero_share() {
        // Observing the null action is only rational when the first contract
        // pays nothing; the guarantee then equals the optimal static value
        // and the achieving payments are a half share of output.
        let g = grid();
        let w1 = Contract::linear(0.0).unwrap();
        let null = Action::null(&g);
        let report = optimal_contract_baseline(&g, &w1, &null, &a0(), &tols()).unwrap();
        assert!((report.guarantee - 500.0).abs() < 1e-9);
        let payments = evaluate_contract(&report.contract, &g).unwrap();
        let half = evaluate_contract(&Contract::linear(0.5).unwrap(), &g).unwrap();
        for (p, h) in payments.iter().zip(&half) {
            assert!((p - h).abs() < 1e-9);
        }
    }

    #[test]
    fn irrational_observation_rejected() {
        let g = grid();
        let w1 = Contract::linear(0.5).unwrap();
        let null = Action::null(&g);
        let err = optimal_contract_baseline(&g, &w1, &null, &a0(), &tols()).unwrap_err();
        assert!(matches!(err, Error::IncompatibleObservation(_)));
    }

    #[test]
    fn modified_margin_singleton_matches_pair_terms() {
        let g = grid();
        let w1 = Contract::linear(0.5).unwrap();
        let a1p = act(1200.0, 90.0);
        let known = Technology::new(vec![a0()]).unwrap();
        let (value, attaining) = modified_margin(&g, &w1, &a1p, &known, &tols())
            .unwrap()
            .unwrap();
        let t1 = 600.0_f64.sqrt();
        let t2 = 1000.0_f64.sqrt() - 10.0_f64.sqrt();
        assert!((value - t1.max(t2)).abs() < 1e-12);
        assert_eq!(attaining, a0());
    }

    #[test]
    fn modified_margin_enumerates_known_actions() {
        let g = grid();
        let w1 = Contract::linear(0.5).unwrap();
        let known = Technology::new(vec![a0(), act(1500.0, 100.0)]).unwrap();

        // Observing the known action with the smaller payoff is irrational.
        let err = modified_margin(&g, &w1, &a0(), &known, &tols()).unwrap_err();
        assert!(matches!(err, Error::IncompatibleObservation(_)));

        // Observing the better known action enumerates all three terms.
        let a1 = act(1500.0, 100.0);
        let (value, attaining) = modified_margin(&g, &w1, &a1, &known, &tols())
            .unwrap()
            .unwrap();
        let self_term = 750.0_f64.sqrt();
        let other_term = 1000.0_f64.sqrt() - 150.0_f64.sqrt();
        assert!((value - self_term.max(other_term)).abs() < 1e-12);
        assert_eq!(attaining, a1);
    }

    #[test]
    fn static_margin_examples() {
        let g = grid();
        let known = Technology::new(vec![a0()]).unwrap();
        let a1 = act(4000.0, 250.0);
        let (v, attaining) = static_margin(&g, &a1, &known).unwrap();
        assert!((v - (4000.0_f64.sqrt() - 250.0_f64.sqrt())).abs() < 1e-12);
        assert_eq!(attaining, a1);

        let null = Action::null(&g);
        let (v, attaining) = static_margin(&g, &null, &known).unwrap();
        assert!((v - (2000.0_f64.sqrt() - 500.0_f64.sqrt())).abs() < 1e-12);
        assert_eq!(attaining, a0());

        let known2 = Technology::new(vec![a0(), act(1200.0, 90.0)]).unwrap();
        let (v, attaining) = static_margin(&g, &null, &known2).unwrap();
        assert!((v - (1200.0_f64.sqrt() - 90.0_f64.sqrt())).abs() < 1e-12);
        assert_eq!(attaining, act(1200.0, 90.0));
    }

    #[test]
    fn advances_guarantee_examples() {
        let g = grid();
        let known = Technology::new(vec![a0()]).unwrap();
        let report = advances_guarantee(&g, &act(4000.0, 250.0), &known).unwrap();
        assert!((report.guarantee - 2250.0).abs() < 1e-9);
        assert_eq!(report.case, SecondPeriodCase::LinearStatic);
        assert_eq!(report.contract, Contract::linear(0.25).unwrap());

        let report = advances_guarantee(&g, &Action::null(&g), &known).unwrap();
        assert!((report.guarantee - 500.0).abs() < 1e-9);
        assert_eq!(report.contract, Contract::linear(0.5).unwrap());
    }

    #[test]
    fn witness_repeat_is_minimal() {
        let g = grid();
        let w1 = Contract::linear(0.5).unwrap();
        let known = Technology::new(vec![a0()]).unwrap();
        let witness =
            worst_case_witness(&g, &w1, &a0(), &known, SecondPeriodCase::RepeatW1, &tols())
                .unwrap();
        assert_eq!(witness.len(), 2);
    }

    #[test]
    fn witness_linear_known_dilutes_by_half() {
        let g = grid();
        let w1 = Contract::linear(0.9).unwrap();
        let known = Technology::new(vec![a0()]).unwrap();
        let witness =
            worst_case_witness(&g, &w1, &a0(), &known, SecondPeriodCase::LinearKnown, &tols())
                .unwrap();
        let deviation = &witness.actions()[2];
        assert_eq!(deviation.cost, 0.0);
        // keep = 1 - sqrt(500/2000) = 0.5, so the high-output weight halves.
        assert!((deviation.dist.weights()[1] - 0.25).abs() < 1e-12);
        assert!((deviation.mean(&g).unwrap() - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn witness_blend_matches_construction() {
        let g = grid();
        let w1 = Contract::linear(0.5).unwrap();
        let a1p = act(1200.0, 90.0);
        let known = Technology::new(vec![a0()]).unwrap();
        let witness = worst_case_witness(
            &g,
            &w1,
            &a1p,
            &known,
            SecondPeriodCase::BlendCompensate,
            &tols(),
        )
        .unwrap();
        let deviation = &witness.actions()[2];
        // cost = c0 - (m * E_F0[w1] + gap) = 500 - (0.1 * 1000 + 10) = 390.
        assert!((deviation.cost - 390.0).abs() < 1e-9);
        // distribution = 0.9 F0 + 0.1 point mass at zero.
        assert!((deviation.dist.weights()[1] - 0.45).abs() < 1e-12);
        // The deviation leaves agent 1 exactly indifferent to the observed
        // action, so the witness is compatible.
        let u_dev = agent_utility(&g, &w1, deviation).unwrap();
        let u_obs = agent_utility(&g, &w1, &a1p).unwrap();
        assert!((u_dev - u_obs).abs() < 1e-9);
        assert!(is_compatible(&g, &witness, &w1, &a1p, &known, tols().tie).unwrap());
    }

    #[test]
    fn report_invariants() {
        let g = grid();
        let w1 = Contract::linear(0.5).unwrap();
        for a1 in [a0(), act(1200.0, 90.0), act(4000.0, 250.0)] {
            let report = optimal_contract_baseline(&g, &w1, &a1, &a0(), &tols()).unwrap();
            assert_eq!(report.guarantee, report.margin * report.margin);
            assert!(report.margin >= 0.0);
            assert!(evaluate_contract(&report.contract, &g).is_ok());
            let known = Technology::new(vec![a0()]).unwrap();
            assert!(is_compatible(&g, &report.witness, &w1, &a1, &known, tols().tie).unwrap());
            // Dominance over repetition.
            let repeat = principal_payoff(&g, &w1, &a1).unwrap();
            assert!(report.guarantee >= repeat - 1e-12);
        }
    }

    #[test]
    fn specialization_of_general_to_baseline() {
        let g = grid();
        let known = Technology::new(vec![a0()]).unwrap();
        for w1 in [
            Contract::linear(0.5).unwrap(),
            Contract::linear(0.9).unwrap(),
            Contract::tabulated(vec![0.0, 1300.0]).unwrap(),
        ] {
            for a1 in [a0(), act(1200.0, 90.0), act(4000.0, 250.0)] {
                let b = optimal_contract_baseline(&g, &w1, &a1, &a0(), &tols());
                let gnl = optimal_contract_general(&g, &w1, &a1, &known, &tols());
                match (b, gnl) {
                    (Ok(b), Ok(gnl)) => {
                        assert_eq!(b.guarantee, gnl.guarantee);
                        assert_eq!(b.contract, gnl.contract);
                        assert_eq!(b.attaining_action, gnl.attaining_action);
                    }
                    (Err(Error::IncompatibleObservation(_)), Err(Error::IncompatibleObservation(_))) => {}
                    (b, gnl) => panic!("mismatched outcomes: {b:?} vs {gnl:?}"),
                }
            }
        }
    }

    #[test]
    fn static_margin_ignores_weak_additions() {
        let g = grid();
        let known = Technology::new(vec![a0()]).unwrap();
        let a1 = act(4000.0, 250.0);
        let (before, _) = static_margin(&g, &a1, &known).unwrap();
        // sqrt(900) - sqrt(100) = 20 < before.
        let weak = act(900.0, 100.0);
        let bigger = known.extended([weak]);
        let (after, _) = static_margin(&g, &a1, &bigger).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn nonlinear_first_contract_propagates() {
        let g = OutputGrid::new(vec![0.0, 1000.0, 4000.0]).unwrap();
        // Payments far from proportional to output.
        let w1 = Contract::tabulated(vec![0.0, 900.0, 1000.0]).unwrap();
        let weights = Distribution::new(vec![0.2, 0.4, 0.4]).unwrap();
        let a0 = Action::new(weights, 300.0).unwrap();
        let report = optimal_contract_baseline(&g, &w1, &a0, &a0, &tols()).unwrap();
        assert!(matches!(
            report.case,
            SecondPeriodCase::RepeatW1 | SecondPeriodCase::BlendCompensate
        ));
        let payments = evaluate_contract(&report.contract, &g).unwrap();
        let ratios: Vec<f64> = payments
            .iter()
            .zip(g.levels())
            .skip(1)
            .map(|(p, y)| p / y)
            .collect();
        let spread = ratios.iter().cloned().fold(f64::MIN, f64::max)
            - ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 1e-6, "expected nonlinear payments, spread {spread}");
    }
}
