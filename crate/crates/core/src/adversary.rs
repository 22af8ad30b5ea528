//! Brute-force adversary oracle.
//!
//! Searches technologies consistent with an observation for the one that
//! hurts the principal most, independently of the closed forms. Candidate
//! deviations are mixtures of existing distributions with a point mass at
//! zero output plus explicitly constructed tight deviations; the appendix-
//! style constructions make the oracle attain the closed-form values, while
//! the grids guard against implementation drift.
//!
//! Worst-case values are infima. An exactly indifferent deviation achieves
//! its value only as a limit of strict perturbations, and a perturbation is
//! admissible only if it keeps the technology compatible with the first-
//! period observation. Technology evaluation therefore starts from the
//! principal-favored best response and additionally minimizes over tied
//! actions that admit a compatible strict perturbation: those with slack in
//! the observation cap, or those paying more in expectation under the new
//! contract than under the old one (the blend direction).

use crate::agent::{best_response, is_compatible};
use crate::domain::{
    agent_utility, expectation, principal_payoff, Action, Contract, Distribution, OutputGrid,
    Technology, Tolerances, Variant,
};
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::search::minimize_nested;
use crate::second_period::{blend_deviation, static_deviation, SecondPeriodReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Family of candidate worst-case deviation actions.
#[derive(Debug, Clone)]
pub struct DeviationFamily<S> {
    /// Distributions whose zero-output mixtures are searched.
    pub bases: Vec<Distribution<S>>,
    /// Mixture weights in `[0, 1]`.
    pub lambda_grid: Vec<S>,
    /// Candidate deviation costs.
    pub cost_grid: Vec<S>,
    /// Add the exactly tight constructed deviations.
    pub include_constructed: bool,
    /// Enforce the observation cap. Disabling it turns the oracle into the
    /// plain single-period worst case over technologies containing the pool.
    pub compatibility_cap: bool,
}

impl<S: Scalar> DeviationFamily<S> {
    /// Default family: 101-point mixture and cost grids, the cost grid
    /// spanning `[0, 1.5 * max known cost]`, constructed deviations on.
    pub fn standard(
        grid: &OutputGrid<S>,
        known: &Technology<S>,
        observed: Option<&Action<S>>,
    ) -> Self {
        let mut bases: Vec<Distribution<S>> =
            known.actions().iter().map(|a| a.dist.clone()).collect();
        if let Some(a) = observed {
            bases.push(a.dist.clone());
        }
        bases.push(Distribution::point_mass_at_max(grid));

        let n = 101;
        let lambda_grid = linspace(S::zero(), S::one(), n);
        let max_cost = known
            .actions()
            .iter()
            .map(|a| a.cost)
            .fold(S::zero(), |a, b| a.max(b));
        let cost_grid = if max_cost > S::zero() {
            linspace(S::zero(), max_cost * lit(1.5), n)
        } else {
            vec![S::zero()]
        };
        DeviationFamily {
            bases,
            lambda_grid,
            cost_grid,
            include_constructed: true,
            compatibility_cap: true,
        }
    }
}

fn linspace<S: Scalar>(lo: S, hi: S, n: usize) -> Vec<S> {
    let step = (hi - lo) / S::from_usize(n - 1).unwrap();
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + step * S::from_usize(i).unwrap()
            }
        })
        .collect()
}

/// Worst-case principal payoff of `w2` under a fixed technology, with the
/// tie semantics described in the module docs. `cap` carries the observation
/// `(w1, a1)` whose compatibility limits the adversary's perturbations; pass
/// `None` when no cap applies (technological advances, or the cap-free
/// static benchmark).
pub fn technology_value<S: Scalar>(
    grid: &OutputGrid<S>,
    w2: &Contract<S>,
    cap: Option<(&Contract<S>, &Action<S>)>,
    tech: &Technology<S>,
    tols: &Tolerances<S>,
) -> Result<S> {
    let br = best_response(grid, w2, tech, tols.tie)?;
    let mut value = br.principal_value();
    let w2_payments = w2.payments(grid)?;
    let cap_data = match cap {
        Some((w1, a1)) => Some((w1.payments(grid)?, agent_utility(grid, w1, a1)?)),
        None => None,
    };
    for &i in &br.argmax {
        let action = &tech.actions()[i];
        let qualified = match &cap_data {
            None => true,
            Some((w1_payments, cap_utility)) => {
                let u1 = expectation(&action.dist, w1_payments)? - action.cost;
                u1 <= *cap_utility - tols.tie || {
                    let e_w2 = expectation(&action.dist, &w2_payments)?;
                    let e_w1 = expectation(&action.dist, w1_payments)?;
                    e_w2 >= e_w1 + tols.tie
                }
            }
        };
        if qualified {
            value = value.min(br.payoffs[i]);
        }
    }
    Ok(value)
}

/// Empirical second-period worst case of offering `w2` after observing `a1`
/// under `w1`: the minimum over family technologies of [`technology_value`],
/// with the worst technology as witness.
pub fn empirical_second_guarantee<S: Scalar>(
    grid: &OutputGrid<S>,
    w2: &Contract<S>,
    w1: &Contract<S>,
    a1: &Action<S>,
    known: &Technology<S>,
    family: &DeviationFamily<S>,
    tols: &Tolerances<S>,
) -> Result<(S, Technology<S>)> {
    if family.compatibility_cap {
        let u1 = agent_utility(grid, w1, a1)?;
        for k in known.actions() {
            if agent_utility(grid, w1, k)? > u1 + tols.tie {
                return Err(Error::IncompatibleObservation(
                    "a known action pays the first agent strictly more than the observed one",
                ));
            }
        }
    }
    let cap = if family.compatibility_cap {
        Some((w1, a1))
    } else {
        None
    };
    let base_tech = known.extended([a1.clone()]);
    let mut best_value = technology_value(grid, w2, cap, &base_tech, tols)?;
    let mut witness = base_tech.clone();

    let consider = |deviation: Action<S>,
                    best_value: &mut S,
                    witness: &mut Technology<S>|
     -> Result<()> {
        let tech = base_tech.extended([deviation]);
        if family.compatibility_cap
            && !is_compatible(grid, &tech, w1, a1, known, tols.tie)?
        {
            return Ok(());
        }
        let v = technology_value(grid, w2, cap, &tech, tols)?;
        if v < *best_value {
            *best_value = v;
            *witness = tech;
        }
        Ok(())
    };

    for base in &family.bases {
        for &keep in &family.lambda_grid {
            let dist = base.mix_toward_zero(keep)?;
            for &cost in &family.cost_grid {
                consider(Action::new(dist.clone(), cost)?, &mut best_value, &mut witness)?;
            }
        }
    }
    if family.include_constructed {
        for d in constructed_deviations(grid, w2, w1, a1, known, tols)? {
            consider(d, &mut best_value, &mut witness)?;
        }
    }
    Ok((best_value, witness))
}

/// Exactly tight deviations: the closed-form witness constructions plus the
/// contract-specific dilutions used to bound arbitrary second contracts.
fn constructed_deviations<S: Scalar>(
    grid: &OutputGrid<S>,
    w2: &Contract<S>,
    w1: &Contract<S>,
    a1: &Action<S>,
    known: &Technology<S>,
    tols: &Tolerances<S>,
) -> Result<Vec<Action<S>>> {
    let mut out = Vec::new();
    let u1 = agent_utility(grid, w1, a1)?;
    let w2_payments = w2.payments(grid)?;
    let pool: Vec<&Action<S>> = known.actions().iter().chain(std::iter::once(a1)).collect();

    for a in &pool {
        // Blend-route witness: diluted reference with compensating cost.
        let gap = (u1 - agent_utility(grid, w1, a)?).max(S::zero());
        let residual = principal_payoff(grid, w1, a)?;
        if residual > S::zero() && gap <= residual && gap > S::zero() {
            let m = (gap / residual).sqrt();
            if let Ok(d) = blend_deviation(grid, w1, a1, a, m, tols) {
                out.push(d);
            }
        }
        // Static-route witness: zero-cost dilution by the square-root share.
        let mean = a.mean(grid)?;
        if mean > S::zero() && a.cost <= mean {
            if let Ok(d) = static_deviation(grid, a) {
                out.push(d);
            }
        }
        // Dilution keyed to the offered contract: exactly absorbs the cost.
        let e_w2 = expectation(&a.dist, &w2_payments)?;
        if e_w2 > S::zero() && a.cost <= e_w2 {
            let keep = S::one() - a.cost / e_w2;
            out.push(Action::new(a.dist.mix_toward_zero(keep)?, S::zero())?);
        }
    }

    // Costly dilution of agent 2's default pick, tight for contracts paying
    // more than the first one did.
    let base_tech = known.extended([a1.clone()]);
    let br = best_response(grid, w2, &base_tech, tols.tie)?;
    let picked = &base_tech.actions()[br.chosen];
    let e_w1 = expectation(&picked.dist, &w1.payments(grid)?)?;
    let e_w2 = expectation(&picked.dist, &w2_payments)?;
    let denom = e_w2 - e_w1;
    if denom > tols.validation {
        let keep = ((e_w2 - picked.cost) - u1) / denom;
        let cost = (e_w1 * (e_w2 - picked.cost) - e_w2 * u1) / denom;
        if keep >= S::zero() && keep <= S::one() && cost >= S::zero() {
            out.push(Action::new(picked.dist.mix_toward_zero(keep)?, cost)?);
        }
    }
    Ok(out)
}

/// Empirical overall guarantee of a first-period contract: the worst interim
/// guarantee over candidate observations the first agent could rationally
/// make, using the variant's closed-form second-period value.
///
/// Candidates sweep the family's mixture grid and are then refined
/// continuously in (mixture weight, cost) per base, so on linear contracts
/// the result matches the corresponding program value.
pub fn empirical_overall_guarantee<S: Scalar>(
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    known: &Technology<S>,
    beta: S,
    variant: Variant,
    family: &DeviationFamily<S>,
    tols: &Tolerances<S>,
) -> Result<(S, Action<S>)> {
    let w1_payments = w1.payments(grid)?;
    let mut floor = S::zero();
    for k in known.actions() {
        floor = floor.max(agent_utility(grid, w1, k)?);
    }

    let interim = |candidate: &Action<S>| -> Result<S> {
        let v2 = crate::second_period::variant_guarantee(variant, grid, w1, candidate, known, tols)?;
        Ok(principal_payoff(grid, w1, candidate)? + beta * v2)
    };

    let mut best: Option<(S, Action<S>)> = None;
    let scan = family.lambda_grid.len().max(201);
    for base in &family.bases {
        let e_pay = expectation(base, &w1_payments)?;
        // Feasible candidates need utility at least the known floor:
        // keep * e_pay - cost >= floor.
        let z_range = |keep: S| -> Option<(S, S)> {
            let c_max = keep * e_pay - floor;
            if c_max < S::zero() {
                None
            } else {
                Some((S::zero(), c_max))
            }
        };
        let objective = |keep: S, cost: S| -> S {
            let dist = match base.mix_toward_zero(keep) {
                Ok(d) => d,
                Err(_) => return S::infinity(),
            };
            match Action::new(dist, cost.max(S::zero())).and_then(|a| interim(&a)) {
                Ok(v) => v,
                Err(_) => S::infinity(),
            }
        };
        if let Some((value, keep, cost)) =
            minimize_nested(S::zero(), S::one(), z_range, objective, scan)
        {
            if best.as_ref().is_none_or(|(bv, _)| value < *bv) {
                let action = Action::new(base.mix_toward_zero(keep)?, cost.max(S::zero()))?;
                best = Some((value, action));
            }
        }
    }
    best.ok_or(Error::Internal("no feasible observation candidate"))
}

/// Checks that a second-period report's witness is compatible and that the
/// reported contract earns exactly the reported guarantee on it.
///
/// Pass `w1 = None` for advances-variant reports, where no observation cap
/// constrains the witness.
pub fn verify_tightness<S: Scalar>(
    grid: &OutputGrid<S>,
    report: &SecondPeriodReport<S>,
    w1: Option<&Contract<S>>,
    a1: &Action<S>,
    known: &Technology<S>,
    tols: &Tolerances<S>,
) -> Result<bool> {
    let cap = w1.map(|w| (w, a1));
    if let Some((w, _)) = cap {
        if !is_compatible(grid, &report.witness, w, a1, known, tols.tie)? {
            return Ok(false);
        }
    } else {
        if !report.witness.contains(a1) {
            return Ok(false);
        }
        for k in known.actions() {
            if !report.witness.contains(k) {
                return Ok(false);
            }
        }
    }
    let v = technology_value(grid, &report.contract, cap, &report.witness, tols)?;
    Ok((v - report.guarantee).abs() <= tols.closed_form)
}

/// A randomly generated small model instance for the verification suites:
/// a grid of 2 to 5 levels, 1 to 3 profitable known actions, a first-period
/// contract and a rational observation.
#[derive(Debug, Clone)]
pub struct SampledInstance<S> {
    pub grid: OutputGrid<S>,
    pub known: Technology<S>,
    pub w1: Contract<S>,
    pub a1: Action<S>,
}

/// Deterministic pseudorandom instances. Costs stay between 2% and 60% of
/// each action's expected output so every known action is profitable, and
/// observations are built rational by cutting their cost to the known floor.
pub fn sample_instances<S: Scalar>(count: usize, seed: u64) -> Vec<SampledInstance<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sample_instance(&mut rng)).collect()
}

fn sample_instance<S: Scalar>(rng: &mut ChaCha8Rng) -> SampledInstance<S> {
    let grid = loop {
        let n = rng.gen_range(2..=5usize);
        let mut levels = vec![0.0f64];
        for _ in 1..n {
            levels.push((rng.gen_range(2.0..40.0f64) * 100.0).round());
        }
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup();
        if levels.len() >= 2 {
            break OutputGrid::new(levels.into_iter().map(lit).collect()).unwrap();
        }
    };

    let random_dist = |rng: &mut ChaCha8Rng| {
        let raw: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        Distribution::new(raw.iter().map(|x| lit(x / sum)).collect()).unwrap()
    };

    let known = {
        let count = rng.gen_range(1..=3usize);
        let actions: Vec<Action<S>> = (0..count)
            .map(|_| {
                let dist = random_dist(rng);
                let mean = expectation(&dist, grid.levels()).unwrap();
                let cost = mean * lit(rng.gen_range(0.02..0.6));
                Action::new(dist, cost).unwrap()
            })
            .collect();
        Technology::new(actions).unwrap()
    };

    let w1 = if rng.gen_bool(0.5) {
        Contract::linear(lit(rng.gen_range(0.05..0.95))).unwrap()
    } else {
        let payments: Vec<S> = grid
            .levels()
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                if i == 0 {
                    S::zero()
                } else {
                    lit::<S>(rng.gen::<f64>()) * y
                }
            })
            .collect();
        Contract::tabulated(payments).unwrap()
    };

    let floor = known
        .actions()
        .iter()
        .map(|k| agent_utility(&grid, &w1, k).unwrap())
        .fold(S::neg_infinity(), |a, b| a.max(b));
    let a1 = if rng.gen_bool(0.34) {
        known
            .actions()
            .iter()
            .max_by(|a, b| {
                agent_utility(&grid, &w1, a)
                    .unwrap()
                    .partial_cmp(&agent_utility(&grid, &w1, b).unwrap())
                    .unwrap()
            })
            .unwrap()
            .clone()
    } else {
        loop {
            let dist = random_dist(rng);
            let payments = w1.payments(&grid).unwrap();
            let payment = expectation(&dist, &payments).unwrap();
            let slack = payment - floor;
            if slack < S::zero() {
                continue;
            }
            let cost = slack * lit(rng.gen_range(0.0..1.0));
            break Action::new(dist, cost).unwrap();
        }
    };
    SampledInstance { grid, known, w1, a1 }
}

/// Deterministic pseudorandom tabulated contracts with `w(0) = 0`,
/// `0 <= w(y) <= y` and at least one strict nonlinearity.
pub fn sample_nonlinear_contracts<S: Scalar>(
    grid: &OutputGrid<S>,
    count: usize,
    seed: u64,
) -> Vec<Contract<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let payments: Vec<S> = grid
            .levels()
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                if i == 0 {
                    S::zero()
                } else {
                    lit::<S>(rng.gen::<f64>()) * y
                }
            })
            .collect();
        let ratios: Vec<S> = payments
            .iter()
            .zip(grid.levels())
            .skip(1)
            .map(|(&p, &y)| p / y)
            .collect();
        let spread = ratios.iter().fold(S::neg_infinity(), |a, &b| a.max(b))
            - ratios.iter().fold(S::infinity(), |a, &b| a.min(b));
        if grid.len() > 2 && spread < lit(1e-3) {
            continue;
        }
        out.push(Contract::tabulated(payments).expect("sampled payments are valid"));
    }
    out
}
