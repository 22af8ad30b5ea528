//! First-period analysis: linearization of arbitrary contracts, the minimax
//! programs characterizing the overall guarantee of a linear share, and the
//! search for the optimal share.
//!
//! For a linear first-period contract the worst case over technologies
//! reduces to a two-variable program over the observed action's expected
//! output and cost. The objective is the first-period payoff plus the
//! discounted squared second-period margin; the constraint says the observed
//! action must beat every known action (and quitting) for the first agent.
//! The three variants differ only in which margin terms enter and in the
//! box bounding the search.

use crate::domain::{
    expectation, Action, Contract, OutputGrid, Technology, Variant,
};
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::search::{golden_min, minimize_nested};

/// Minimizer of a guarantee program.
///
/// In the baseline program `x` and `z` are the observed action's expected
/// output and cost in units of the known action's expected output, and `h`
/// is the incentive-gap value pinned by the constraint. In the general and
/// advances programs `x` and `z` are raw and `h` is absent.
#[derive(Debug, Clone, Copy)]
pub struct ProgramPoint<S> {
    pub x: S,
    pub z: S,
    pub h: Option<S>,
}

/// A sweep of the overall guarantee across first-period shares.
#[derive(Debug, Clone)]
pub struct GuaranteeCurve<S> {
    shares: Vec<S>,
    values: Vec<S>,
    minimizers: Vec<ProgramPoint<S>>,
}

impl<S: Scalar> GuaranteeCurve<S> {
    fn new(shares: Vec<S>, values: Vec<S>, minimizers: Vec<ProgramPoint<S>>) -> Result<Self> {
        if shares.len() != values.len() || shares.len() != minimizers.len() {
            return Err(Error::Internal("curve columns have unequal lengths"));
        }
        if shares.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Internal("curve shares must strictly increase"));
        }
        Ok(GuaranteeCurve {
            shares,
            values,
            minimizers,
        })
    }

    pub fn shares(&self) -> &[S] {
        &self.shares
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn minimizers(&self) -> &[ProgramPoint<S>] {
        &self.minimizers
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }
}

/// Knobs for the program solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverParams {
    /// Points in the outer scan over expected output.
    pub scan_points: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { scan_points: 401 }
    }
}

/// Result of linearizing a contract against a reference action.
#[derive(Debug, Clone)]
pub struct LinearizeOutcome<S> {
    pub contract: Contract<S>,
    pub share: S,
    /// Set when the expected payment exceeds the expected output, which makes
    /// the constructed share exceed one. The share is reported as-is.
    pub share_above_one: bool,
}

/// Linear contract paying the same expected amount as `w1` under the
/// reference action's distribution: share `E_F0[w1] / E_F0[y]`.
///
/// The reference agent's payoff is unchanged, and the overall guarantee of
/// the result weakly improves on the original.
pub fn linearize<S: Scalar>(
    grid: &OutputGrid<S>,
    w1: &Contract<S>,
    a0: &Action<S>,
) -> Result<LinearizeOutcome<S>> {
    if let Contract::Linear { share } = w1 {
        return Ok(LinearizeOutcome {
            contract: w1.clone(),
            share: *share,
            share_above_one: *share > S::one(),
        });
    }
    let mean = a0.mean(grid)?;
    if mean <= S::zero() {
        return Err(Error::InvalidArgument(
            "linearization needs a reference action with positive expected output",
        ));
    }
    let payments = w1.payments(grid)?;
    let share = expectation(&a0.dist, &payments)? / mean;
    Ok(LinearizeOutcome {
        contract: Contract::linear_unchecked(share),
        share,
        share_above_one: share > S::one(),
    })
}

/// The single-period robustly optimal linear share `sqrt(c0 / E_F0[y])`.
pub fn static_share<S: Scalar>(grid: &OutputGrid<S>, a0: &Action<S>) -> Result<S> {
    let mean = a0.mean(grid)?;
    if mean <= S::zero() {
        return Err(Error::InvalidArgument(
            "static share needs positive expected output",
        ));
    }
    Ok((a0.cost / mean).sqrt())
}

/// Worst-case single-period payoff of the linear share `s` against the known
/// technology: the agent picks anything at least as good as his best known
/// payoff, so the principal keeps `(1 - s) / s` times that payoff.
pub fn static_linear_guarantee<S: Scalar>(
    grid: &OutputGrid<S>,
    known: &Technology<S>,
    share: S,
) -> Result<S> {
    if share <= S::zero() || share > S::one() {
        return Err(Error::ShareOutOfRange {
            share: share.to_f64().unwrap_or(f64::NAN),
            lo: 0.0,
            hi: 1.0,
        });
    }
    let mut best = S::zero();
    for a in known.actions() {
        best = best.max(share * a.mean(grid)? - a.cost);
    }
    Ok((S::one() - share) / share * best)
}

/// Admissible share interval of the variant.
pub fn admissible_interval<S: Scalar>(
    variant: Variant,
    grid: &OutputGrid<S>,
    known: &Technology<S>,
) -> Result<(S, S)> {
    match variant {
        Variant::Baseline => {
            let a0 = singleton(known)?;
            let s0 = static_share(grid, a0)?;
            Ok((s0 * s0, S::one()))
        }
        Variant::General | Variant::Advances => Ok((S::zero(), S::one())),
    }
}

fn singleton<S: Scalar>(known: &Technology<S>) -> Result<&Action<S>> {
    if known.len() != 1 {
        return Err(Error::InvalidArgument(
            "the baseline variant takes exactly one known action",
        ));
    }
    Ok(&known.actions()[0])
}

fn check_share<S: Scalar>(s1: S, lo: S, hi: S) -> Result<()> {
    if !s1.is_finite() || s1 < lo - lit(1e-12) || s1 > hi + lit(1e-12) {
        return Err(Error::ShareOutOfRange {
            share: s1.to_f64().unwrap_or(f64::NAN),
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Overall payoff guarantee of the linear share `s1` in the baseline model.
///
/// Solved in units of the known action's expected output: minimize
/// `(1 - s1) x + beta * margin^2` subject to
/// `h = s1 x - z - (s1 - s0^2) >= 0`, where the margin is the best of
/// `sqrt((1 - s1) x)`, `sqrt(1 - s1) - sqrt(h)`, `1 - s0` and
/// `sqrt(x) - sqrt(z)`. The returned value is rescaled to output units.
pub fn overall_guarantee_baseline<S: Scalar>(
    grid: &OutputGrid<S>,
    a0: &Action<S>,
    beta: S,
    s1: S,
    params: &SolverParams,
) -> Result<(S, ProgramPoint<S>)> {
    let e0 = a0.mean(grid)?;
    if e0 - a0.cost <= S::zero() {
        return Err(Error::NoProfitableAction);
    }
    let s0 = static_share(grid, a0)?;
    let s0sq = s0 * s0;
    check_share(s1, s0sq, S::one())?;
    let s1 = s1.min(S::one()).max(s0sq);
    let k = s1 - s0sq;

    // E_F1[y] cannot exceed the top grid level, and values beyond 1 + beta
    // never improve on the known action's point.
    let x_cap = (S::one() + beta).min(grid.max_level() / e0);
    let x_lo = (k / s1).min(x_cap);

    let zero = S::zero();
    let objective = |x: S, z: S| -> S {
        let h = (s1 * x - z - k).max(zero);
        let one_minus = S::one() - s1;
        let t1 = (one_minus * x).sqrt();
        let t2 = one_minus.sqrt() - h.sqrt();
        let t3 = S::one() - s0;
        let t4 = x.sqrt() - z.sqrt();
        let margin = t1.max(t2).max(t3).max(t4);
        one_minus * x + beta * margin * margin
    };
    let z_range = |x: S| -> Option<(S, S)> {
        let z_max = s1 * x - k;
        if z_max < zero {
            None
        } else {
            Some((zero, z_max))
        }
    };

    let (value, x, z) = minimize_nested(x_lo, x_cap, z_range, objective, params.scan_points)
        .ok_or(Error::Internal("baseline program has no feasible point"))?;
    let h = (s1 * x - z - k).max(zero);
    Ok((
        value * e0,
        ProgramPoint {
            x,
            z,
            h: Some(h),
        },
    ))
}

/// Program data shared by the general and advances variants.
struct KnownSummary<S> {
    means_costs: Vec<(S, S)>,
    x_bar: S,
    static_best: S,
}

fn summarize<S: Scalar>(grid: &OutputGrid<S>, known: &Technology<S>) -> Result<KnownSummary<S>> {
    let mut means_costs = Vec::with_capacity(known.len());
    let mut x_bar = S::zero();
    let mut static_best = S::zero();
    let mut profitable = false;
    for a in known.actions() {
        let mean = a.mean(grid)?;
        x_bar = x_bar.max(mean);
        static_best = static_best.max(mean.sqrt() - a.cost.sqrt());
        if mean - a.cost > S::zero() {
            profitable = true;
        }
        means_costs.push((mean, a.cost));
    }
    if !profitable {
        return Err(Error::NoProfitableAction);
    }
    Ok(KnownSummary {
        means_costs,
        x_bar,
        static_best,
    })
}

/// Best first-period payoff the agent can secure from known actions or
/// quitting, under the linear share `s1`.
fn known_floor<S: Scalar>(summary: &KnownSummary<S>, s1: S) -> S {
    summary
        .means_costs
        .iter()
        .fold(S::zero(), |acc, &(mean, cost)| acc.max(s1 * mean - cost))
}

/// Overall payoff guarantee of the linear share `s1` with a general known
/// set: minimize `(1 - s1) x + beta * max(margin_modified, margin_static)^2`
/// over observed (expected output, cost) pairs that beat every known action
/// and quitting.
pub fn overall_guarantee_general<S: Scalar>(
    grid: &OutputGrid<S>,
    known: &Technology<S>,
    beta: S,
    s1: S,
    params: &SolverParams,
) -> Result<(S, ProgramPoint<S>)> {
    check_share(s1, S::zero(), S::one())?;
    let s1 = s1.min(S::one()).max(S::zero());
    let summary = summarize(grid, known)?;
    let floor = known_floor(&summary, s1);
    let x_cap = ((S::one() + beta) * summary.x_bar).min(grid.max_level());

    let zero = S::zero();
    let one_minus = S::one() - s1;
    let objective = |x: S, z: S| -> S {
        let secured = s1 * x - z;
        let mut modified = (one_minus * x).sqrt();
        for &(mean, cost) in &summary.means_costs {
            let gap = (secured - (s1 * mean - cost)).max(zero);
            modified = modified.max((one_minus * mean).sqrt() - gap.sqrt());
        }
        let static_margin = (x.sqrt() - z.sqrt()).max(summary.static_best);
        let margin = modified.max(static_margin);
        one_minus * x + beta * margin * margin
    };
    let z_range = |x: S| -> Option<(S, S)> {
        let z_max = s1 * x - floor;
        if z_max < zero {
            None
        } else {
            Some((zero, z_max))
        }
    };
    let x_lo = if s1 > zero {
        (floor / s1).min(x_cap)
    } else if floor > zero {
        return Err(Error::Internal("known floor positive at zero share"));
    } else {
        zero
    };

    let (value, x, z) = minimize_nested(x_lo, x_cap, z_range, objective, params.scan_points)
        .ok_or(Error::Internal("general program has no feasible point"))?;
    Ok((value, ProgramPoint { x, z, h: None }))
}

/// Overall payoff guarantee of the linear share `s1` under technological
/// advances: as the general program, but only the static margin enters the
/// second-period term.
pub fn overall_guarantee_advances<S: Scalar>(
    grid: &OutputGrid<S>,
    known: &Technology<S>,
    beta: S,
    s1: S,
    params: &SolverParams,
) -> Result<(S, ProgramPoint<S>)> {
    check_share(s1, S::zero(), S::one())?;
    let s1 = s1.min(S::one()).max(S::zero());
    let summary = summarize(grid, known)?;
    let floor = known_floor(&summary, s1);
    let x_cap = summary.x_bar.min(grid.max_level());

    let zero = S::zero();
    let one_minus = S::one() - s1;
    let objective = |x: S, z: S| -> S {
        let margin = (x.sqrt() - z.sqrt()).max(summary.static_best);
        one_minus * x + beta * margin * margin
    };
    let z_range = |x: S| -> Option<(S, S)> {
        let z_max = s1 * x - floor;
        if z_max < zero {
            None
        } else {
            Some((zero, z_max))
        }
    };
    let x_lo = if s1 > zero {
        (floor / s1).min(x_cap)
    } else {
        zero
    };

    let (value, x, z) = minimize_nested(x_lo, x_cap, z_range, objective, params.scan_points)
        .ok_or(Error::Internal("advances program has no feasible point"))?;
    Ok((value, ProgramPoint { x, z, h: None }))
}

/// Dispatch on the variant. The baseline variant takes exactly one known
/// action.
pub fn overall_guarantee<S: Scalar>(
    variant: Variant,
    grid: &OutputGrid<S>,
    known: &Technology<S>,
    beta: S,
    s1: S,
    params: &SolverParams,
) -> Result<(S, ProgramPoint<S>)> {
    match variant {
        Variant::Baseline => overall_guarantee_baseline(grid, singleton(known)?, beta, s1, params),
        Variant::General => overall_guarantee_general(grid, known, beta, s1, params),
        Variant::Advances => overall_guarantee_advances(grid, known, beta, s1, params),
    }
}

/// Optimal-share search output.
#[derive(Debug, Clone)]
pub struct OptimalShareReport<S> {
    pub s1_star: S,
    pub u_star: S,
    pub curve: GuaranteeCurve<S>,
    /// Indices of every grid point within the optimizer tolerance of the
    /// maximum. The search refines around the best one but does not assert
    /// uniqueness.
    pub grid_maximizers: Vec<usize>,
    /// Set for the general variant when the known set fails the marginal-cost
    /// bound: the result is optimal among linear contracts, but global
    /// optimality over all contracts is unproven in that regime.
    pub linear_only_caveat: bool,
}

/// Maximizes the variant's overall guarantee over first-period shares by a
/// grid scan plus golden-section refinement (to about 1e-6 in the share).
///
/// `resolution` is the number of curve points and must be at least 100.
pub fn optimal_share<S: Scalar>(
    variant: Variant,
    grid: &OutputGrid<S>,
    known: &Technology<S>,
    beta: S,
    resolution: usize,
    params: &SolverParams,
) -> Result<OptimalShareReport<S>> {
    if resolution < 100 {
        return Err(Error::InvalidArgument(
            "share resolution must be at least 100 points",
        ));
    }
    if !beta.is_finite() || beta < S::zero() {
        return Err(Error::InvalidBeta);
    }
    let (lo, hi) = admissible_interval(variant, grid, known)?;
    let step = (hi - lo) / S::from_usize(resolution - 1).unwrap();
    let mut shares = Vec::with_capacity(resolution);
    let mut values = Vec::with_capacity(resolution);
    let mut minimizers = Vec::with_capacity(resolution);
    for i in 0..resolution {
        let s = if i == resolution - 1 {
            hi
        } else {
            lo + step * S::from_usize(i).unwrap()
        };
        let (value, point) = overall_guarantee(variant, grid, known, beta, s, params)?;
        shares.push(s);
        values.push(value);
        minimizers.push(point);
    }

    let best_idx = (0..resolution)
        .max_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())
        .expect("resolution >= 100");
    let u_max = values[best_idx];
    let opt_tol = crate::domain::Tolerances::<S>::default().optimizer;
    let grid_maximizers: Vec<usize> = (0..resolution)
        .filter(|&i| values[i] >= u_max - opt_tol)
        .collect();

    let bracket_lo = if best_idx == 0 { shares[0] } else { shares[best_idx - 1] };
    let bracket_hi = if best_idx == resolution - 1 {
        shares[resolution - 1]
    } else {
        shares[best_idx + 1]
    };
    let neg_u = |s: S| -> S {
        overall_guarantee(variant, grid, known, beta, s, params)
            .map(|(v, _)| -v)
            .unwrap_or_else(|_| S::infinity())
    };
    let (s_refined, neg_refined) = golden_min(neg_u, bracket_lo, bracket_hi, 60);
    let (s1_star, u_star) = if -neg_refined >= u_max {
        (s_refined, -neg_refined)
    } else {
        (shares[best_idx], u_max)
    };

    Ok(OptimalShareReport {
        s1_star,
        u_star,
        curve: GuaranteeCurve::new(shares, values, minimizers)?,
        grid_maximizers,
        linear_only_caveat: variant == Variant::General
            && !marginal_cost_bound(grid, known)?.holds,
    })
}

/// Outcome of the marginal-cost lower-bound check on a known technology.
#[derive(Debug, Clone)]
pub struct MarginalCostBound<S> {
    pub holds: bool,
    /// First pair violating the bound, in technology order.
    pub violation: Option<(Action<S>, Action<S>)>,
}

/// Checks that between known actions with positive, strictly ordered expected
/// outputs, cost increments weakly exceed expected-output increments. Under
/// this condition linear first-period contracts are optimal among all
/// contracts in the general variant.
pub fn marginal_cost_bound<S: Scalar>(
    grid: &OutputGrid<S>,
    known: &Technology<S>,
) -> Result<MarginalCostBound<S>> {
    let actions = known.actions();
    for i in 0..actions.len() {
        for j in 0..actions.len() {
            if i == j {
                continue;
            }
            let (lo, hi) = (&actions[i], &actions[j]);
            let (e_lo, e_hi) = (lo.mean(grid)?, hi.mean(grid)?);
            if S::zero() < e_lo && e_lo < e_hi && hi.cost - lo.cost < e_hi - e_lo {
                return Ok(MarginalCostBound {
                    holds: false,
                    violation: Some((lo.clone(), hi.clone())),
                });
            }
        }
    }
    Ok(MarginalCostBound {
        holds: true,
        violation: None,
    })
}

/// Optimal first-period share per discount factor, for the advances variant
/// with a single known action. The rows are plot-ready.
pub fn exploration_sweep<S: Scalar>(
    grid: &OutputGrid<S>,
    known: &Technology<S>,
    betas: &[S],
    resolution: usize,
    params: &SolverParams,
) -> Result<Vec<(S, S, S)>> {
    singleton(known)?;
    let mut rows = Vec::with_capacity(betas.len());
    for &beta in betas {
        let report = optimal_share(Variant::Advances, grid, known, beta, resolution, params)?;
        rows.push((beta, report.s1_star, report.u_star));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Distribution, Tolerances};

    fn grid() -> OutputGrid<f64> {
        OutputGrid::new(vec![0.0, 4000.0]).unwrap()
    }

    fn a0() -> Action<f64> {
        Action::with_mean(&grid(), 2000.0, 500.0).unwrap()
    }

    fn params() -> SolverParams {
        SolverParams::default()
    }

    #[test]
    fn linearize_examples() {
        let g = grid();
        let w = Contract::linear(0.35).unwrap();
        let out = linearize(&g, &w, &a0()).unwrap();
        assert_eq!(out.contract, w);
        assert!(!out.share_above_one);

        // Expected payment 1500 against expected output 2000.
        let tab = Contract::tabulated(vec![0.0, 3000.0]).unwrap();
        let out = linearize(&g, &tab, &a0()).unwrap();
        assert!((out.share - 0.75).abs() < 1e-15);

        let tab = Contract::tabulated(vec![0.0, 2000.0]).unwrap();
        let out = linearize(&g, &tab, &a0()).unwrap();
        assert!((out.share - 0.5).abs() < 1e-15);

        // Paying above output flags the share.
        let tab = Contract::tabulated(vec![0.0, 5000.0]).unwrap();
        let out = linearize(&g, &tab, &a0()).unwrap();
        assert!(out.share_above_one);
        assert!((out.share - 1.25).abs() < 1e-15);
    }

    #[test]
    fn linearize_preserves_reference_utility() {
        let g = OutputGrid::<f64>::new(vec![0.0, 1000.0, 4000.0]).unwrap();
        let w1 = Contract::tabulated(vec![0.0, 800.0, 1100.0]).unwrap();
        let dist = Distribution::new(vec![0.3, 0.3, 0.4]).unwrap();
        let a0 = Action::new(dist, 300.0).unwrap();
        let out = linearize(&g, &w1, &a0).unwrap();
        let before = crate::domain::agent_utility(&g, &w1, &a0).unwrap();
        let after = crate::domain::agent_utility(&g, &out.contract, &a0).unwrap();
        assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn static_share_and_guarantee() {
        let g = grid();
        assert_eq!(static_share(&g, &a0()).unwrap(), 0.5);
        let known = Technology::new(vec![a0()]).unwrap();
        let v = static_linear_guarantee(&g, &known, 0.5).unwrap();
        assert!((v - 500.0).abs() < 1e-12);
    }

    #[test]
    fn baseline_share_domain() {
        let g = grid();
        let err = overall_guarantee_baseline(&g, &a0(), 0.8, 0.1, &params()).unwrap_err();
        assert!(matches!(err, Error::ShareOutOfRange { .. }));
    }

    #[test]
    fn baseline_zero_discount_closed_form() {
        // With beta = 0 only the first period matters and the worst case is
        // the cheapest observation meeting the constraint:
        // U = (1 - s1)(1 - s0^2 / s1) E0.
        let g = grid();
        let e0 = 2000.0;
        let s0sq = 0.25;
        for s1 in [0.25, 0.4, 0.6, 0.9] {
            let (value, point) = overall_guarantee_baseline(&g, &a0(), 0.0, s1, &params()).unwrap();
            let expect = (1.0 - s1) * (1.0 - s0sq / s1) * e0;
            assert!(
                (value - expect).abs() < 1e-9,
                "s1 = {s1}: {value} vs {expect}"
            );
            assert!(point.h.unwrap() >= -1e-12);
        }
    }

    #[test]
    fn baseline_full_share_closed_form() {
        // At s1 = 1 the first-period term vanishes and the margin floor is
        // the known static margin, so U = beta (1 - s0)^2 E0 = 400.
        let g = grid();
        let (value, _) = overall_guarantee_baseline(&g, &a0(), 0.8, 1.0, &params()).unwrap();
        assert!((value - 400.0).abs() < 1e-6, "got {value}");
    }

    #[test]
    fn baseline_matches_dense_scan() {
        // Independent check of the minimization: a plain lattice scan of the
        // same program. The solver must come in at or below every lattice
        // point and within the lattice resolution of the scan minimum.
        let g = grid();
        let e0 = 2000.0;
        let (s0, beta): (f64, f64) = (0.5, 0.8);
        let s0sq = s0 * s0;
        for s1 in [0.25, 0.4, 0.65, 0.9] {
            let scan = {
                let n = 1200;
                let x_cap = (1.0 + beta).min(2.0);
                let mut best = f64::INFINITY;
                for i in 0..=n {
                    let x = x_cap * i as f64 / n as f64;
                    let z_max = s1 * x - (s1 - s0sq);
                    if z_max < 0.0 {
                        continue;
                    }
                    for j in 0..=n {
                        let z = z_max * j as f64 / n as f64;
                        let h = (z_max - z).max(0.0);
                        let t = ((1.0 - s1) * x)
                            .sqrt()
                            .max((1.0 - s1).sqrt() - h.sqrt())
                            .max(1.0 - s0)
                            .max(x.sqrt() - z.sqrt());
                        best = best.min((1.0 - s1) * x + beta * t * t);
                    }
                }
                best * e0
            };
            let (value, _) = overall_guarantee_baseline(&g, &a0(), beta, s1, &params()).unwrap();
            assert!(value <= scan + 1e-9, "s1 = {s1}: {value} above scan {scan}");
            assert!(value >= scan - 10.0, "s1 = {s1}: {value} far below scan {scan}");
        }
    }

    #[test]
    fn known_action_point_is_feasible_upper_bound() {
        // The known action itself is always a possible observation, so the
        // program value cannot exceed its interim guarantee.
        let g = grid();
        let known = Technology::new(vec![a0()]).unwrap();
        let tols = Tolerances::default();
        for s1 in [0.25, 0.5, 0.75, 1.0] {
            let w1 = Contract::linear(s1).unwrap();
            let v2 = crate::second_period::variant_guarantee(
                Variant::Baseline,
                &g,
                &w1,
                &a0(),
                &known,
                &tols,
            )
            .unwrap();
            let interim =
                crate::agent::interim_guarantee(&g, &w1, &a0(), v2, 0.8).unwrap();
            let (value, _) = overall_guarantee_baseline(&g, &a0(), 0.8, s1, &params()).unwrap();
            assert!(value <= interim + 1e-6, "s1 = {s1}: {value} > {interim}");
        }
    }

    #[test]
    fn general_specializes_to_baseline() {
        let g = grid();
        let known = Technology::new(vec![a0()]).unwrap();
        for s1 in [0.25, 0.3, 0.5, 0.7, 0.9, 1.0] {
            let (b, _) = overall_guarantee_baseline(&g, &a0(), 0.8, s1, &params()).unwrap();
            let (gnl, _) = overall_guarantee_general(&g, &known, 0.8, s1, &params()).unwrap();
            assert!((b - gnl).abs() < 1e-6, "s1 = {s1}: {b} vs {gnl}");
        }
    }

    #[test]
    fn dominated_known_action_is_irrelevant() {
        let g = grid();
        let known = Technology::new(vec![a0()]).unwrap();
        // Lower output at higher cost can never bind.
        let dominated = Action::with_mean(&g, 1500.0, 700.0).unwrap();
        let bigger = known.extended([dominated]);
        for s1 in [0.2, 0.5, 0.8] {
            let (lean, _) = overall_guarantee_general(&g, &known, 0.8, s1, &params()).unwrap();
            let (fat, _) = overall_guarantee_general(&g, &bigger, 0.8, s1, &params()).unwrap();
            assert!((lean - fat).abs() < 1e-6, "s1 = {s1}: {lean} vs {fat}");
        }
    }

    #[test]
    fn advances_zero_discount_reduces_to_first_period() {
        let g = grid();
        let known = Technology::new(vec![a0()]).unwrap();
        for s1 in [0.3, 0.5, 0.8] {
            let (value, _) = overall_guarantee_advances(&g, &known, 0.0, s1, &params()).unwrap();
            let floor = (s1 * 2000.0 - 500.0_f64).max(0.0);
            let expect = (1.0 - s1) / s1 * floor;
            assert!((value - expect).abs() < 1e-6, "s1 = {s1}: {value} vs {expect}");
        }
    }

    #[test]
    fn advances_exploration_raises_share() {
        // The optimal first-period share strictly exceeds the static share.
        let g = grid();
        let c0 = 0.16 * 2000.0;
        let a = Action::with_mean(&g, 2000.0, c0).unwrap();
        let known = Technology::new(vec![a]).unwrap();
        let report =
            optimal_share(Variant::Advances, &g, &known, 0.8, 200, &params()).unwrap();
        assert!(report.s1_star > 0.4 + 1e-4, "s1* = {}", report.s1_star);
        let (at_s0, _) = overall_guarantee_advances(&g, &known, 0.8, 0.4, &params()).unwrap();
        let (above, _) =
            overall_guarantee_advances(&g, &known, 0.8, 0.45, &params()).unwrap();
        assert!(above > at_s0, "{above} <= {at_s0}");
    }

    #[test]
    fn marginal_cost_bound_examples() {
        let g = grid();
        let single = Technology::new(vec![a0()]).unwrap();
        assert!(marginal_cost_bound(&g, &single).unwrap().holds);

        let ok = Technology::new(vec![
            a0(),
            Action::with_mean(&g, 2100.0, 650.0).unwrap(),
        ])
        .unwrap();
        assert!(marginal_cost_bound(&g, &ok).unwrap().holds);

        let bad = Technology::new(vec![
            a0(),
            Action::with_mean(&g, 2100.0, 550.0).unwrap(),
        ])
        .unwrap();
        let out = marginal_cost_bound(&g, &bad).unwrap();
        assert!(!out.holds);
        let (lo, hi) = out.violation.unwrap();
        assert_eq!(lo.mean(&g).unwrap(), 2000.0);
        assert_eq!(hi.mean(&g).unwrap(), 2100.0);
    }

    #[test]
    fn optimal_share_requires_resolution() {
        let g = grid();
        let known = Technology::new(vec![a0()]).unwrap();
        assert!(matches!(
            optimal_share(Variant::Advances, &g, &known, 0.8, 50, &params()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn exploration_sweep_requires_singleton() {
        let g = grid();
        let known = Technology::new(vec![
            a0(),
            Action::with_mean(&g, 2100.0, 650.0).unwrap(),
        ])
        .unwrap();
        assert!(exploration_sweep(&g, &known, &[0.5], 100, &params()).is_err());
    }

    #[test]
    fn minimizers_stay_in_box() {
        let g = grid();
        let known = Technology::new(vec![a0()]).unwrap();
        for s1 in [0.25, 0.5, 0.9] {
            let (_, p) = overall_guarantee_baseline(&g, &a0(), 0.8, s1, &params()).unwrap();
            assert!(p.x >= 0.0 && p.x <= 1.8 + 1e-12);
            assert!(p.z >= 0.0 && p.z <= 1.8 + 1e-12);
            let (_, p) = overall_guarantee_general(&g, &known, 0.8, s1, &params()).unwrap();
            assert!(p.x >= 0.0 && p.x <= 3600.0 + 1e-9);
            let (_, p) = overall_guarantee_advances(&g, &known, 0.8, s1, &params()).unwrap();
            assert!(p.x >= 0.0 && p.x <= 2000.0 + 1e-9);
        }
    }
}
