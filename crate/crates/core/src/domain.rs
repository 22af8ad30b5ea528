//! Domain types: output grids, distributions, actions, contracts and
//! technologies, with validation and expectation arithmetic.
//!
//! Distributions live on finite grids. Every closed form in the library
//! depends on a distribution only through expectations, and the worst-case
//! constructions are mixtures of known distributions with a point mass at
//! zero, so finite supports represent them exactly.
//!
//! All types are immutable after construction and all operations are pure.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Model variant selecting the principal's updating rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Single known action, identical technologies across periods.
    Baseline,
    /// A general set of known actions, identical technologies.
    General,
    /// The second agent's technology may strictly contain the first's.
    Advances,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::General => "general",
            Variant::Advances => "advances",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Variant::Baseline),
            "general" => Ok(Variant::General),
            "advances" => Ok(Variant::Advances),
            _ => Err(Error::InvalidArgument(
                "variant must be one of: baseline, general, advances",
            )),
        }
    }
}

/// Numeric tolerances used across the library.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances<S> {
    /// Absolute tolerance for validation identities (weights summing to one,
    /// accounting identities).
    pub validation: S,
    /// Absolute tolerance when comparing against closed-form values.
    pub closed_form: S,
    /// Absolute tolerance for optimizer outputs.
    pub optimizer: S,
    /// Absolute tolerance for agent-indifference (argmax membership and the
    /// compatibility cap).
    pub tie: S,
}

impl<S: Scalar> Default for Tolerances<S> {
    fn default() -> Self {
        // The named values are calibrated for f64; for narrower types fall
        // back to multiples of machine epsilon so validation stays usable.
        let eps = S::epsilon();
        let floor = |x: f64, k: f64| lit::<S>(x).max(eps * lit(k));
        Tolerances {
            validation: floor(1e-12, 1e2),
            closed_form: floor(1e-9, 1e4),
            optimizer: floor(1e-6, 1e7),
            tie: floor(1e-9, 1e4),
        }
    }
}

/// Finite sorted set of output levels with the lowest level normalized to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputGrid<S> {
    levels: Vec<S>,
}

impl<S: Scalar> OutputGrid<S> {
    pub fn new(levels: Vec<S>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::GridTooSmall(levels.len()));
        }
        if levels[0] != S::zero() {
            return Err(Error::GridNotCanonical);
        }
        for pair in levels.windows(2) {
            if !pair[1].is_finite() || pair[1] <= pair[0] {
                return Err(Error::GridNotCanonical);
            }
        }
        Ok(OutputGrid { levels })
    }

    pub fn levels(&self) -> &[S] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest producible output.
    pub fn max_level(&self) -> S {
        *self.levels.last().expect("grid has at least two levels")
    }
}

/// Probability weights aligned with an [`OutputGrid`] by position.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<S> {
    weights: Vec<S>,
}

impl<S: Scalar> Distribution<S> {
    pub fn new(weights: Vec<S>) -> Result<Self> {
        Self::with_tolerance(weights, Tolerances::default().validation)
    }

    pub fn with_tolerance(weights: Vec<S>, tol: S) -> Result<Self> {
        let mut sum = S::zero();
        for &w in &weights {
            if !w.is_finite() || w < S::zero() {
                return Err(Error::NegativeWeight);
            }
            sum = sum + w;
        }
        if (sum - S::one()).abs() > tol {
            return Err(Error::WeightsNotNormalized {
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Distribution { weights })
    }

    /// Point mass on the lowest output level.
    pub fn point_mass_at_zero(grid: &OutputGrid<S>) -> Self {
        let mut weights = vec![S::zero(); grid.len()];
        weights[0] = S::one();
        Distribution { weights }
    }

    /// Point mass on the highest output level.
    pub fn point_mass_at_max(grid: &OutputGrid<S>) -> Self {
        let mut weights = vec![S::zero(); grid.len()];
        *weights.last_mut().unwrap() = S::one();
        Distribution { weights }
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Mixture `keep * self + (1 - keep) * point_mass_at_zero`.
    ///
    /// The worst-case technology constructions only ever dilute an existing
    /// distribution toward zero output, which a finite grid represents
    /// exactly.
    pub fn mix_toward_zero(&self, keep: S) -> Result<Self> {
        if !(S::zero()..=S::one()).contains(&keep) {
            return Err(Error::InvalidArgument("mixture weight must lie in [0, 1]"));
        }
        let mut weights: Vec<S> = self.weights.iter().map(|&w| w * keep).collect();
        weights[0] = weights[0] + (S::one() - keep);
        Ok(Distribution { weights })
    }
}

/// Expected value of per-level `values` under `dist`.
pub fn expectation<S: Scalar>(dist: &Distribution<S>, values: &[S]) -> Result<S> {
    if dist.len() != values.len() {
        return Err(Error::Alignment {
            expected: dist.len(),
            got: values.len(),
        });
    }
    Ok(dist
        .weights()
        .iter()
        .zip(values)
        .fold(S::zero(), |acc, (&w, &v)| acc + w * v))
}

/// An output distribution together with the cost of producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Action<S> {
    pub dist: Distribution<S>,
    pub cost: S,
}

impl<S: Scalar> Action<S> {
    pub fn new(dist: Distribution<S>, cost: S) -> Result<Self> {
        if !cost.is_finite() || cost < S::zero() {
            return Err(Error::NegativeCost);
        }
        Ok(Action { dist, cost })
    }

    /// Builds an action with the given expected output, supported on the
    /// grid's endpoints `{0, max}`. Any (mean, cost) pair arising in the
    /// minimax programs can be realized this way.
    pub fn with_mean(grid: &OutputGrid<S>, mean: S, cost: S) -> Result<Self> {
        let max = grid.max_level();
        if !mean.is_finite() || mean < S::zero() || mean > max {
            return Err(Error::MeanOutOfRange {
                mean: mean.to_f64().unwrap_or(f64::NAN),
                max: max.to_f64().unwrap_or(f64::NAN),
            });
        }
        let p = mean / max;
        let mut weights = vec![S::zero(); grid.len()];
        weights[0] = S::one() - p;
        *weights.last_mut().unwrap() = p;
        Action::new(Distribution { weights }, cost)
    }

    /// The null action: zero output for sure at zero cost. Models quitting.
    pub fn null(grid: &OutputGrid<S>) -> Self {
        Action {
            dist: Distribution::point_mass_at_zero(grid),
            cost: S::zero(),
        }
    }

    /// Expected output.
    pub fn mean(&self, grid: &OutputGrid<S>) -> Result<S> {
        expectation(&self.dist, grid.levels())
    }
}

/// Output-contingent payment schedule with limited liability and zero payment
/// at zero output.
#[derive(Debug, Clone, PartialEq)]
pub enum Contract<S> {
    /// Pays a fixed share of output.
    Linear { share: S },
    /// Arbitrary per-level payments aligned with a grid.
    Tabulated { payments: Vec<S> },
    /// `base(y) + m * (y - base(y))`: the base plus a fraction of the
    /// residual output.
    Blend { base: Box<Contract<S>>, m: S },
}

impl<S: Scalar> Contract<S> {
    pub fn linear(share: S) -> Result<Self> {
        if !share.is_finite() || share < S::zero() || share > S::one() {
            return Err(Error::InvalidContract("linear share must lie in [0, 1]"));
        }
        Ok(Contract::Linear { share })
    }

    /// Linear contract without the `[0, 1]` share check. Contract
    /// linearization can produce shares above one for pathological tabulated
    /// inputs that pay more than the output; those are reported as-is with a
    /// warning rather than rejected.
    pub fn linear_unchecked(share: S) -> Self {
        Contract::Linear { share }
    }

    pub fn tabulated(payments: Vec<S>) -> Result<Self> {
        if payments.is_empty() || payments[0] != S::zero() {
            return Err(Error::InvalidContract("payment at zero output must be zero"));
        }
        if payments.iter().any(|p| !p.is_finite() || *p < S::zero()) {
            return Err(Error::InvalidContract("payments must be finite and nonnegative"));
        }
        Ok(Contract::Tabulated { payments })
    }

    pub fn blend(base: Contract<S>, m: S) -> Result<Self> {
        if !m.is_finite() || m < S::zero() || m > S::one() {
            return Err(Error::InvalidContract("blend fraction must lie in [0, 1]"));
        }
        Ok(Contract::Blend {
            base: Box::new(base),
            m,
        })
    }

    /// Payment at each grid level.
    pub fn payments(&self, grid: &OutputGrid<S>) -> Result<Vec<S>> {
        let payments = self.payments_unvalidated(grid)?;
        if payments[0] != S::zero() {
            return Err(Error::InvalidContract("payment at zero output must be zero"));
        }
        if payments.iter().any(|p| !p.is_finite() || *p < S::zero()) {
            return Err(Error::InvalidContract("payments must be finite and nonnegative"));
        }
        Ok(payments)
    }

    fn payments_unvalidated(&self, grid: &OutputGrid<S>) -> Result<Vec<S>> {
        match self {
            Contract::Linear { share } => {
                Ok(grid.levels().iter().map(|&y| *share * y).collect())
            }
            Contract::Tabulated { payments } => {
                if payments.len() != grid.len() {
                    return Err(Error::Alignment {
                        expected: grid.len(),
                        got: payments.len(),
                    });
                }
                Ok(payments.clone())
            }
            Contract::Blend { base, m } => {
                let base = base.payments_unvalidated(grid)?;
                // (1 - m) b + m y equals b + m (y - b) and is exact at both
                // endpoints of m.
                Ok(grid
                    .levels()
                    .iter()
                    .zip(&base)
                    .map(|(&y, &b)| (S::one() - *m) * b + *m * y)
                    .collect())
            }
        }
    }
}

/// Payment schedule evaluated on each grid level.
pub fn evaluate_contract<S: Scalar>(w: &Contract<S>, grid: &OutputGrid<S>) -> Result<Vec<S>> {
    w.payments(grid)
}

/// The agent's expected utility from an action: `E_F[w(y)] - c`.
pub fn agent_utility<S: Scalar>(
    grid: &OutputGrid<S>,
    w: &Contract<S>,
    a: &Action<S>,
) -> Result<S> {
    let payments = w.payments(grid)?;
    Ok(expectation(&a.dist, &payments)? - a.cost)
}

/// The principal's expected payoff from an action: `E_F[y - w(y)]`.
pub fn principal_payoff<S: Scalar>(
    grid: &OutputGrid<S>,
    w: &Contract<S>,
    a: &Action<S>,
) -> Result<S> {
    let payments = w.payments(grid)?;
    let residual: Vec<S> = grid
        .levels()
        .iter()
        .zip(&payments)
        .map(|(&y, &p)| y - p)
        .collect();
    expectation(&a.dist, &residual)
}

/// Finite nonempty set of actions available to the agents.
#[derive(Debug, Clone, PartialEq)]
pub struct Technology<S> {
    actions: Vec<Action<S>>,
}

impl<S: Scalar> Technology<S> {
    pub fn new(actions: Vec<Action<S>>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::EmptyTechnology);
        }
        Ok(Technology { actions })
    }

    pub fn actions(&self) -> &[Action<S>] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, action: &Action<S>) -> bool {
        self.actions.iter().any(|a| a == action)
    }

    /// New technology with `extra` appended.
    pub fn extended(&self, extra: impl IntoIterator<Item = Action<S>>) -> Self {
        let mut actions = self.actions.clone();
        actions.extend(extra);
        Technology { actions }
    }
}

/// A model instance: output grid, known technology, discount factor and
/// tolerances.
#[derive(Debug, Clone)]
pub struct ModelConfig<S> {
    pub grid: OutputGrid<S>,
    pub known: Technology<S>,
    pub beta: S,
    pub tolerances: Tolerances<S>,
}

impl<S: Scalar> ModelConfig<S> {
    pub fn new(grid: OutputGrid<S>, known: Technology<S>, beta: S) -> Result<Self> {
        Self::with_tolerances(grid, known, beta, Tolerances::default())
    }

    pub fn with_tolerances(
        grid: OutputGrid<S>,
        known: Technology<S>,
        beta: S,
        tolerances: Tolerances<S>,
    ) -> Result<Self> {
        if !beta.is_finite() || beta <= S::zero() {
            return Err(Error::InvalidBeta);
        }
        let mut profitable = false;
        for a in known.actions() {
            let mean = a.mean(&grid)?;
            if mean - a.cost > S::zero() {
                profitable = true;
            }
        }
        if !profitable {
            return Err(Error::NoProfitableAction);
        }
        Ok(ModelConfig {
            grid,
            known,
            beta,
            tolerances,
        })
    }
}
