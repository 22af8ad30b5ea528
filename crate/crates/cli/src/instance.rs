//! The plain-text instance format.
//!
//! One key per line, `#` starts a comment. Example:
//!
//! ```text
//! grid 0 4000
//! beta 0.8
//! variant baseline
//! known mean 2000 cost 500
//! known weights 0.5 0.5 cost 500
//! resolution 200
//! scan-points 401
//! ```
//!
//! Known actions take either per-level `weights` or the `mean` shorthand,
//! which puts the matching two-point distribution on the grid endpoints.
//! Numbers are written back in full precision, so emitting and reloading an
//! instance reproduces the configuration bit for bit.

use robust_contracts::first_period::SolverParams;
use robust_contracts::{
    Action, Contract, Distribution, ModelConfig64, OutputGrid, Technology, Variant,
};

/// The bundled worked-example instance, also shipped at
/// `crates/cli/instances/example31`.
pub const EXAMPLE31: &str = include_str!("../instances/example31");

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub grid: OutputGrid<f64>,
    pub known: Technology<f64>,
    pub beta: f64,
    pub variant: Variant,
    pub resolution: usize,
    pub solver: SolverParams,
}

impl Instance {
    /// Re-checks every model invariant (grid shape, weights, profitability,
    /// discount factor) by constructing the library configuration.
    pub fn validate(&self) -> Result<ModelConfig64, String> {
        ModelConfig64::new(self.grid.clone(), self.known.clone(), self.beta)
            .map_err(|e| format!("invalid instance: {e}"))
    }
}

pub fn parse(text: &str) -> Result<Instance, String> {
    let mut grid: Option<OutputGrid<f64>> = None;
    let mut beta: Option<f64> = None;
    let mut variant = Variant::Baseline;
    let mut resolution = 200usize;
    let mut scan_points = SolverParams::default().scan_points;
    let mut known_specs: Vec<(Option<f64>, Option<Vec<f64>>, f64)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let key = tokens.next().unwrap();
        let rest: Vec<&str> = tokens.collect();
        let at = |msg: &str| format!("line {}: {msg}", lineno + 1);
        match key {
            "grid" => {
                let levels = parse_floats(&rest).map_err(|e| at(&e))?;
                grid = Some(OutputGrid::new(levels).map_err(|e| at(&e.to_string()))?);
            }
            "beta" => {
                if rest.len() != 1 {
                    return Err(at("beta takes one number"));
                }
                beta = Some(parse_float(rest[0]).map_err(|e| at(&e))?);
            }
            "variant" => {
                if rest.len() != 1 {
                    return Err(at("variant takes one word"));
                }
                variant = rest[0].parse().map_err(|e: robust_contracts::Error| at(&e.to_string()))?;
            }
            "known" => {
                known_specs.push(parse_known(&rest).map_err(|e| at(&e))?);
            }
            "resolution" => {
                if rest.len() != 1 {
                    return Err(at("resolution takes one integer"));
                }
                resolution = rest[0]
                    .parse()
                    .map_err(|_| at("resolution must be an integer"))?;
            }
            "scan-points" => {
                if rest.len() != 1 {
                    return Err(at("scan-points takes one integer"));
                }
                scan_points = rest[0]
                    .parse()
                    .map_err(|_| at("scan-points must be an integer"))?;
            }
            other => return Err(at(&format!("unknown key `{other}`"))),
        }
    }

    let grid = grid.ok_or("missing `grid` line")?;
    let beta = beta.ok_or("missing `beta` line")?;
    if known_specs.is_empty() {
        return Err("missing `known` line".into());
    }
    let mut actions = Vec::with_capacity(known_specs.len());
    for (mean, weights, cost) in known_specs {
        let action = match (mean, weights) {
            (Some(mean), None) => {
                Action::with_mean(&grid, mean, cost).map_err(|e| e.to_string())?
            }
            (None, Some(weights)) => {
                if weights.len() != grid.len() {
                    return Err(format!(
                        "known action has {} weights for a {}-level grid",
                        weights.len(),
                        grid.len()
                    ));
                }
                let dist = Distribution::new(weights).map_err(|e| e.to_string())?;
                Action::new(dist, cost).map_err(|e| e.to_string())?
            }
            _ => unreachable!("parse_known yields exactly one form"),
        };
        actions.push(action);
    }
    let known = Technology::new(actions).map_err(|e| e.to_string())?;

    let instance = Instance {
        grid,
        known,
        beta,
        variant,
        resolution,
        solver: SolverParams { scan_points },
    };
    instance.validate()?;
    Ok(instance)
}

/// Full-precision emission; `parse(write(x)) == x` bit for bit.
pub fn write(instance: &Instance) -> String {
    let mut out = String::new();
    out.push_str("grid");
    for level in instance.grid.levels() {
        out.push_str(&format!(" {level}"));
    }
    out.push('\n');
    out.push_str(&format!("beta {}\n", instance.beta));
    out.push_str(&format!("variant {}\n", instance.variant.as_str()));
    for action in instance.known.actions() {
        out.push_str("known weights");
        for w in action.dist.weights() {
            out.push_str(&format!(" {w}"));
        }
        out.push_str(&format!(" cost {}\n", action.cost));
    }
    out.push_str(&format!("resolution {}\n", instance.resolution));
    out.push_str(&format!("scan-points {}\n", instance.solver.scan_points));
    out
}

fn parse_float(token: &str) -> Result<f64, String> {
    token
        .parse::<f64>()
        .map_err(|_| format!("`{token}` is not a number"))
}

fn parse_floats(tokens: &[&str]) -> Result<Vec<f64>, String> {
    tokens.iter().map(|t| parse_float(t)).collect()
}

type KnownSpec = (Option<f64>, Option<Vec<f64>>, f64);

fn parse_known(rest: &[&str]) -> Result<KnownSpec, String> {
    let cost_at = rest
        .iter()
        .position(|t| *t == "cost")
        .ok_or("known action needs a `cost` field")?;
    if cost_at + 2 != rest.len() {
        return Err("`cost` takes exactly one number at the end".into());
    }
    let cost = parse_float(rest[cost_at + 1])?;
    match rest.first() {
        Some(&"mean") => {
            if cost_at != 2 {
                return Err("`mean` takes exactly one number".into());
            }
            Ok((Some(parse_float(rest[1])?), None, cost))
        }
        Some(&"weights") => {
            let weights = parse_floats(&rest[1..cost_at])?;
            Ok((None, Some(weights), cost))
        }
        _ => Err("known action must start with `mean` or `weights`".into()),
    }
}

/// Contract spec: `linear:0.5` or `table:0,1500,3000`.
pub fn parse_contract(spec: &str, grid: &OutputGrid<f64>) -> Result<Contract<f64>, String> {
    let (kind, body) = spec
        .split_once(':')
        .ok_or("contract spec needs a `kind:...` form")?;
    match kind {
        "linear" => {
            let share = parse_float(body)?;
            Contract::linear(share).map_err(|e| e.to_string())
        }
        "table" => {
            let payments: Result<Vec<f64>, String> =
                body.split(',').map(|t| parse_float(t.trim())).collect();
            let contract = Contract::tabulated(payments?).map_err(|e| e.to_string())?;
            contract.payments(grid).map_err(|e| e.to_string())?;
            Ok(contract)
        }
        other => Err(format!("unknown contract kind `{other}` (use linear or table)")),
    }
}

/// Action spec: `mean:1200,cost:90` or `weights:0.7:0.3,cost:90`.
pub fn parse_action(spec: &str, grid: &OutputGrid<f64>) -> Result<Action<f64>, String> {
    let mut mean: Option<f64> = None;
    let mut weights: Option<Vec<f64>> = None;
    let mut cost: Option<f64> = None;
    for part in spec.split(',') {
        let (key, body) = part
            .split_once(':')
            .ok_or("action spec fields take a `key:value` form")?;
        match key.trim() {
            "mean" => mean = Some(parse_float(body)?),
            "cost" => cost = Some(parse_float(body)?),
            "weights" => {
                let ws: Result<Vec<f64>, String> =
                    body.split(':').map(|t| parse_float(t.trim())).collect();
                weights = Some(ws?);
            }
            other => return Err(format!("unknown action field `{other}`")),
        }
    }
    let cost = cost.ok_or("action spec needs a cost")?;
    match (mean, weights) {
        (Some(mean), None) => Action::with_mean(grid, mean, cost).map_err(|e| e.to_string()),
        (None, Some(ws)) => {
            if ws.len() != grid.len() {
                return Err(format!(
                    "action has {} weights for a {}-level grid",
                    ws.len(),
                    grid.len()
                ));
            }
            let dist = Distribution::new(ws).map_err(|e| e.to_string())?;
            Action::new(dist, cost).map_err(|e| e.to_string())
        }
        _ => Err("action spec needs exactly one of `mean` or `weights`".into()),
    }
}
