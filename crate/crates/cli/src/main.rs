//! Command-line front end: computes second-period guarantees, optimal
//! first-period shares, sweep tables for plotting, and runs the
//! verification suites.

mod instance;
mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use robust_contracts::first_period::{
    admissible_interval, exploration_sweep, optimal_share, overall_guarantee,
};
use robust_contracts::second_period::{
    advances_guarantee, optimal_contract_baseline, optimal_contract_general, SecondPeriodReport,
};
use robust_contracts::{evaluate_contract, Action, Contract, Error, Tolerances, Variant};

use instance::Instance;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "robust-contracts")]
#[command(about = "Worst-case payoff guarantees for two-period contracting with exploration")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InstanceArg {
    /// Instance file; omit to use the bundled worked example.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Override the instance's model variant.
    #[arg(long)]
    variant: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal second-period guarantee, contract and worst-case witness for
    /// an observed action.
    SecondPeriod {
        #[command(flatten)]
        instance: InstanceArg,
        /// First-period contract, e.g. `linear:0.5` or `table:0,1500`.
        #[arg(long)]
        w1: String,
        /// Observed action, e.g. `mean:1200,cost:90` or
        /// `weights:0.7:0.3,cost:90`.
        #[arg(long)]
        a1: String,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal first-period share and overall guarantee.
    Guarantee {
        #[command(flatten)]
        instance: InstanceArg,
        /// Share-grid resolution (defaults to the instance's).
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// CSV tables: the guarantee across shares, or the optimal share across
    /// discount factors.
    Sweep {
        #[command(flatten)]
        instance: InstanceArg,
        /// Number of share-grid points (defaults to the instance's).
        #[arg(long)]
        resolution: Option<usize>,
        /// Comma-separated discount factors; switches to the
        /// `beta,s1_star,U_star` table.
        #[arg(long)]
        betas: Option<String>,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite: example31, tightness, improvement,
    /// equivalence, or all.
    Verify {
        /// Suite name.
        suite: String,
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
    /// Emit the bundled worked-example instance file.
    Example {
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit the canonical full-precision form instead of the commented
        /// original.
        #[arg(long)]
        canonical: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn bad_input(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_BAD_INPUT,
        message: message.into(),
    }
}

fn io_failure(path: &Path, err: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {err}", path.display()),
    }
}

fn map_core_error(err: Error) -> Failure {
    bad_input(err.to_string())
}

fn load_instance(arg: &InstanceArg) -> Result<Instance, Failure> {
    let text = match &arg.instance {
        Some(path) => std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?,
        None => instance::EXAMPLE31.to_string(),
    };
    let mut inst = instance::parse(&text).map_err(bad_input)?;
    if let Some(v) = &arg.variant {
        inst.variant = v.parse().map_err(map_core_error)?;
    }
    Ok(inst)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| io_failure(path, e)),
        None => {
            print!("{content}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::SecondPeriod {
            instance: arg,
            w1,
            a1,
            out,
        } => {
            let inst = load_instance(&arg)?;
            let w1 = instance::parse_contract(&w1, &inst.grid).map_err(bad_input)?;
            let a1 = instance::parse_action(&a1, &inst.grid).map_err(bad_input)?;
            let tols = Tolerances::default();
            let report = match inst.variant {
                Variant::Baseline if inst.known.len() == 1 => optimal_contract_baseline(
                    &inst.grid,
                    &w1,
                    &a1,
                    &inst.known.actions()[0],
                    &tols,
                ),
                Variant::Baseline | Variant::General => {
                    optimal_contract_general(&inst.grid, &w1, &a1, &inst.known, &tols)
                }
                Variant::Advances => advances_guarantee(&inst.grid, &a1, &inst.known),
            }
            .map_err(map_core_error)?;
            emit(&out, &render_report(&inst, &report))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Guarantee {
            instance: arg,
            resolution,
        } => {
            let inst = load_instance(&arg)?;
            let resolution = resolution.unwrap_or(inst.resolution).max(100);
            let report = optimal_share(
                inst.variant,
                &inst.grid,
                &inst.known,
                inst.beta,
                resolution,
                &inst.solver,
            )
            .map_err(map_core_error)?;
            println!("variant: {}", inst.variant.as_str());
            println!("s1_star: {}", report.s1_star);
            println!("u_star: {}", report.u_star);
            if report.linear_only_caveat {
                println!("note: linear-optimal (global optimality unproven)");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            instance: arg,
            resolution,
            betas,
            out,
        } => {
            let inst = load_instance(&arg)?;
            let resolution = resolution.unwrap_or(inst.resolution).max(2);
            let csv = match betas {
                Some(list) => {
                    let betas: Result<Vec<f64>, _> =
                        list.split(',').map(|t| t.trim().parse::<f64>()).collect();
                    let betas = betas.map_err(|_| bad_input("betas must be numbers"))?;
                    let rows = exploration_sweep(
                        &inst.grid,
                        &inst.known,
                        &betas,
                        resolution.max(100),
                        &inst.solver,
                    )
                    .map_err(map_core_error)?;
                    let mut csv = String::from("beta,s1_star,U_star\n");
                    for (beta, s1, u) in rows {
                        csv.push_str(&format!("{beta},{s1},{u}\n"));
                    }
                    csv
                }
                None => {
                    let (lo, hi) = admissible_interval(inst.variant, &inst.grid, &inst.known)
                        .map_err(map_core_error)?;
                    let mut csv = String::from("s1,U\n");
                    for i in 0..resolution {
                        let s1 = lo + (hi - lo) * i as f64 / (resolution - 1) as f64;
                        let (value, _) = overall_guarantee(
                            inst.variant,
                            &inst.grid,
                            &inst.known,
                            inst.beta,
                            s1,
                            &inst.solver,
                        )
                        .map_err(map_core_error)?;
                        csv.push_str(&format!("{s1},{value}\n"));
                    }
                    csv
                }
            };
            emit(&out, &csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            suite,
            instance: arg,
            seed,
            count,
        } => {
            let inst = load_instance(&arg)?;
            let outcome = match suite.as_str() {
                "example31" => verify::example31(),
                "tightness" => verify::tightness(count, seed),
                "improvement" => verify::improvement(&inst, count, seed),
                "equivalence" => verify::equivalence(&inst, count.clamp(2, 40)),
                "all" => verify::run_all(&inst, count, seed),
                other => return Err(bad_input(format!("unknown suite `{other}`"))),
            };
            if outcome.failures.is_empty() {
                println!("verify {suite}: all {} checks passed", outcome.checks);
                Ok(ExitCode::SUCCESS)
            } else {
                println!(
                    "verify {suite}: {} of {} checks failed",
                    outcome.failures.len(),
                    outcome.checks
                );
                for failure in &outcome.failures {
                    println!("  counterexample: {failure}");
                }
                Ok(ExitCode::from(EXIT_CHECK_FAILED))
            }
        }
        Command::Example { out, canonical } => {
            if canonical {
                let inst = instance::parse(instance::EXAMPLE31).map_err(bad_input)?;
                emit(&out, &instance::write(&inst))?;
            } else {
                emit(&out, instance::EXAMPLE31)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn render_action(grid: &robust_contracts::OutputGrid<f64>, action: &Action<f64>) -> String {
    let weights: Vec<String> = action.dist.weights().iter().map(|w| w.to_string()).collect();
    format!(
        "weights {} cost {} (mean {})",
        weights.join(" "),
        action.cost,
        action.mean(grid).unwrap_or(f64::NAN)
    )
}

fn render_contract(contract: &Contract<f64>) -> String {
    match contract {
        Contract::Linear { share } => format!("linear share {share}"),
        Contract::Tabulated { .. } => "tabulated".to_string(),
        Contract::Blend { base, m } => {
            format!("blend of [{}] with residual fraction {m}", render_contract(base))
        }
    }
}

fn render_report(inst: &Instance, report: &SecondPeriodReport<f64>) -> String {
    let mut out = String::new();
    out.push_str(&format!("variant: {}\n", inst.variant.as_str()));
    out.push_str(&format!("case: {}\n", report.case.as_str()));
    out.push_str(&format!("guarantee: {}\n", report.guarantee));
    out.push_str(&format!("margin: {}\n", report.margin));
    out.push_str(&format!("contract: {}\n", render_contract(&report.contract)));
    if let Ok(payments) = evaluate_contract(&report.contract, &inst.grid) {
        let rendered: Vec<String> = payments.iter().map(|p| p.to_string()).collect();
        out.push_str(&format!("payments: {}\n", rendered.join(" ")));
    }
    out.push_str(&format!(
        "attaining action: {}\n",
        render_action(&inst.grid, &report.attaining_action)
    ));
    out.push_str("worst-case technology:\n");
    for action in report.witness.actions() {
        out.push_str(&format!("  {}\n", render_action(&inst.grid, action)));
    }
    out
}
