use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use svcplan::bnb::BnbSettings;
use svcplan::micp::WeightScheme;
use svcplan::planner::{emit_plot_data, run, CaseSource, RunConfig, ScenarioSource};

/// Siting and sizing of SVC devices over a set of load scenarios.
#[derive(Debug, Parser)]
#[command(name = "svcplan", version)]
struct Args {
    /// MATPOWER case file; the built-in IEEE 30-bus system when omitted.
    #[arg(long)]
    case: Option<PathBuf>,
    /// Scenario CSV with header `rho,lambda`; the built-in fifteen-level table when omitted.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    /// Weight cases: `case1`..`case4`, or `a1,a2`. Repeatable; all four presets when omitted.
    #[arg(long)]
    weights: Vec<String>,
    /// Device budgets to solve.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    nv: Vec<usize>,
    #[arg(long, default_value_t = WeightScheme::DEFAULT_ALPHA)]
    alpha: f64,
    /// Loop angle tolerance (rad); π/360 when omitted.
    #[arg(long)]
    eps_theta: Option<f64>,
    /// Device susceptance range `lo,hi` (p.u.).
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.0, 0.3])]
    svc_range: Vec<f64>,
    /// Check every result against an AC power flow.
    #[arg(long)]
    validate: bool,
    #[arg(long, default_value = "svcplan-out")]
    out: PathBuf,
    /// Concurrent relaxations per search batch.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 100_000)]
    max_nodes: usize,
    /// Wall-clock limit per search (s).
    #[arg(long)]
    time_limit: Option<f64>,
    /// Skip the greedy/swap seeding of each search.
    #[arg(long)]
    no_heuristic: bool,
    /// Scenarios (1-based) to write voltage profiles for.
    #[arg(long, value_delimiter = ',', default_value = "3,13")]
    plot_scenarios: Vec<usize>,
    /// Accepted for interface stability; every algorithm is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_weights(spec: &str) -> Result<(String, WeightScheme)> {
    if let Some(k) = spec.strip_prefix("case") {
        let k: u8 = k.parse().with_context(|| format!("bad weight case `{spec}`"))?;
        let w = WeightScheme::preset(k).with_context(|| format!("no weight case {k}"))?;
        return Ok((spec.to_string(), w));
    }
    let parts: Vec<f64> = spec
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad weights `{spec}`"))?;
    let [a1, a2] = parts[..] else { bail!("weights must be `a1,a2`, got `{spec}`") };
    let w = WeightScheme::new(a1, a2, WeightScheme::DEFAULT_ALPHA)?;
    Ok((format!("w{a1}_{a2}"), w))
}

fn config(args: &Args) -> Result<RunConfig> {
    let mut config = RunConfig {
        case: args.case.clone().map_or(CaseSource::Ieee30, CaseSource::Path),
        scenarios: args.scenarios.clone().map_or(ScenarioSource::TableOne, ScenarioSource::Path),
        n_v: args.nv.clone(),
        svc_range: (args.svc_range[0], args.svc_range[1]),
        alpha: args.alpha,
        bnb: BnbSettings {
            workers: args.workers,
            max_nodes: args.max_nodes,
            time_limit: args.time_limit,
            ..Default::default()
        },
        heuristic: !args.no_heuristic,
        validate: args.validate,
        ..Default::default()
    };
    if let Some(eps) = args.eps_theta {
        config.eps_theta = eps;
    }
    if !args.weights.is_empty() {
        config.weights = args.weights.iter().map(|w| parse_weights(w)).collect::<Result<_>>()?;
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("{failed} cell(s) failed; partial results written to {}", args.out.display());
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(args: &Args) -> Result<usize> {
    let config = config(args)?;
    let report = run(&config)?;
    report.write(&args.out)?;
    print!("{}", report.render());

    // plot data for the last weight case at its largest solved budget
    if let Some(case) = report.cases.last() {
        if let Some(cell) = case.cells.iter().rev().find(|c| c.result.is_some()) {
            let files = emit_plot_data(&report, &case.label, cell.n_v, &args.plot_scenarios, &args.out)?;
            for f in files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(report.failed_cells())
}
