use std::collections::BTreeMap;

use serde::Serialize;

use super::tree::{branch_and_bound_with, BnbError, BnbSettings, NodeRecord, SearchHooks, TreeStatus};
use crate::conic::{solve_with_fixings, SolverSettings};
use crate::micp::{minimal_siting, MicpIndex, Quantity, SvcSpec};
use crate::network::{NetworkCase, ScenarioSet};
use crate::Program;

/// Outcome of one load scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioOutcome {
    pub loss_mw: f64,
    /// Σ over buses of |W − 1|.
    pub deviation_w: f64,
    /// Σ over buses of |V − 1|.
    pub deviation_v: f64,
    /// `(bus id, b^v)` for every chosen bus.
    pub susceptance: Vec<(usize, f64)>,
    /// Voltage magnitude per bus, in case storage order.
    pub voltages: Vec<f64>,
    pub max_cone_mismatch: f64,
}

/// Objective split by term (p.u.).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveBreakdown {
    pub loss: f64,
    pub deviation: f64,
    pub penalty: f64,
    pub total: f64,
}

/// A planning result: siting decision plus the operating point it implies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationResult {
    pub status: TreeStatus,
    pub chosen: Vec<usize>,
    pub scenarios: Vec<ScenarioOutcome>,
    /// Probability-weighted loss (MW).
    pub loss_mw: f64,
    pub deviation_w: f64,
    pub deviation_v: f64,
    pub objective: ObjectiveBreakdown,
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    /// Wall time; left out of serialized reports so they stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
    /// Largest `2·aux·W_j − (P² + Q²)` over branches and scenarios (p.u.²).
    pub max_cone_mismatch: f64,
    /// Same, relative to `max(P² + Q², 1)`.
    pub max_relative_cone_mismatch: f64,
    /// Model variables at the reported point, in [`MicpIndex`] order.
    #[serde(skip)]
    pub x: Vec<f64>,
    /// Search tree log (empty for fixed-placement solves).
    #[serde(skip)]
    pub log: Vec<NodeRecord>,
}

/// Search statistics attached to an extracted point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchStats {
    pub status: TreeStatus,
    pub bound: f64,
    pub nodes: usize,
    pub seconds: f64,
}

/// Signed cone gap `2·aux·W_j − (P^r² + Q^r²)` of branch `k` in scenario `s`.
pub fn cone_mismatch(case: &NetworkCase, index: &MicpIndex, x: &[f64], k: usize, s: usize) -> f64 {
    let j = case.pos(case.branches()[k].to_bus);
    let (p, q) = (x[index.pr(k, s)], x[index.qr(k, s)]);
    2.0 * x[index.cone_aux(k, s)] * x[index.w(j, s)] - (p * p + q * q)
}

impl AllocationResult {
    /// Reads the planning quantities off a program point.
    pub fn extract(
        case: &NetworkCase,
        scenarios: &ScenarioSet,
        index: &MicpIndex,
        program: &Program,
        x: &[f64],
        stats: SearchStats,
    ) -> Self {
        let x = &x[..index.n_vars()];
        let chosen: Vec<usize> = index
            .candidates()
            .iter()
            .enumerate()
            .filter(|&(c, _)| x[index.delta(c)] > 0.5)
            .map(|(_, &id)| id)
            .collect();

        let mut objective = ObjectiveBreakdown { loss: 0.0, deviation: 0.0, penalty: 0.0, total: 0.0 };
        for (pos, &c) in program.objective()[..index.n_vars()].iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let term = c * x[pos];
            match index.key(pos).map(|k| k.quantity) {
                Some(Quantity::Pl) => objective.loss += term,
                Some(Quantity::S1 | Quantity::S2) => objective.deviation += term,
                _ => objective.penalty += term,
            }
        }
        objective.total = objective.loss + objective.deviation + objective.penalty;

        let (mut worst, mut worst_rel) = (0.0f64, 0.0f64);
        let mut outcomes = Vec::with_capacity(scenarios.len());
        for s in 0..scenarios.len() {
            let loss: f64 = (0..index.n_branch()).map(|k| x[index.pl(k, s)]).sum();
            let w: Vec<f64> = (0..index.n_bus()).map(|i| x[index.w(i, s)]).collect();
            let voltages: Vec<f64> = w.iter().map(|v| v.max(0.0).sqrt()).collect();
            let susceptance = index
                .candidates()
                .iter()
                .enumerate()
                .filter(|&(c, _)| x[index.delta(c)] > 0.5)
                .map(|(c, &id)| (id, x[index.qv(c, s)] / w[index.candidate_positions()[c]]))
                .collect();
            let mut scenario_worst = 0.0f64;
            for k in 0..index.n_branch() {
                let m = cone_mismatch(case, index, x, k, s).abs();
                let (p, q) = (x[index.pr(k, s)], x[index.qr(k, s)]);
                scenario_worst = scenario_worst.max(m);
                worst_rel = worst_rel.max(m / (p * p + q * q).max(1.0));
            }
            worst = worst.max(scenario_worst);
            outcomes.push(ScenarioOutcome {
                loss_mw: loss * case.base_mva(),
                deviation_w: w.iter().map(|v| (v - 1.0).abs()).sum(),
                deviation_v: voltages.iter().map(|v| (v - 1.0).abs()).sum(),
                susceptance,
                voltages,
                max_cone_mismatch: scenario_worst,
            });
        }
        let weighted = |f: &dyn Fn(&ScenarioOutcome) -> f64| {
            scenarios.iter().zip(&outcomes).map(|(sc, o)| sc.rho * f(o)).sum::<f64>()
        };
        Self {
            status: stats.status,
            chosen,
            loss_mw: weighted(&|o| o.loss_mw),
            deviation_w: weighted(&|o| o.deviation_w),
            deviation_v: weighted(&|o| o.deviation_v),
            scenarios: outcomes,
            objective,
            bound: stats.bound,
            gap: (objective.total - stats.bound).max(0.0),
            nodes: stats.nodes,
            seconds: stats.seconds,
            max_cone_mismatch: worst,
            max_relative_cone_mismatch: worst_rel,
            x: x.to_vec(),
            log: Vec::new(),
        }
    }
}

/// Solves the planning program to a certified gap and extracts the result.
pub fn solve_misocp(
    case: &NetworkCase,
    scenarios: &ScenarioSet,
    program: &Program,
    index: &MicpIndex,
    svc: &SvcSpec,
    settings: &BnbSettings<f64>,
) -> Result<AllocationResult, BnbError> {
    solve_misocp_seeded(case, scenarios, program, index, svc, settings, &[])
}

/// [`solve_misocp`] with known placements (bus ids) tried as incumbents
/// before the search, e.g. the optimum for a smaller budget.
pub fn solve_misocp_seeded(
    case: &NetworkCase,
    scenarios: &ScenarioSet,
    program: &Program,
    index: &MicpIndex,
    svc: &SvcSpec,
    settings: &BnbSettings<f64>,
    seeds: &[Vec<usize>],
) -> Result<AllocationResult, BnbError> {
    let canon = |x: &mut [f64]| minimal_siting(case, index, svc, x);
    let seeds = seeds
        .iter()
        .map(|buses| {
            index
                .candidates()
                .iter()
                .enumerate()
                .filter(|(_, id)| buses.contains(id))
                .map(|(c, _)| index.delta(c))
                .collect()
        })
        .collect();
    let hooks = SearchHooks { canonicalize: Some(&canon), seeds };
    let out = branch_and_bound_with(program, svc.n_v, settings, &hooks)?;
    let stats = SearchStats { status: out.status, bound: out.bound, nodes: out.nodes, seconds: out.seconds };
    match &out.incumbent {
        Some(sol) => {
            let mut r = AllocationResult::extract(case, scenarios, index, program, &sol.x, stats);
            r.log = out.log;
            Ok(r)
        }
        None => Ok(AllocationResult {
            status: out.status,
            chosen: Vec::new(),
            scenarios: Vec::new(),
            loss_mw: f64::NAN,
            deviation_w: f64::NAN,
            deviation_v: f64::NAN,
            objective: ObjectiveBreakdown { loss: f64::NAN, deviation: f64::NAN, penalty: f64::NAN, total: f64::NAN },
            bound: out.bound,
            gap: f64::INFINITY,
            nodes: out.nodes,
            seconds: out.seconds,
            max_cone_mismatch: f64::NAN,
            max_relative_cone_mismatch: f64::NAN,
            x: Vec::new(),
            log: out.log,
        }),
    }
}

/// Objective of the program with exactly the buses in `on` sited, or `None`
/// when that placement is infeasible.
pub fn placement_objective(
    program: &Program,
    index: &MicpIndex,
    on: &[usize],
    settings: &SolverSettings<f64>,
) -> Result<Option<f64>, BnbError> {
    let fixings: BTreeMap<usize, bool> =
        index.candidates().iter().enumerate().map(|(c, id)| (index.delta(c), on.contains(id))).collect();
    let sol = solve_with_fixings(program, &fixings, settings)?;
    Ok(sol.status.is_solved().then_some(sol.objective))
}

/// Greedy growth of `start` up to `n_v` buses, then best-improvement single
/// swaps until none helps. Each move must lower the objective of the
/// fixed-placement program. Returns the placement (sorted bus ids) and its
/// objective.
pub fn local_search(
    program: &Program,
    index: &MicpIndex,
    start: &[usize],
    n_v: usize,
    settings: &SolverSettings<f64>,
) -> Result<Option<(Vec<usize>, f64)>, BnbError> {
    let mut cache: BTreeMap<Vec<usize>, Option<f64>> = BTreeMap::new();
    let mut eval = |set: &[usize]| -> Result<Option<f64>, BnbError> {
        let mut key = set.to_vec();
        key.sort_unstable();
        if let Some(&v) = cache.get(&key) {
            return Ok(v);
        }
        let v = placement_objective(program, index, &key, settings)?;
        cache.insert(key, v);
        Ok(v)
    };
    let mut current: Vec<usize> = start.iter().copied().filter(|id| index.candidates().contains(id)).collect();
    current.sort_unstable();
    current.dedup();
    current.truncate(n_v);
    let Some(mut value) = eval(&current)? else {
        return Ok(None);
    };
    let better = |cand: Option<f64>, best: f64| cand.is_some_and(|v| v < best - 1e-12);

    while current.len() < n_v {
        let mut best: Option<(usize, f64)> = None;
        for &id in index.candidates() {
            if current.contains(&id) {
                continue;
            }
            let mut trial = current.clone();
            trial.push(id);
            let v = eval(&trial)?;
            if better(v, best.map_or(value, |b| b.1)) {
                best = Some((id, v.unwrap()));
            }
        }
        let Some((id, v)) = best else { break };
        current.push(id);
        current.sort_unstable();
        value = v;
    }

    loop {
        let mut best: Option<(Vec<usize>, f64)> = None;
        for out in 0..current.len() {
            for &id in index.candidates() {
                if current.contains(&id) {
                    continue;
                }
                let mut trial = current.clone();
                trial[out] = id;
                trial.sort_unstable();
                let v = eval(&trial)?;
                if better(v, best.as_ref().map_or(value, |b| b.1)) {
                    best = Some((trial, v.unwrap()));
                }
            }
        }
        let Some((set, v)) = best else { break };
        current = set;
        value = v;
    }
    Ok(Some((current, value)))
}

/// The operating point with every siting binary fixed to zero.
pub fn solve_without_devices(
    case: &NetworkCase,
    scenarios: &ScenarioSet,
    program: &Program,
    index: &MicpIndex,
    settings: &BnbSettings<f64>,
) -> Result<AllocationResult, BnbError> {
    let start = std::time::Instant::now();
    let fixings: BTreeMap<usize, bool> = index.delta_range().map(|d| (d, false)).collect();
    let sol = solve_with_fixings(program, &fixings, &settings.solver)?;
    if !sol.status.is_solved() {
        return Err(BnbError::Node { node: 0, depth: 0, status: sol.status });
    }
    let stats = SearchStats {
        status: TreeStatus::Optimal,
        bound: sol.objective,
        nodes: 1,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok(AllocationResult::extract(case, scenarios, index, program, &sol.x, stats))
}
