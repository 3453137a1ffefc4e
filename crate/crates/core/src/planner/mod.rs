//! End-to-end planning runs: baselines, budget sweeps, validation and report
//! files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::acpf::{validate, ValidationReport};
use crate::bnb::{
    local_search, solve_misocp_seeded, solve_without_devices, write_node_log, AllocationResult, BnbError, BnbSettings,
    TreeStatus,
};
use crate::lfb::{FormulationError, LfbConfig};
use crate::micp::{build_micp, SvcSpec, WeightScheme};
use crate::network::{ieee30, parse_case, parse_scenarios_csv, NetworkCase, NetworkError, ScenarioSet};

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no result for weight case `{label}` with N_v = {n_v}")]
    MissingCell { label: String, n_v: usize },
    #[error("scenario {0} does not exist")]
    MissingScenario(usize),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PlannerError + '_ {
    move |source| PlannerError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CaseSource {
    Ieee30,
    Path(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    /// The fifteen-level load/probability table shipped with the crate.
    TableOne,
    Path(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case: CaseSource,
    pub scenarios: ScenarioSource,
    /// Labelled objective weightings; `alpha` is overridden by [`RunConfig::alpha`].
    pub weights: Vec<(String, WeightScheme)>,
    pub n_v: Vec<usize>,
    /// Susceptance range of one device (p.u.).
    pub svc_range: (f64, f64),
    pub alpha: f64,
    pub eps_theta: f64,
    pub bnb: BnbSettings<f64>,
    /// Seed each search with a greedy/swap placement grown from the previous
    /// budget's optimum.
    pub heuristic: bool,
    pub validate: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            case: CaseSource::Ieee30,
            scenarios: ScenarioSource::TableOne,
            weights: (1..=4).map(|k| (format!("case{k}"), WeightScheme::preset(k).unwrap())).collect(),
            n_v: (1..=5).collect(),
            svc_range: (0.0, 0.3),
            alpha: WeightScheme::DEFAULT_ALPHA,
            eps_theta: LfbConfig::default().eps_theta,
            bnb: BnbSettings::default(),
            heuristic: true,
            validate: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), PlannerError> {
        let bad = |m: &str| Err(PlannerError::Config(m.into()));
        if self.weights.is_empty() {
            return bad("at least one weight case is required");
        }
        let (lo, hi) = self.svc_range;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return bad("SVC range must satisfy 0 ≤ lo ≤ hi");
        }
        if !(self.eps_theta > 0.0) {
            return bad("eps-theta must be positive");
        }
        for (label, w) in &self.weights {
            WeightScheme { alpha: self.alpha, ..*w }
                .validate()
                .map_err(|e| PlannerError::Config(format!("{label}: {e}")))?;
        }
        self.bnb.validate().map_err(|e| PlannerError::Config(e.to_string()))
    }

    pub fn load_case(&self) -> Result<NetworkCase, PlannerError> {
        match &self.case {
            CaseSource::Ieee30 => Ok(ieee30()),
            CaseSource::Path(p) => Ok(parse_case(&fs::read_to_string(p).map_err(io_err(p))?)?),
        }
    }

    pub fn load_scenarios(&self) -> Result<ScenarioSet, PlannerError> {
        match &self.scenarios {
            ScenarioSource::TableOne => Ok(ScenarioSet::table_one()),
            ScenarioSource::Path(p) => Ok(parse_scenarios_csv(&fs::read_to_string(p).map_err(io_err(p))?)?),
        }
    }
}

/// One planning solve: the baseline (`n_v = 0`) or a budgeted search.
#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub n_v: usize,
    pub result: Option<AllocationResult>,
    pub validation: Option<ValidationReport>,
    pub error: Option<String>,
}

impl Cell {
    fn failed(n_v: usize, e: impl ToString) -> Self {
        Self { n_v, result: None, validation: None, error: Some(e.to_string()) }
    }

    pub fn is_failed(&self) -> bool {
        self.error.is_some() || self.result.as_ref().map_or(true, |r| r.status == TreeStatus::Infeasible)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub label: String,
    pub weights: WeightScheme,
    pub baseline: Cell,
    pub cells: Vec<Cell>,
}

impl CaseReport {
    pub fn cell(&self, n_v: usize) -> Option<&Cell> {
        if n_v == 0 {
            return Some(&self.baseline);
        }
        self.cells.iter().find(|c| c.n_v == n_v)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub n_scenarios: usize,
    pub base_mva: f64,
    /// Bus ids in case storage order (the order of reported voltages).
    pub bus_ids: Vec<usize>,
    pub svc_range: (f64, f64),
    pub cases: Vec<CaseReport>,
}

impl RunReport {
    pub fn case(&self, label: &str) -> Option<&CaseReport> {
        self.cases.iter().find(|c| c.label == label)
    }

    pub fn failed_cells(&self) -> usize {
        self.cases.iter().flat_map(|c| std::iter::once(&c.baseline).chain(&c.cells)).filter(|c| c.is_failed()).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per cell, baselines first in each case; MW and p.u. columns.
    pub fn table3_csv(&self) -> String {
        let mut out = String::from(
            "case,n_v,status,loss_mw,loss_pu,dev_v_pu,dev_w_pu,locations,max_cone_error,objective,bound,gap,nodes,time_s\n",
        );
        for case in &self.cases {
            for cell in std::iter::once(&case.baseline).chain(&case.cells) {
                let _ = match &cell.result {
                    Some(r) => writeln!(
                        out,
                        "{},{},{:?},{:.6},{:.8},{:.6},{:.6},{},{:.3e},{:.9},{:.9},{:.3e},{},{:.2}",
                        case.label,
                        cell.n_v,
                        r.status,
                        r.loss_mw,
                        r.loss_mw / self.base_mva,
                        r.deviation_v,
                        r.deviation_w,
                        r.chosen.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" "),
                        r.max_cone_mismatch,
                        r.objective.total,
                        r.bound,
                        r.gap,
                        r.nodes,
                        r.seconds
                    ),
                    None => writeln!(out, "{},{},Failed,,,,,,,,,,,", case.label, cell.n_v),
                };
            }
        }
        out
    }

    /// Human-readable table in the same layout as [`RunReport::table3_csv`].
    pub fn render(&self) -> String {
        let mut out = String::new();
        for case in &self.cases {
            let w = case.weights;
            let _ = writeln!(out, "{} (A1 = {}, A2 = {}, α = {})", case.label, w.a1, w.a2, w.alpha);
            if let Some(b) = &case.baseline.result {
                let _ = writeln!(out, "  no devices: P_l0 = {:.3} MW, ΔV0 = {:.3} p.u.", b.loss_mw, b.deviation_v);
            }
            let _ = writeln!(
                out,
                "  {:>3} {:>9} {:>8} {:>8} {:<22} {:>9} {:>9} {:>7} {:>8}  status",
                "N_v", "P_l (MW)", "ΔV", "ΔW", "locations", "cone", "gap", "nodes", "time(s)"
            );
            for cell in &case.cells {
                match (&cell.result, &cell.error) {
                    (Some(r), _) => {
                        let _ = writeln!(
                            out,
                            "  {:>3} {:>9.3} {:>8.3} {:>8.3} {:<22} {:>9.1e} {:>9.1e} {:>7} {:>8.1}  {:?}",
                            cell.n_v,
                            r.loss_mw,
                            r.deviation_v,
                            r.deviation_w,
                            format!("{:?}", r.chosen),
                            r.max_cone_mismatch,
                            r.gap,
                            r.nodes,
                            r.seconds,
                            r.status
                        );
                    }
                    (None, e) => {
                        let _ = writeln!(out, "  {:>3} failed: {}", cell.n_v, e.as_deref().unwrap_or("unknown"));
                    }
                }
            }
        }
        out
    }

    /// Writes `report.json`, `table3.csv` and per-cell search logs under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), PlannerError> {
        let logs = dir.join("logs");
        fs::create_dir_all(&logs).map_err(io_err(&logs))?;
        let put = |name: &Path, text: &str| fs::write(name, text).map_err(io_err(name));
        put(&dir.join("report.json"), &self.to_json())?;
        put(&dir.join("table3.csv"), &self.table3_csv())?;
        for case in &self.cases {
            for cell in &case.cells {
                let Some(r) = &cell.result else { continue };
                let mut buf = Vec::new();
                write_node_log(&r.log, &mut buf).expect("in-memory write");
                let name = logs.join(format!("{}_nv{}_bnb.csv", case.label, cell.n_v));
                put(&name, &String::from_utf8_lossy(&buf))?;
            }
            if let Some(v) = &case.baseline.validation {
                put(&logs.join(format!("{}_baseline_ac.txt", case.label)), &v.to_table())?;
            }
            for cell in &case.cells {
                if let Some(v) = &cell.validation {
                    put(&logs.join(format!("{}_nv{}_ac.txt", case.label, cell.n_v)), &v.to_table())?;
                }
            }
        }
        Ok(())
    }
}

fn model(
    case: &NetworkCase,
    scenarios: &ScenarioSet,
    weights: &WeightScheme,
    svc: &SvcSpec,
    config: &RunConfig,
) -> Result<(crate::Program, crate::micp::MicpIndex), FormulationError> {
    build_micp(case, scenarios, weights, svc, &LfbConfig { eps_theta: config.eps_theta, ..Default::default() })
}

/// Runs the baseline and every budget of every weight case.
///
/// Budgets are solved in ascending order and each search is seeded with the
/// previous budget's placement, so reported objectives cannot increase with
/// the budget even when a search stops at a limit. A failing cell is recorded
/// and the run moves on.
pub fn run(config: &RunConfig) -> Result<RunReport, PlannerError> {
    config.validate()?;
    let case = config.load_case()?;
    let scenarios = config.load_scenarios()?;
    let mut budgets = config.n_v.clone();
    budgets.sort_unstable();
    budgets.dedup();
    budgets.retain(|&n| n > 0);

    let mut cases = Vec::new();
    for (label, w) in &config.weights {
        let weights = WeightScheme { alpha: config.alpha, ..*w };
        let svc_for = |n_v| SvcSpec { b_min: config.svc_range.0, b_max: config.svc_range.1, n_v };
        let validated = |r: AllocationResult| {
            let v = config.validate.then(|| validate(&r, &case, &scenarios));
            (r, v)
        };

        let baseline = match model(&case, &scenarios, &weights, &svc_for(0), config) {
            Ok((p, index)) => match solve_without_devices(&case, &scenarios, &p, &index, &config.bnb) {
                Ok(r) => {
                    let (r, v) = validated(r);
                    Cell { n_v: 0, result: Some(r), validation: v, error: None }
                }
                Err(e) => Cell::failed(0, e),
            },
            Err(e) => Cell::failed(0, e),
        };

        let mut cells = Vec::new();
        let mut previous: Vec<usize> = Vec::new();
        for &n_v in &budgets {
            let svc = svc_for(n_v);
            let (p, index) = match model(&case, &scenarios, &weights, &svc, config) {
                Ok(m) => m,
                Err(e) => {
                    cells.push(Cell::failed(n_v, e));
                    continue;
                }
            };
            let mut seeds = vec![previous.clone()];
            if config.heuristic {
                match local_search(&p, &index, &previous, n_v, &config.bnb.solver) {
                    Ok(Some((set, _))) => seeds.push(set),
                    Ok(None) => {}
                    Err(e) => {
                        cells.push(Cell::failed(n_v, e));
                        continue;
                    }
                }
            }
            let outcome: Result<AllocationResult, BnbError> =
                solve_misocp_seeded(&case, &scenarios, &p, &index, &svc, &config.bnb, &seeds);
            match outcome {
                Ok(r) => {
                    if r.status != TreeStatus::Infeasible {
                        previous = r.chosen.clone();
                    }
                    let (r, v) = validated(r);
                    cells.push(Cell { n_v, result: Some(r), validation: v, error: None });
                }
                Err(e) => cells.push(Cell::failed(n_v, e)),
            }
        }
        cases.push(CaseReport { label: label.clone(), weights, baseline, cells });
    }
    Ok(RunReport {
        n_scenarios: scenarios.len(),
        base_mva: case.base_mva(),
        bus_ids: case.buses().iter().map(|b| b.id).collect(),
        svc_range: config.svc_range,
        cases,
    })
}

/// Writes `loss_by_scenario.csv` for one cell and `voltage_profile_s<k>.csv`
/// for each requested 1-based scenario, each against the no-device baseline of
/// the same weight case. Returns the written paths.
pub fn emit_plot_data(
    report: &RunReport,
    label: &str,
    n_v: usize,
    scenario_ids: &[usize],
    dir: &Path,
) -> Result<Vec<PathBuf>, PlannerError> {
    let missing = || PlannerError::MissingCell { label: label.to_string(), n_v };
    let case = report.case(label).ok_or_else(missing)?;
    let with = case.cell(n_v).and_then(|c| c.result.as_ref()).ok_or_else(missing)?;
    let without =
        case.baseline.result.as_ref().ok_or_else(|| PlannerError::MissingCell { label: label.to_string(), n_v: 0 })?;
    if let Some(&bad) = scenario_ids.iter().find(|&&k| k == 0 || k > with.scenarios.len()) {
        return Err(PlannerError::MissingScenario(bad));
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let mut written = Vec::new();
    let path = dir.join("loss_by_scenario.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| PlannerError::Io { path: path.clone(), source: e.into() })?;
    let to_io = |path: &Path| {
        let path = path.to_path_buf();
        move |e: csv::Error| PlannerError::Io { path, source: e.into() }
    };
    w.write_record(["scenario", "loss_no_svc_mw", "loss_with_svc_mw", "loss_no_svc_pu", "loss_with_svc_pu"])
        .map_err(to_io(&path))?;
    for (k, (a, b)) in without.scenarios.iter().zip(&with.scenarios).enumerate() {
        w.serialize((k + 1, a.loss_mw, b.loss_mw, a.loss_mw / report.base_mva, b.loss_mw / report.base_mva))
            .map_err(to_io(&path))?;
    }
    w.flush().map_err(io_err(&path))?;
    written.push(path);

    for &k in scenario_ids {
        let path = dir.join(format!("voltage_profile_s{k}.csv"));
        let mut w =
            csv::Writer::from_path(&path).map_err(|e| PlannerError::Io { path: path.clone(), source: e.into() })?;
        w.write_record(["bus", "v_no_svc", "v_with_svc"]).map_err(to_io(&path))?;
        let (a, b) = (&without.scenarios[k - 1].voltages, &with.scenarios[k - 1].voltages);
        for ((id, va), vb) in report.bus_ids.iter().zip(a).zip(b) {
            w.serialize((id, va, vb)).map_err(to_io(&path))?;
        }
        w.flush().map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_range() {
        let c = RunConfig { svc_range: (0.3, 0.1), ..Default::default() };
        assert!(matches!(c.validate(), Err(PlannerError::Config(_))));
    }

    #[test]
    fn empty_budget_list_is_baseline_only() {
        let c = RunConfig {
            weights: vec![("case1".into(), WeightScheme::preset(1).unwrap())],
            n_v: vec![],
            ..Default::default()
        };
        let rep = run(&c).unwrap();
        assert_eq!(rep.cases.len(), 1);
        assert!(rep.cases[0].cells.is_empty());
        assert!(rep.cases[0].baseline.result.is_some());
        assert_eq!(rep.failed_cells(), 0);
        assert_eq!(rep.table3_csv().lines().count(), 2);
    }
}
