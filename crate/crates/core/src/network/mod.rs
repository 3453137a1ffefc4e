//! Physical network data: buses, π-model branches, generators and loads.
//!
//! Every quantity is stored in per-unit on the case's MVA base; angles are in
//! radians. A [`NetworkCase`] is validated on construction and immutable
//! afterwards.

mod matpower;
mod scenario;

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use matpower::{parse_case, serialize_case};
pub use scenario::{build_scenarios, parse_scenarios_csv, scale_loads, Scenario, ScenarioSet};

const IEEE30: &str = include_str!("../../data/case_ieee30.m");
const TWO_BUS: &str = include_str!("../../data/case2.m");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid case: {0}")]
    Validation(String),
    #[error("invalid scenario set: {0}")]
    Scenario(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub v_min: f64,
    pub v_max: f64,
    /// Fixed shunt susceptance at the bus.
    pub shunt_b: f64,
    /// Eligible to host an SVC.
    pub is_candidate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from_bus: usize,
    pub to_bus: usize,
    pub r: f64,
    pub x: f64,
    /// Total line-charging susceptance; half sits at each terminal.
    pub b_ch: f64,
    /// Off-nominal tap ratio on the from side.
    pub tau: f64,
    pub theta_ps: f64,
    /// Apparent-power rating; `0` means unlimited.
    pub s_max: f64,
}

impl Branch {
    pub fn is_transformer(&self) -> bool {
        self.tau != 1.0 || self.theta_ps != 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub bus: usize,
    pub p_base: f64,
    pub q_base: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkCase {
    base_mva: f64,
    buses: Vec<Bus>,
    branches: Vec<Branch>,
    generators: Vec<Generator>,
    loads: Vec<Load>,
    position: HashMap<usize, usize>,
}

impl NetworkCase {
    /// Validates the data and builds the case.
    pub fn new(
        base_mva: f64,
        buses: Vec<Bus>,
        branches: Vec<Branch>,
        generators: Vec<Generator>,
        loads: Vec<Load>,
    ) -> Result<Self, NetworkError> {
        let invalid = |m: String| Err(NetworkError::Validation(m));
        if !(base_mva.is_finite() && base_mva > 0.0) {
            return invalid(format!("base MVA must be positive, got {base_mva}"));
        }
        if buses.is_empty() {
            return invalid("case has no buses".into());
        }
        let mut position = HashMap::with_capacity(buses.len());
        for (i, bus) in buses.iter().enumerate() {
            if position.insert(bus.id, i).is_some() {
                return invalid(format!("duplicate bus id {}", bus.id));
            }
            if !(bus.v_min > 0.0 && bus.v_min < bus.v_max) {
                return invalid(format!(
                    "bus {}: voltage limits must satisfy 0 < v_min < v_max (got {}, {})",
                    bus.id, bus.v_min, bus.v_max
                ));
            }
            if !bus.shunt_b.is_finite() {
                return invalid(format!("bus {}: non-finite shunt", bus.id));
            }
        }
        for (k, br) in branches.iter().enumerate() {
            for end in [br.from_bus, br.to_bus] {
                if !position.contains_key(&end) {
                    return invalid(format!("branch {} references nonexistent bus {end}", k + 1));
                }
            }
            if br.from_bus == br.to_bus {
                return invalid(format!("branch {} is a self-loop at bus {}", k + 1, br.from_bus));
            }
            if !(br.x > 0.0) {
                return invalid(format!("branch {}: reactance must be positive, got {}", k + 1, br.x));
            }
            if !(br.r >= 0.0) {
                return invalid(format!("branch {}: negative resistance {}", k + 1, br.r));
            }
            if !(br.tau > 0.0) {
                return invalid(format!("branch {}: tap ratio must be positive", k + 1));
            }
            if !(br.s_max >= 0.0) || !br.b_ch.is_finite() || !br.theta_ps.is_finite() {
                return invalid(format!("branch {}: invalid rating or charging data", k + 1));
            }
        }
        for (n, g) in generators.iter().enumerate() {
            if !position.contains_key(&g.bus) {
                return invalid(format!("generator {} references nonexistent bus {}", n + 1, g.bus));
            }
            if !(g.p_min <= g.p_max) || !(g.q_min <= g.q_max) {
                return invalid(format!("generator {} at bus {}: inverted limits", n + 1, g.bus));
            }
        }
        for (m, l) in loads.iter().enumerate() {
            if !position.contains_key(&l.bus) {
                return invalid(format!("load {} references nonexistent bus {}", m + 1, l.bus));
            }
            if !(l.p_base.is_finite() && l.q_base.is_finite()) {
                return invalid(format!("load {} at bus {}: non-finite demand", m + 1, l.bus));
            }
        }
        let case = Self { base_mva, buses, branches, generators, loads, position };
        if case.component_count() != 1 {
            return invalid("network graph is disconnected".into());
        }
        Ok(case)
    }

    pub fn base_mva(&self) -> f64 {
        self.base_mva
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn loads(&self) -> &[Load] {
        &self.loads
    }

    /// Storage position of a bus id.
    pub fn bus_position(&self, id: usize) -> Option<usize> {
        self.position.get(&id).copied()
    }

    pub(crate) fn pos(&self, id: usize) -> usize {
        self.position[&id]
    }

    /// Bus ids hosting at least one generator, ascending.
    pub fn generator_buses(&self) -> BTreeSet<usize> {
        self.generators.iter().map(|g| g.bus).collect()
    }

    /// Buses eligible for an SVC: flagged candidates without a generator,
    /// in ascending id order.
    pub fn candidate_buses(&self) -> Vec<usize> {
        let gen_buses = self.generator_buses();
        let mut ids: Vec<usize> =
            self.buses.iter().filter(|b| b.is_candidate && !gen_buses.contains(&b.id)).map(|b| b.id).collect();
        ids.sort_unstable();
        ids
    }

    /// Bus-level fixed susceptance: the bus shunt plus the π-model charging
    /// halves of incident branches, scaled by 1/τ² on the tapped side.
    pub fn fixed_susceptance(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.buses.iter().map(|bus| bus.shunt_b).collect();
        for br in &self.branches {
            let half = 0.5 * br.b_ch;
            b[self.pos(br.from_bus)] += half / (br.tau * br.tau);
            b[self.pos(br.to_bus)] += half;
        }
        b
    }

    /// Number of connected components of the bus/branch graph.
    pub fn component_count(&self) -> usize {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for br in &self.branches {
            let (i, j) = (self.pos(br.from_bus), self.pos(br.to_bus));
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; n];
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        components
    }

    pub fn total_base_load(&self) -> (f64, f64) {
        self.loads.iter().fold((0.0, 0.0), |(p, q), l| (p + l.p_base, q + l.q_base))
    }
}

/// The IEEE 30-bus test system shipped with the crate.
pub fn ieee30() -> NetworkCase {
    parse_case(IEEE30).expect("bundled IEEE 30-bus case parses")
}

/// A two-bus radial system: generator at bus 1, 1 p.u. load at bus 2.
pub fn two_bus() -> NetworkCase {
    parse_case(TWO_BUS).expect("bundled two-bus case parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bus(id: usize) -> Bus {
        Bus { id, v_min: 0.9, v_max: 1.1, shunt_b: 0.0, is_candidate: true }
    }

    fn line(f: usize, t: usize) -> Branch {
        Branch { from_bus: f, to_bus: t, r: 0.01, x: 0.1, b_ch: 0.02, tau: 1.0, theta_ps: 0.0, s_max: 0.0 }
    }

    #[test]
    fn ieee30_shape() {
        let case = ieee30();
        assert_eq!(case.buses().len(), 30);
        assert_eq!(case.branches().len(), 41);
        assert_eq!(case.generators().len(), 6);
        assert_eq!(case.branches().iter().filter(|b| b.is_transformer()).count(), 4);
        assert_eq!(case.candidate_buses().len(), 24);
    }

    #[test]
    fn candidates_exclude_generator_buses() {
        let case = ieee30();
        let gens = case.generator_buses();
        let cands = case.candidate_buses();
        assert!(cands.iter().all(|b| !gens.contains(b)));
        assert_eq!(cands.len() + gens.len(), case.buses().len());
        assert!(cands.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn two_bus_candidates() {
        assert_eq!(two_bus().candidate_buses(), vec![2]);
    }

    #[test]
    fn all_generator_buses_leave_no_candidates() {
        let gens = (1..=2).map(|b| Generator { bus: b, p_min: 0.0, p_max: 1.0, q_min: -1.0, q_max: 1.0 }).collect();
        let case = NetworkCase::new(100.0, vec![bus(1), bus(2)], vec![line(1, 2)], gens, vec![]).unwrap();
        assert!(case.candidate_buses().is_empty());
    }

    #[test]
    fn dangling_branch_is_rejected() {
        let err = NetworkCase::new(100.0, vec![bus(1), bus(2)], vec![line(1, 99)], vec![], vec![]).unwrap_err();
        assert!(err.to_string().contains("nonexistent bus 99"), "{err}");
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let err = NetworkCase::new(100.0, vec![bus(1), bus(2), bus(3)], vec![line(1, 2)], vec![], vec![]).unwrap_err();
        assert!(err.to_string().contains("disconnected"));
    }

    #[test]
    fn nonpositive_reactance_is_rejected() {
        let mut br = line(1, 2);
        br.x = 0.0;
        assert!(NetworkCase::new(100.0, vec![bus(1), bus(2)], vec![br], vec![], vec![]).is_err());
    }

    #[test]
    fn fixed_susceptance_splits_charging_and_scales_tap_side() {
        let mut br = line(1, 2);
        br.tau = 0.5;
        let mut b1 = bus(1);
        b1.shunt_b = 0.1;
        let case = NetworkCase::new(100.0, vec![b1, bus(2)], vec![br], vec![], vec![]).unwrap();
        let b = case.fixed_susceptance();
        assert!((b[0] - (0.1 + 0.01 / 0.25)).abs() < 1e-15);
        assert!((b[1] - 0.01).abs() < 1e-15);
    }
}
