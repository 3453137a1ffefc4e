//! The mixed-integer planning model.
//!
//! Per scenario the line-flow block of [`crate::lfb`] is combined with the SVC
//! reactive injections, the linearized voltage-deviation term and the exact
//! linearization of `Q^v = δ·b·W`:
//!
//! ```text
//! z·b_min ≤ Q^v ≤ z·b_max
//! δ·vmin² ≤ z ≤ δ·vmax²
//! W − (1−δ)·vmax² ≤ z ≤ W − (1−δ)·vmin²
//! ```
//!
//! with `z` and `Q^v` carried per candidate and scenario and one binary `δ`
//! per candidate shared by all scenarios.

mod index;
pub mod rows;

use serde::{Deserialize, Serialize};

pub use index::{MicpIndex, Quantity, VarKey};
use rows::{Row, Sense};

use crate::conic::{Cone, ProgramBuilder};
use crate::lfb::{assemble_lfb, reactive_balance, FormulationError, LfbConfig};
use crate::network::{NetworkCase, Scenario, ScenarioSet};
use crate::Program;

/// Objective weights: `a1` on losses, `a2` on voltage deviation and `alpha`
/// on the loss-cone auxiliaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    pub a1: f64,
    pub a2: f64,
    pub alpha: f64,
}

impl WeightScheme {
    pub const DEFAULT_ALPHA: f64 = 0.001;

    pub fn new(a1: f64, a2: f64, alpha: f64) -> Result<Self, FormulationError> {
        let w = Self { a1, a2, alpha };
        w.validate()?;
        Ok(w)
    }

    /// Built-in weightings 1–4: (1, 0), (1, 1), (10, 1), (1, 10).
    pub fn preset(case: u8) -> Option<Self> {
        let (a1, a2) = match case {
            1 => (1.0, 0.0),
            2 => (1.0, 1.0),
            3 => (10.0, 1.0),
            4 => (1.0, 10.0),
            _ => return None,
        };
        Some(Self { a1, a2, alpha: Self::DEFAULT_ALPHA })
    }

    pub fn validate(&self) -> Result<(), FormulationError> {
        if !(self.a1 >= 0.0 && self.a2 >= 0.0 && self.a1.is_finite() && self.a2.is_finite()) {
            return Err(FormulationError::Parameter(format!("weights must be nonnegative: {}, {}", self.a1, self.a2)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(FormulationError::Parameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// SVC susceptance range (p.u.) and the number of devices allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvcSpec {
    pub b_min: f64,
    pub b_max: f64,
    pub n_v: usize,
}

impl Default for SvcSpec {
    fn default() -> Self {
        Self { b_min: 0.0, b_max: 0.3, n_v: 0 }
    }
}

impl SvcSpec {
    pub fn with_budget(n_v: usize) -> Self {
        Self { n_v, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), FormulationError> {
        if !(self.b_min <= self.b_max && self.b_min.is_finite() && self.b_max.is_finite()) {
            return Err(FormulationError::Parameter(format!("SVC range [{}, {}]", self.b_min, self.b_max)));
        }
        Ok(())
    }
}

/// Simple bound on one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarBound {
    pub pos: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Objective coefficients over all model variables.
pub fn assemble_objective(index: &MicpIndex, scenarios: &ScenarioSet, w: &WeightScheme) -> Vec<f64> {
    let mut c = vec![0.0; index.n_vars()];
    let (n_branch, n_bus) = (index.n_branch(), index.n_bus());
    for (s, sc) in scenarios.iter().enumerate() {
        for k in 0..n_branch {
            c[index.pl(k, s)] += sc.rho * w.a1;
            c[index.pl_aux(k, s)] += sc.rho * w.alpha;
            if let Some(q) = index.ql_aux(k, s) {
                c[q] += sc.rho * w.alpha;
            }
        }
        for i in 0..n_bus {
            c[index.s1(i, s)] += sc.rho * w.a2;
            c[index.s2(i, s)] += sc.rho * w.a2;
        }
    }
    c
}

/// `W − 1 + s1 − s2 = 0` per bus and scenario.
pub fn emit_abs_linearization(index: &MicpIndex, case: &NetworkCase) -> Vec<Row> {
    let mut rows = Vec::new();
    for s in 0..index.n_scenarios() {
        for (i, bus) in case.buses().iter().enumerate() {
            rows.push(Row::new(
                format!("absdev[{}|{}]", bus.id, s + 1),
                vec![(index.w(i, s), 1.0), (index.s1(i, s), 1.0), (index.s2(i, s), -1.0)],
                Sense::Eq(1.0),
            ));
        }
    }
    rows
}

/// Reactive balance of scenario `s` including SVC injections at candidates.
pub fn emit_svc_balance(case: &NetworkCase, s: usize, scenario: &Scenario, index: &MicpIndex) -> Vec<Row> {
    let mut rows = reactive_balance(case, s, scenario, index);
    for (c, &bus) in index.candidate_positions().iter().enumerate() {
        rows[bus].terms.push((index.qv(c, s), 1.0));
    }
    rows
}

/// Linearization of `Q^v = δ·b·W` for every candidate in scenario `s`.
pub fn emit_trilinear_linearization(case: &NetworkCase, s: usize, index: &MicpIndex, svc: &SvcSpec) -> Vec<Row> {
    let mut rows = Vec::new();
    for (c, (&id, &bus)) in index.candidates().iter().zip(index.candidate_positions()).enumerate() {
        let b = &case.buses()[bus];
        let (lo2, hi2) = (b.v_min * b.v_min, b.v_max * b.v_max);
        let (qv, z, w, d) = (index.qv(c, s), index.z(c, s), index.w(bus, s), index.delta(c));
        let tag = format!("{id}|{}", s + 1);
        rows.push(Row::new(format!("svc_hi[{tag}]"), vec![(qv, 1.0), (z, -svc.b_max)], Sense::Le(0.0)));
        rows.push(Row::new(format!("svc_lo[{tag}]"), vec![(qv, 1.0), (z, -svc.b_min)], Sense::Ge(0.0)));
        rows.push(Row::new(format!("z_on_lo[{tag}]"), vec![(z, 1.0), (d, -lo2)], Sense::Ge(0.0)));
        rows.push(Row::new(format!("z_on_hi[{tag}]"), vec![(z, 1.0), (d, -hi2)], Sense::Le(0.0)));
        rows.push(Row::new(format!("z_w_lo[{tag}]"), vec![(z, 1.0), (w, -1.0), (d, -hi2)], Sense::Ge(-hi2)));
        rows.push(Row::new(format!("z_w_hi[{tag}]"), vec![(z, 1.0), (w, -1.0), (d, -lo2)], Sense::Le(-lo2)));
    }
    rows
}

/// Lowers every siting variable of a relaxation point to the smallest value
/// the linearization admits for the point's `W` and `Q^v`, re-choosing `z`
/// inside its interval. The result is feasible whenever `x` is, and has the
/// same objective since neither `δ` nor `z` carries cost.
pub fn minimal_siting(case: &NetworkCase, index: &MicpIndex, svc: &SvcSpec, x: &mut [f64]) {
    for (c, &bus) in index.candidate_positions().iter().enumerate() {
        let b = &case.buses()[bus];
        let (lo2, hi2) = (b.v_min * b.v_min, b.v_max * b.v_max);
        let mut need = 0.0f64;
        for s in 0..index.n_scenarios() {
            let (w, qv) = (x[index.w(bus, s)], x[index.qv(c, s)].max(0.0));
            if svc.b_max > 0.0 {
                let z_min = qv / svc.b_max;
                need = need.max(z_min / hi2).max(1.0 - (w - z_min) / lo2);
            }
        }
        let d = index.delta(c);
        let delta = need.clamp(0.0, 1.0).min(x[d]);
        x[d] = delta;
        for s in 0..index.n_scenarios() {
            let (w, qv) = (x[index.w(bus, s)], x[index.qv(c, s)].max(0.0));
            let mut lo = (lo2 * delta).max(w - hi2 * (1.0 - delta));
            if svc.b_max > 0.0 {
                lo = lo.max(qv / svc.b_max);
            }
            let mut hi = (hi2 * delta).min(w - lo2 * (1.0 - delta));
            if svc.b_min > 0.0 {
                hi = hi.min(qv / svc.b_min);
            }
            x[index.z(c, s)] = lo.min(hi);
        }
    }
}

/// The device budget row plus generator, voltage, slack and siting bounds.
pub fn emit_budget_and_bounds(index: &MicpIndex, svc: &SvcSpec, case: &NetworkCase) -> (Vec<Row>, Vec<VarBound>) {
    let mut rows = Vec::new();
    if !index.candidates().is_empty() {
        let terms = index.delta_range().map(|d| (d, 1.0)).collect();
        rows.push(Row::new("budget", terms, Sense::Le(svc.n_v as f64)));
    }
    let mut bounds = Vec::new();
    let mut put = |pos, lower, upper| bounds.push(VarBound { pos, lower, upper });
    for s in 0..index.n_scenarios() {
        for (n, g) in case.generators().iter().enumerate() {
            put(index.pg(n, s), g.p_min, g.p_max);
            put(index.qg(n, s), g.q_min, g.q_max);
        }
        for (i, b) in case.buses().iter().enumerate() {
            put(index.w(i, s), b.v_min * b.v_min, b.v_max * b.v_max);
            put(index.s1(i, s), 0.0, f64::INFINITY);
            put(index.s2(i, s), 0.0, f64::INFINITY);
        }
    }
    for d in index.delta_range() {
        put(d, 0.0, 1.0);
    }
    (rows, bounds)
}

fn lower_row(b: &mut ProgramBuilder<f64>, row: &Row) {
    match row.sense {
        Sense::Eq(r) => {
            b.add_eq(&row.terms, r);
        }
        Sense::Le(r) => {
            b.add_le(&row.terms, r);
        }
        Sense::Ge(r) => {
            b.add_ge(&row.terms, r);
        }
        Sense::Range(lo, hi) => {
            b.add_range(&row.terms, lo, hi);
        }
    }
}

/// Assembles the full planning program over all scenarios.
///
/// The first `index.n_vars()` program variables are the model quantities in
/// [`MicpIndex`] order; slacks and cone copies follow. Assembly is
/// deterministic.
pub fn build_micp(
    case: &NetworkCase,
    scenarios: &ScenarioSet,
    weights: &WeightScheme,
    svc: &SvcSpec,
    config: &LfbConfig,
) -> Result<(Program, MicpIndex), FormulationError> {
    weights.validate()?;
    svc.validate()?;
    let index = MicpIndex::allocate(case, scenarios.len(), &case.candidate_buses());
    let n_model = index.n_vars();

    let mut b = ProgramBuilder::<f64>::new();
    for pos in 0..n_model {
        let key = index.key(pos).expect("dense index");
        let cone = match key.quantity {
            Quantity::S1 | Quantity::S2 => Cone::Nonnegative,
            _ => Cone::Free,
        };
        b.add_var(cone);
    }
    for (pos, c) in assemble_objective(&index, scenarios, weights).into_iter().enumerate() {
        b.set_cost(pos, c);
    }
    let (budget, bounds) = emit_budget_and_bounds(&index, svc, case);
    for vb in bounds {
        b.tighten(vb.pos, vb.lower, vb.upper);
    }
    for d in index.delta_range() {
        b.set_binary(d);
    }

    let mut rows = Vec::new();
    let mut cones = Vec::new();
    for (s, sc) in scenarios.iter().enumerate() {
        let block = assemble_lfb(case, s, sc, &index, config)?;
        for &(pos, v) in &block.fixed {
            b.tighten(pos, v, v);
        }
        rows.extend(block.real_balance);
        rows.extend(emit_svc_balance(case, s, sc, &index));
        rows.extend(block.voltage_drop);
        rows.extend(block.loop_angle);
        rows.extend(block.loss_coupling);
        rows.extend(block.loss_aux);
        rows.extend(emit_trilinear_linearization(case, s, &index, svc));
        cones.extend(block.loss_cones);
        cones.extend(block.thermal_cones);
    }
    rows.extend(emit_abs_linearization(&index, case));
    rows.extend(budget);

    for row in &rows {
        lower_row(&mut b, row);
    }
    for cone in &cones {
        let first = b.add_cone(cone.cone, cone.entries.len());
        for (e, entry) in cone.entries.iter().enumerate() {
            // copy − Σ terms = constant
            let mut terms = vec![(first + e, 1.0)];
            terms.extend(entry.terms.iter().map(|&(j, a)| (j, -a)));
            b.add_eq(&terms, entry.constant);
        }
    }
    let program = b.build(n_model).map_err(|e| FormulationError::Parameter(e.to_string()))?;
    Ok((program, index))
}
