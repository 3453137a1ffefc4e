use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use super::{build_cycle_basis, build_incidence, CycleBasis, FlowIncidence};
use crate::conic::Cone;
use crate::micp::rows::{Affine, ConeRecord, Row, Sense};
use crate::micp::MicpIndex;
use crate::network::{scale_loads, NetworkCase, Scenario};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormulationError {
    #[error("branch {0} has non-positive reactance")]
    NonPositiveReactance(usize),
    #[error("index was allocated for {allocated} scenarios, scenario {requested} requested")]
    ScenarioOutOfRange { allocated: usize, requested: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Which susceptance multiplies the squared voltage in the thermal cones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum ChargingConvention {
    /// Per-terminal half of the total line charging (π-model).
    #[default]
    Half,
    /// The total line charging.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfbConfig {
    /// Allowed angle mismatch around each loop (rad).
    pub eps_theta: f64,
    pub charging: ChargingConvention,
}

impl Default for LfbConfig {
    fn default() -> Self {
        Self { eps_theta: PI / 360.0, charging: ChargingConvention::Half }
    }
}

/// Line-flow constraints of one scenario, in terms of [`MicpIndex`] positions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LfbBlock {
    pub scenario: usize,
    pub real_balance: Vec<Row>,
    /// Reactive balance without SVC injections.
    pub reactive_balance: Vec<Row>,
    pub voltage_drop: Vec<Row>,
    pub loop_angle: Vec<Row>,
    pub loss_coupling: Vec<Row>,
    pub loss_aux: Vec<Row>,
    pub loss_cones: Vec<ConeRecord>,
    pub thermal_cones: Vec<ConeRecord>,
    /// Variables pinned by the formulation (losses of zero-resistance branches).
    pub fixed: Vec<(usize, f64)>,
}

impl LfbBlock {
    pub fn rows(&self) -> impl Iterator<Item = &Row> {
        self.real_balance
            .iter()
            .chain(&self.reactive_balance)
            .chain(&self.voltage_drop)
            .chain(&self.loop_angle)
            .chain(&self.loss_coupling)
            .chain(&self.loss_aux)
    }

    pub fn cones(&self) -> impl Iterator<Item = &ConeRecord> {
        self.loss_cones.iter().chain(&self.thermal_cones)
    }

    /// Human-readable constraint listing.
    pub fn listing(&self, index: &MicpIndex) -> String {
        let name = |pos: usize| match index.key(pos) {
            Some(k) => format!("{:?}[{}]", k.quantity, k.entity),
            None => format!("x{pos}"),
        };
        let mut out = format!("# scenario {}\n", self.scenario + 1);
        let render_terms = |terms: &[(usize, f64)]| {
            terms.iter().map(|&(j, a)| format!("{a:+} {}", name(j))).collect::<Vec<_>>().join(" ")
        };
        for row in self.rows() {
            let rhs = match row.sense {
                Sense::Eq(b) => format!("= {b}"),
                Sense::Le(b) => format!("<= {b}"),
                Sense::Ge(b) => format!(">= {b}"),
                Sense::Range(lo, hi) => format!("in [{lo}, {hi}]"),
            };
            let _ = writeln!(out, "{}: {} {rhs}", row.label, render_terms(&row.terms));
        }
        for cone in self.cones() {
            let entries = cone
                .entries
                .iter()
                .map(|e| {
                    let t = render_terms(&e.terms);
                    if e.constant != 0.0 || t.is_empty() {
                        format!("{} {t}", e.constant)
                    } else {
                        t
                    }
                })
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(out, "{}: {:?}({entries})", cone.label, cone.cone);
        }
        for (pos, v) in &self.fixed {
            let _ = writeln!(out, "fix {} = {v}", name(*pos));
        }
        out
    }
}

/// Reactive power balance per bus with the fixed susceptance term and no
/// SVC injection.
pub fn reactive_balance(case: &NetworkCase, s: usize, scenario: &Scenario, index: &MicpIndex) -> Vec<Row> {
    let inc = build_incidence(case);
    let b_fixed = case.fixed_susceptance();
    let (_, qd) = bus_demand(case, scenario);
    (0..case.buses().len())
        .map(|i| {
            let mut terms = Vec::new();
            for (n, g) in case.generators().iter().enumerate() {
                if case.pos(g.bus) == i {
                    terms.push((index.qg(n, s), 1.0));
                }
            }
            if b_fixed[i] != 0.0 {
                terms.push((index.w(i, s), b_fixed[i]));
            }
            flow_terms(&inc, i, s, &mut terms, |k, s| index.qr(k, s), |k, s| index.ql(k, s));
            Row::new(format!("qbal[{}]", case.buses()[i].id), terms, Sense::Eq(qd[i]))
        })
        .collect()
}

fn flow_terms(
    inc: &FlowIncidence,
    bus: usize,
    s: usize,
    terms: &mut Vec<(usize, f64)>,
    flow: impl Fn(usize, usize) -> usize,
    loss: impl Fn(usize, usize) -> usize,
) {
    for k in 0..inc.n_branch() {
        let mf = inc.m_f(bus, k);
        if mf != 0 {
            terms.push((flow(k, s), -(mf as f64)));
        }
        if inc.m_l(bus, k) != 0 {
            terms.push((loss(k, s), -1.0));
        }
    }
}

fn bus_demand(case: &NetworkCase, scenario: &Scenario) -> (Vec<f64>, Vec<f64>) {
    let n = case.buses().len();
    let (mut pd, mut qd) = (vec![0.0; n], vec![0.0; n]);
    for l in scale_loads(case, scenario) {
        let i = case.pos(l.bus);
        pd[i] += l.p_base;
        qd[i] += l.q_base;
    }
    (pd, qd)
}

/// Assembles the line-flow constraints of scenario `s`.
pub fn assemble_lfb(
    case: &NetworkCase,
    s: usize,
    scenario: &Scenario,
    index: &MicpIndex,
    config: &LfbConfig,
) -> Result<LfbBlock, FormulationError> {
    if s >= index.n_scenarios() {
        return Err(FormulationError::ScenarioOutOfRange { allocated: index.n_scenarios(), requested: s });
    }
    if !(config.eps_theta >= 0.0) {
        return Err(FormulationError::Parameter(format!("eps_theta = {}", config.eps_theta)));
    }
    if let Some(k) = case.branches().iter().position(|b| !(b.x > 0.0)) {
        return Err(FormulationError::NonPositiveReactance(k));
    }
    let inc = build_incidence(case);
    let basis: CycleBasis = build_cycle_basis(case);
    let (pd, _) = bus_demand(case, scenario);
    let mut block = LfbBlock { scenario: s, ..Default::default() };

    for (i, bus) in case.buses().iter().enumerate() {
        let mut terms = Vec::new();
        for (n, g) in case.generators().iter().enumerate() {
            if case.pos(g.bus) == i {
                terms.push((index.pg(n, s), 1.0));
            }
        }
        flow_terms(&inc, i, s, &mut terms, |k, s| index.pr(k, s), |k, s| index.pl(k, s));
        block.real_balance.push(Row::new(format!("pbal[{}]", bus.id), terms, Sense::Eq(pd[i])));
    }
    block.reactive_balance = reactive_balance(case, s, scenario, index);

    for (k, br) in case.branches().iter().enumerate() {
        let (i, j) = (inc.sending(k), inc.receiving(k));
        let tag = format!("{}-{}", br.from_bus, br.to_bus);
        let (pr, qr, pl, ql) = (index.pr(k, s), index.qr(k, s), index.pl(k, s), index.ql(k, s));
        let (wi, wj) = (index.w(i, s), index.w(j, s));

        block.voltage_drop.push(Row::new(
            format!("vdrop[{tag}]"),
            vec![
                (wi, 1.0 / (br.tau * br.tau)),
                (wj, -1.0),
                (pr, -2.0 * br.r),
                (qr, -2.0 * br.x),
                (pl, -br.r),
                (ql, -br.x),
            ],
            Sense::Eq(0.0),
        ));

        if br.r > 0.0 {
            block.loss_coupling.push(Row::new(
                format!("lossratio[{tag}]"),
                vec![(pl, br.x), (ql, -br.r)],
                Sense::Eq(0.0),
            ));
            block.loss_aux.push(Row::new(
                format!("ploss[{tag}]"),
                vec![(pl, 1.0), (index.pl_aux(k, s), -2.0 * br.r)],
                Sense::Eq(0.0),
            ));
        } else {
            let q_aux = index.ql_aux(k, s).expect("zero-resistance branch has a reactive auxiliary");
            block.loss_aux.push(Row::new(
                format!("qloss[{tag}]"),
                vec![(ql, 1.0), (q_aux, -2.0 * br.x)],
                Sense::Eq(0.0),
            ));
            block.fixed.push((pl, 0.0));
            block.fixed.push((index.pl_aux(k, s), 0.0));
        }

        block.loss_cones.push(ConeRecord {
            label: format!("losscone[{tag}]"),
            cone: Cone::RotatedSecondOrder,
            entries: vec![Affine::var(index.cone_aux(k, s)), Affine::var(wj), Affine::var(pr), Affine::var(qr)],
        });

        if br.s_max > 0.0 {
            let b = match config.charging {
                ChargingConvention::Half => 0.5 * br.b_ch,
                ChargingConvention::Full => br.b_ch,
            };
            block.thermal_cones.push(ConeRecord {
                label: format!("thermal_to[{tag}]"),
                cone: Cone::SecondOrder,
                entries: vec![Affine::constant(br.s_max), Affine::var(pr), Affine::var(qr).plus(wj, b)],
            });
            block.thermal_cones.push(ConeRecord {
                label: format!("thermal_from[{tag}]"),
                cone: Cone::SecondOrder,
                entries: vec![
                    Affine::constant(br.s_max),
                    Affine::var(pr).plus(pl, 1.0),
                    Affine::var(qr).plus(ql, 1.0).plus(wi, -b),
                ],
            });
        }
    }

    for (c, cycle) in basis.loops().iter().enumerate() {
        let mut terms = Vec::new();
        let mut shift = 0.0;
        for &(k, sign) in cycle {
            let br = &case.branches()[k];
            let sgn = sign as f64;
            terms.push((index.pr(k, s), sgn * br.tau * br.x));
            if br.r != 0.0 {
                terms.push((index.qr(k, s), -sgn * br.tau * br.r));
            }
            shift += sgn * br.theta_ps;
        }
        block.loop_angle.push(Row::new(
            format!("loop[{}]", c + 1),
            terms,
            Sense::Range(-config.eps_theta - shift, config.eps_theta - shift),
        ));
    }
    Ok(block)
}

/// Left side of the loop-angle constraint for every loop, evaluated at `x`.
pub fn loop_residuals(case: &NetworkCase, s: usize, index: &MicpIndex, x: &[f64]) -> Vec<f64> {
    build_cycle_basis(case)
        .loops()
        .iter()
        .map(|cycle| {
            cycle
                .iter()
                .map(|&(k, sign)| {
                    let br = &case.branches()[k];
                    sign as f64 * (br.tau * (x[index.pr(k, s)] * br.x - x[index.qr(k, s)] * br.r) + br.theta_ps)
                })
                .sum()
        })
        .collect()
}
