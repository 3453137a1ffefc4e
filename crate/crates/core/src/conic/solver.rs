//! Interior-point solution of continuous conic programs.
//!
//! The program is presolved (fixed variables substituted, emptied equality
//! rows dropped or reported infeasible, cone members that appear in a single
//! equality row solved out of it) and lowered to the slack form
//! `A x + s = b, s ∈ K` of the Clarabel backend: a homogeneous self-dual
//! embedding with Nesterov-Todd scaling, Mehrotra predictor-corrector steps,
//! Ruiz equilibration and a quasi-definite LDLᵀ factorization of the KKT system
//! with static regularization. Rotated cones are lowered through the
//! orthogonal map `(u, v, w) ↦ ((u+v)/√2, (u-v)/√2, w)`.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::sync::{Arc, Mutex};

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultInfo, DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use serde::Serialize;
use thiserror::Error;

use super::program::{Cone, ConicProgram, ProgramError};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings<T> {
    pub feas_tol: T,
    pub gap_tol: T,
    pub max_iters: u32,
    /// Fraction of the step to the cone boundary.
    pub step_fraction: T,
    /// Re-solve with iterative refinement of the KKT solves when the first
    /// (unrefined, faster) pass ends short of [`SolveStatus::Optimal`].
    pub refine_retry: bool,
}

impl<T: Scalar> Default for SolverSettings<T> {
    fn default() -> Self {
        Self {
            feas_tol: T::lit(1e-8),
            gap_tol: T::lit(1e-8),
            max_iters: 200,
            step_fraction: T::lit(0.99),
            refine_retry: true,
        }
    }
}

impl<T: Scalar> SolverSettings<T> {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.feas_tol > T::zero() && self.gap_tol > T::zero()) {
            return Err(SolverError::Settings("tolerances must be positive".into()));
        }
        if !(self.step_fraction > T::zero() && self.step_fraction < T::one()) {
            return Err(SolverError::Settings("step fraction must lie in (0, 1)".into()));
        }
        if self.max_iters == 0 {
            return Err(SolverError::Settings("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    /// Converged to the backend's reduced tolerances only.
    NearOptimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NumericalFailure,
}

impl SolveStatus {
    /// Whether the primal point is a usable optimum.
    pub fn is_solved(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error("invalid settings: {0}")]
    Settings(String),
    #[error("backend rejected the problem: {0}")]
    Backend(String),
}

/// Residuals at the returned point. `primal_feas`, `dual_feas` and `rel_gap`
/// are the backend's scaled termination measures; `max_violation` is the
/// largest absolute equality, bound or cone violation in the original program.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport<T> {
    pub primal_feas: T,
    pub dual_feas: T,
    pub rel_gap: T,
    pub max_violation: T,
}

/// One interior-point iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord<T> {
    pub iteration: u32,
    pub mu: T,
    pub sigma: T,
    pub step_length: T,
    pub cost_primal: T,
    pub cost_dual: T,
    pub res_primal: T,
    pub res_dual: T,
    pub gap_abs: T,
    pub gap_rel: T,
}

/// Result of a continuous solve.
///
/// Dual sign conventions: at an optimum
/// `c + Aᵀy - dual_cone - lower_dual + upper_dual = 0`, with `dual_cone` in the
/// dual of each block's cone and both bound duals nonnegative.
///
/// For [`SolveStatus::Infeasible`] the same vectors hold a Farkas ray:
/// `Aᵀy - dual_cone - lower_dual + upper_dual = 0` and
/// `bᵀy - lowerᵀ·lower_dual + upperᵀ·upper_dual < 0` (finite bounds only).
/// For [`SolveStatus::Unbounded`], `x` is a recession direction with
/// `cᵀx < 0` and `A x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution<T> {
    pub status: SolveStatus,
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub dual_cone: Vec<T>,
    pub lower_dual: Vec<T>,
    pub upper_dual: Vec<T>,
    pub objective: T,
    pub dual_objective: T,
    pub residuals: ResidualReport<T>,
    pub iterations: u32,
    pub log: Vec<IterationRecord<T>>,
}

impl<T: Scalar> ConicSolution<T> {
    fn empty(status: SolveStatus, n: usize, m: usize) -> Self {
        let nan = T::nan();
        Self {
            status,
            x: vec![T::zero(); n],
            y: vec![T::zero(); m],
            dual_cone: vec![T::zero(); n],
            lower_dual: vec![T::zero(); n],
            upper_dual: vec![T::zero(); n],
            objective: nan,
            dual_objective: nan,
            residuals: ResidualReport { primal_feas: nan, dual_feas: nan, rel_gap: nan, max_violation: nan },
            iterations: 0,
            log: Vec::new(),
        }
    }

    /// Writes the iteration log as CSV.
    pub fn write_log<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "iteration,mu,sigma,step_length,cost_primal,cost_dual,res_primal,res_dual,gap_abs,gap_rel")?;
        for r in &self.log {
            writeln!(
                out,
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.iteration,
                r.mu,
                r.sigma,
                r.step_length,
                r.cost_primal,
                r.cost_dual,
                r.res_primal,
                r.res_dual,
                r.gap_abs,
                r.gap_rel
            )?;
        }
        Ok(())
    }
}

// Where each backend row came from.
#[derive(Debug, Clone, Copy)]
enum RowOrigin {
    Eq(usize),
    Lower(usize),
    Upper(usize),
    // (block index, offset within block)
    Block(usize, usize),
}

// A program variable in terms of backend columns: Σ coef·x_col + constant.
#[derive(Debug, Clone)]
struct Affine<T> {
    terms: Vec<(usize, T)>,
    constant: T,
}

// A column solved out of the one equality row it appeared in.
#[derive(Debug, Clone, Copy)]
struct Eliminated<T> {
    row: usize,
    coef: T,
}

struct Lowered<T> {
    n: usize,
    expr: Vec<Affine<T>>,
    fixed: Vec<Option<T>>,
    eliminated: Vec<Option<Eliminated<T>>>,
    rows_i: Vec<usize>,
    rows_j: Vec<usize>,
    rows_v: Vec<T>,
    b: Vec<T>,
    origin: Vec<RowOrigin>,
    // backend row of each variable's nonnegativity, and first row of each block
    nn_row: Vec<Option<usize>>,
    block_row: Vec<Option<usize>>,
    cones: Vec<SupportedConeT<T>>,
    q: Vec<T>,
    offset: T,
}

impl<T: Scalar> Lowered<T> {
    // Appends the row `s = Σ m·expr(var)`, i.e. `-Σ m·coef·x + s = Σ m·constant`.
    fn push_row(&mut self, combo: &[(usize, T)], origin: RowOrigin) {
        let r = self.b.len();
        let mut acc: Vec<(usize, T)> = Vec::new();
        let mut rhs = T::zero();
        for &(var, m) in combo {
            let e = &self.expr[var];
            rhs += m * e.constant;
            acc.extend(e.terms.iter().map(|&(c, a)| (c, -m * a)));
        }
        acc.sort_by_key(|t| t.0);
        let mut k = 0;
        while k < acc.len() {
            let (c, mut v) = acc[k];
            k += 1;
            while k < acc.len() && acc[k].0 == c {
                v += acc[k].1;
                k += 1;
            }
            if v != T::zero() {
                self.rows_i.push(r);
                self.rows_j.push(c);
                self.rows_v.push(v);
            }
        }
        self.b.push(rhs);
        self.origin.push(origin);
    }
}

enum Presolved<T> {
    Ready(Lowered<T>),
    /// Infeasible equality row with its residual sign.
    EmptyRow(usize, T),
    /// A variable with crossing bounds or a fixed value outside its cone.
    BadVariable(usize),
}

fn presolve<T: Scalar>(p: &ConicProgram<T>) -> Presolved<T> {
    let n_all = p.n_vars();
    let mut fixed = vec![None; n_all];
    for j in 0..n_all {
        if p.lower[j] > p.upper[j] {
            return Presolved::BadVariable(j);
        }
        if p.lower[j] == p.upper[j] {
            fixed[j] = Some(p.lower[j]);
        }
    }

    let mut nonneg = vec![false; n_all];
    let mut in_cone = vec![false; n_all];
    for blk in &p.blocks {
        let nn = blk.cone == Cone::Nonnegative || (blk.cone == Cone::SecondOrder && blk.len == 1);
        for j in blk.range() {
            nonneg[j] = nn;
            in_cone[j] = blk.cone != Cone::Free;
        }
    }

    // merged equality rows over the free variables
    let mut row_terms: Vec<Vec<(usize, T)>> = vec![Vec::new(); p.n_eq()];
    let mut row_rhs = p.rhs.clone();
    let mut row_scale: Vec<T> = p.rhs.iter().map(|b| b.abs()).collect();
    for &(i, j, a) in &p.eq {
        match fixed[j] {
            Some(v) => {
                row_rhs[i] -= a * v;
                row_scale[i] = row_scale[i].max((a * v).abs());
            }
            None => row_terms[i].push((j, a)),
        }
    }
    let tol = T::lit(1e-9);
    for i in 0..p.n_eq() {
        let terms = &mut row_terms[i];
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(terms.len());
        for &(j, a) in terms.iter() {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|t| t.1 != T::zero());
        if merged.is_empty() && row_rhs[i].abs() > tol * (T::one() + row_scale[i]) {
            return Presolved::EmptyRow(i, row_rhs[i]);
        }
        *terms = merged;
    }

    // Cone members that are otherwise unbounded and sit in exactly one equality
    // row are solved out of that row; their cone rows then carry the row's
    // affine expression. At most one column per row.
    let mut count = vec![0usize; n_all];
    for terms in &row_terms {
        for &(j, _) in terms {
            count[j] += 1;
        }
    }
    let mut eliminated: Vec<Option<Eliminated<T>>> = vec![None; n_all];
    let mut n_elim = 0;
    for (i, terms) in row_terms.iter().enumerate() {
        let pick = terms.iter().find(|&&(j, a)| {
            let lower_free = p.lower[j] == T::neg_infinity() || (nonneg[j] && p.lower[j] <= T::zero());
            count[j] == 1
                && in_cone[j]
                && !p.integer[j]
                && lower_free
                && p.upper[j] == T::infinity()
                && a.abs() >= T::lit(1e-6)
        });
        if let Some(&(j, a)) = pick {
            eliminated[j] = Some(Eliminated { row: i, coef: a });
            n_elim += 1;
        }
    }
    let n_free = fixed.iter().filter(|v| v.is_none()).count();
    if n_elim == n_free {
        // keep at least one backend column
        eliminated.iter_mut().for_each(|e| *e = None);
    }

    let mut col_of = vec![None; n_all];
    let mut n = 0;
    for j in 0..n_all {
        if fixed[j].is_none() && eliminated[j].is_none() {
            col_of[j] = Some(n);
            n += 1;
        }
    }
    let mut q = vec![T::zero(); n];
    let mut offset = T::zero();
    let mut expr = Vec::with_capacity(n_all);
    for j in 0..n_all {
        let e = match (fixed[j], col_of[j], eliminated[j]) {
            (Some(v), _, _) => {
                offset += p.objective[j] * v;
                Affine { terms: Vec::new(), constant: v }
            }
            (None, Some(c), _) => {
                q[c] += p.objective[j];
                Affine { terms: vec![(c, T::one())], constant: T::zero() }
            }
            (None, None, Some(el)) => {
                let terms: Vec<(usize, T)> = row_terms[el.row]
                    .iter()
                    .filter(|t| t.0 != j)
                    .map(|&(k, a)| (col_of[k].unwrap(), -a / el.coef))
                    .collect();
                let constant = row_rhs[el.row] / el.coef;
                let c = p.objective[j];
                offset += c * constant;
                for &(col, a) in &terms {
                    q[col] += c * a;
                }
                Affine { terms, constant }
            }
            _ => unreachable!(),
        };
        expr.push(e);
    }

    let mut low = Lowered {
        n,
        expr,
        fixed,
        eliminated,
        rows_i: Vec::new(),
        rows_j: Vec::new(),
        rows_v: Vec::new(),
        b: Vec::new(),
        origin: Vec::new(),
        nn_row: vec![None; n_all],
        block_row: vec![None; p.blocks.len()],
        cones: Vec::new(),
        q,
        offset,
    };

    // equality rows
    let mut n_zero = 0;
    let mut has_elim = vec![false; p.n_eq()];
    for el in low.eliminated.iter().flatten() {
        has_elim[el.row] = true;
    }
    for i in 0..p.n_eq() {
        if has_elim[i] || row_terms[i].is_empty() {
            continue;
        }
        let r = low.b.len();
        for &(j, a) in &row_terms[i] {
            low.rows_i.push(r);
            low.rows_j.push(col_of[j].unwrap());
            low.rows_v.push(a);
        }
        low.b.push(row_rhs[i]);
        low.origin.push(RowOrigin::Eq(i));
        n_zero += 1;
    }
    if n_zero > 0 {
        low.cones.push(SupportedConeT::ZeroConeT(n_zero));
    }

    // bounds and nonnegative memberships
    let mut n_nn = 0;
    for j in 0..n_all {
        if let Some(v) = low.fixed[j] {
            if nonneg[j] && v < T::zero() {
                return Presolved::BadVariable(j);
            }
            continue;
        }
        if nonneg[j] {
            let blk = p.blocks.iter().position(|b| b.range().contains(&j)).unwrap();
            low.nn_row[j] = Some(low.b.len());
            low.push_row(&[(j, T::one())], RowOrigin::Block(blk, j - p.blocks[blk].start));
            n_nn += 1;
        }
        if p.lower[j].is_finite() && !(nonneg[j] && p.lower[j] <= T::zero()) {
            // -x + s = -l
            let r = low.b.len();
            low.rows_i.push(r);
            low.rows_j.push(col_of[j].unwrap());
            low.rows_v.push(-T::one());
            low.b.push(-p.lower[j]);
            low.origin.push(RowOrigin::Lower(j));
            n_nn += 1;
        }
        if p.upper[j].is_finite() {
            let r = low.b.len();
            low.rows_i.push(r);
            low.rows_j.push(col_of[j].unwrap());
            low.rows_v.push(T::one());
            low.b.push(p.upper[j]);
            low.origin.push(RowOrigin::Upper(j));
            n_nn += 1;
        }
    }
    if n_nn > 0 {
        low.cones.push(SupportedConeT::NonnegativeConeT(n_nn));
    }

    // second-order blocks: s = M x_block
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    for (bi, blk) in p.blocks.iter().enumerate() {
        let rotated = match blk.cone {
            Cone::SecondOrder if blk.len > 1 => false,
            Cone::RotatedSecondOrder => true,
            _ => continue,
        };
        low.block_row[bi] = Some(low.b.len());
        for r in 0..blk.len {
            let s = blk.start;
            let combo: Vec<(usize, T)> = if rotated && r == 0 {
                vec![(s, h), (s + 1, h)]
            } else if rotated && r == 1 {
                vec![(s, h), (s + 1, -h)]
            } else {
                vec![(s + r, T::one())]
            };
            low.push_row(&combo, RowOrigin::Block(bi, r));
        }
        low.cones.push(SupportedConeT::SecondOrderConeT(blk.len));
    }
    Presolved::Ready(low)
}

fn map_status(s: SolverStatus) -> SolveStatus {
    match s {
        SolverStatus::Solved => SolveStatus::Optimal,
        SolverStatus::AlmostSolved => SolveStatus::NearOptimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
        SolverStatus::MaxIterations | SolverStatus::MaxTime => SolveStatus::IterationLimit,
        _ => SolveStatus::NumericalFailure,
    }
}

/// Solves the continuous relaxation of `program` (integrality ignored).
pub fn solve<T: Scalar>(
    program: &ConicProgram<T>,
    settings: &SolverSettings<T>,
) -> Result<ConicSolution<T>, SolverError> {
    settings.validate()?;
    program.validate()?;
    let (n_all, m_eq) = (program.n_vars(), program.n_eq());

    let low = match presolve(program) {
        Presolved::Ready(low) => low,
        Presolved::EmptyRow(i, r) => {
            let mut sol = ConicSolution::empty(SolveStatus::Infeasible, n_all, m_eq);
            // y = -sign(r)·e_i: Aᵀy vanishes on the free columns and bᵀy < 0
            sol.y[i] = if r > T::zero() { -T::one() } else { T::one() };
            return Ok(sol);
        }
        Presolved::BadVariable(j) => {
            let mut sol = ConicSolution::empty(SolveStatus::Infeasible, n_all, m_eq);
            sol.lower_dual[j] = T::one();
            sol.upper_dual[j] = T::one();
            return Ok(sol);
        }
    };

    if low.n == 0 {
        let x: Vec<T> = low.fixed.iter().map(|v| v.unwrap()).collect();
        let mut sol = ConicSolution::empty(SolveStatus::Optimal, n_all, m_eq);
        let viol = program.cone_violation(&x);
        sol.objective = program.objective_value(&x);
        sol.dual_objective = sol.objective;
        sol.residuals =
            ResidualReport { primal_feas: viol, dual_feas: T::zero(), rel_gap: T::zero(), max_violation: viol };
        if viol > settings.feas_tol {
            sol.status = SolveStatus::Infeasible;
        }
        sol.x = x;
        return Ok(sol);
    }

    let m = low.b.len();
    let a = CscMatrix::new_from_triplets(m, low.n, low.rows_i.clone(), low.rows_j.clone(), low.rows_v.clone());
    let p_mat = CscMatrix::<T>::zeros((low.n, low.n));
    let run = |refine: bool| -> Result<(DefaultSolver<T>, Vec<IterationRecord<T>>), SolverError> {
        let backend_settings = DefaultSettingsBuilder::<T>::default()
            .verbose(false)
            .max_iter(settings.max_iters)
            // the backend measures scaled residuals; a safety factor keeps the
            // reported (unscaled) quantities within the requested tolerances
            .tol_feas(settings.feas_tol * T::lit(0.1))
            .tol_gap_abs(settings.gap_tol * T::lit(0.1))
            .tol_gap_rel(settings.gap_tol * T::lit(0.1))
            .max_step_fraction(settings.step_fraction)
            .static_regularization_constant(T::lit(1e-8))
            .iterative_refinement_enable(refine)
            .build()
            .map_err(|e| SolverError::Settings(e.to_string()))?;
        let mut backend = DefaultSolver::new(&p_mat, &low.q, &a, &low.b, &low.cones, backend_settings)
            .map_err(|e| SolverError::Backend(e.to_string()))?;
        let log = Arc::new(Mutex::new(Vec::new()));
        let sink = Arc::clone(&log);
        backend.set_termination_callback(move |info: &DefaultInfo<T>| {
            sink.lock().expect("log lock").push(IterationRecord {
                iteration: info.iterations,
                mu: info.mu,
                sigma: info.sigma,
                step_length: info.step_length,
                cost_primal: info.cost_primal,
                cost_dual: info.cost_dual,
                res_primal: info.res_primal,
                res_dual: info.res_dual,
                gap_abs: info.gap_abs,
                gap_rel: info.gap_rel,
            });
            false
        });
        backend.solve();
        let log = std::mem::take(&mut *log.lock().expect("log lock"));
        Ok((backend, log))
    };
    let (mut backend, mut log) = run(false)?;
    let first = map_status(backend.solution.status);
    if settings.refine_retry
        && !matches!(first, SolveStatus::Optimal | SolveStatus::Infeasible | SolveStatus::Unbounded)
    {
        let (b2, l2) = run(true)?;
        let second = map_status(b2.solution.status);
        if second == SolveStatus::Optimal || !first.is_solved() {
            (backend, log) = (b2, l2);
        }
    }

    let res = &backend.solution;
    let status = map_status(res.status);
    let mut sol = ConicSolution::empty(status, n_all, m_eq);
    sol.iterations = res.iterations;
    sol.log = log;
    for rec in &mut sol.log {
        rec.cost_primal += low.offset;
        rec.cost_dual += low.offset;
    }

    // along an unboundedness ray the affine constants drop out
    let homogeneous = status == SolveStatus::Unbounded;
    for j in 0..n_all {
        let e = &low.expr[j];
        let base = if homogeneous { T::zero() } else { e.constant };
        sol.x[j] = e.terms.iter().fold(base, |acc, &(c, a)| acc + a * res.x[c]);
    }
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    if status.is_solved() {
        // eliminated cone members are read off the backend's interior slacks,
        // which keeps them exactly inside their cones
        for j in (0..n_all).filter(|&j| low.eliminated[j].is_some()) {
            if let Some(r) = low.nn_row[j] {
                sol.x[j] = res.s[r];
                continue;
            }
            let Some(bi) = program.blocks.iter().position(|b| b.range().contains(&j)) else { continue };
            let (blk, Some(first)) = (program.blocks[bi], low.block_row[bi]) else { continue };
            let off = j - blk.start;
            sol.x[j] = match (blk.cone, off) {
                (Cone::RotatedSecondOrder, 0) => h * (res.s[first] + res.s[first + 1]),
                (Cone::RotatedSecondOrder, 1) => h * (res.s[first] - res.s[first + 1]),
                _ => res.s[first + off],
            };
        }
    }
    for (r, origin) in low.origin.iter().enumerate() {
        let z = res.z[r];
        match *origin {
            RowOrigin::Eq(i) => sol.y[i] = z,
            RowOrigin::Lower(j) => sol.lower_dual[j] = z,
            RowOrigin::Upper(j) => sol.upper_dual[j] = z,
            RowOrigin::Block(bi, off) => {
                let blk = program.blocks[bi];
                let j = blk.start + off;
                if blk.cone == Cone::RotatedSecondOrder && off < 2 {
                    // Mᵀz on the (u, v) pair
                    let (z0, z1) = (res.z[r - off], res.z[r - off + 1]);
                    sol.dual_cone[j] = if off == 0 { h * (z0 + z1) } else { h * (z0 - z1) };
                } else {
                    sol.dual_cone[j] = z;
                }
            }
        }
    }
    for j in 0..n_all {
        if low.fixed[j].is_some() {
            sol.dual_cone[j] = T::zero();
        }
        if let Some(el) = low.eliminated[j] {
            // stationarity of the eliminated column: c_j + a·y_i − z_j = 0
            let c = if status == SolveStatus::Infeasible { T::zero() } else { program.objective[j] };
            sol.y[el.row] = (sol.dual_cone[j] - c) / el.coef;
        }
    }

    let eq_viol = program.eq_residual(&sol.x).iter().fold(T::zero(), |m, r| m.max(r.abs()));
    sol.objective =
        if status == SolveStatus::Unbounded { program.objective_value(&sol.x) } else { res.obj_val + low.offset };
    sol.dual_objective = res.obj_val_dual + low.offset;
    sol.residuals = ResidualReport {
        primal_feas: res.r_prim,
        dual_feas: res.r_dual,
        rel_gap: backend.info.gap_rel,
        max_violation: eq_viol.max(program.cone_violation(&sol.x)),
    };
    Ok(sol)
}

/// Solves with the given integer variables fixed to 0 or 1.
pub fn solve_with_fixings<T: Scalar>(
    program: &ConicProgram<T>,
    fixings: &BTreeMap<usize, bool>,
    settings: &SolverSettings<T>,
) -> Result<ConicSolution<T>, SolverError> {
    let fixed = program.with_fixings(fixings)?;
    solve(&fixed, settings)
}
