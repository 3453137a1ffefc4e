use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::io::{self, Write};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::conic::{solve, solve_with_fixings, ConicProgram, ConicSolution, SolveStatus, SolverError, SolverSettings};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnbSettings<T> {
    pub abs_gap: T,
    pub rel_gap: T,
    pub max_nodes: usize,
    pub integrality_tol: T,
    /// Relaxations solved concurrently per batch. The tree is processed in
    /// fixed batches, so results do not depend on thread timing.
    pub workers: usize,
    /// Wall-clock budget in seconds; the search stops with the incumbent and
    /// an honest bound once exceeded.
    pub time_limit: Option<f64>,
    pub solver: SolverSettings<T>,
}

impl<T: Scalar> Default for BnbSettings<T> {
    fn default() -> Self {
        Self {
            abs_gap: T::lit(1e-6),
            rel_gap: T::lit(1e-4),
            max_nodes: 100_000,
            integrality_tol: T::lit(1e-6),
            workers: 1,
            time_limit: None,
            solver: SolverSettings::default(),
        }
    }
}

impl<T: Scalar> BnbSettings<T> {
    pub fn validate(&self) -> Result<(), BnbError> {
        if !(self.abs_gap > T::zero() && self.rel_gap > T::zero()) {
            return Err(BnbError::Settings("gaps must be positive".into()));
        }
        if !(self.integrality_tol >= T::zero() && self.integrality_tol < T::lit(0.5)) {
            return Err(BnbError::Settings("integrality tolerance must lie in [0, 0.5)".into()));
        }
        if self.workers == 0 || self.max_nodes == 0 {
            return Err(BnbError::Settings("workers and max_nodes must be positive".into()));
        }
        if self.time_limit.is_some_and(|t| !(t > 0.0)) {
            return Err(BnbError::Settings("time limit must be positive".into()));
        }
        self.solver.validate()?;
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BnbError {
    #[error("invalid settings: {0}")]
    Settings(String),
    #[error("program has no integer variables")]
    NoIntegers,
    #[error("relaxation is already integral; nothing to branch on")]
    Integral,
    #[error("relaxation at node {node} (depth {depth}) ended with {status:?}")]
    Node { node: usize, depth: usize, status: SolveStatus },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TreeStatus {
    /// Incumbent proven within the gap tolerances.
    Optimal,
    /// Node limit reached; the incumbent carries an honest gap.
    NodeLimit,
    /// Time limit reached; as for the node limit.
    TimeLimit,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeAction {
    Branched,
    Pruned,
    Infeasible,
    Incumbent,
    /// Integral relaxation not better than the incumbent.
    Integral,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub bound: f64,
    pub fractional: usize,
    pub action: NodeAction,
}

#[derive(Debug, Clone)]
pub struct TreeOutcome<T> {
    pub status: TreeStatus,
    /// Best integral solution, re-solved with every integer variable fixed.
    pub incumbent: Option<ConicSolution<T>>,
    pub fixings: BTreeMap<usize, bool>,
    /// Proven lower bound on the optimal objective.
    pub bound: T,
    pub nodes: usize,
    pub log: Vec<NodeRecord>,
    pub seconds: f64,
}

impl<T: Scalar> TreeOutcome<T> {
    pub fn objective(&self) -> Option<T> {
        self.incumbent.as_ref().map(|s| s.objective)
    }

    /// Incumbent objective minus the proven bound (0 when proven optimal).
    pub fn gap(&self) -> T {
        match self.objective() {
            Some(obj) => (obj - self.bound).max(T::zero()),
            None => T::infinity(),
        }
    }

    pub fn write_log<W: Write>(&self, out: W) -> io::Result<()> {
        write_node_log(&self.log, out)
    }
}

/// Node log as CSV.
pub fn write_node_log<W: Write>(log: &[NodeRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "node,parent,depth,bound,fractional,action")?;
    for r in log {
        let parent = r.parent.map(|p| p.to_string()).unwrap_or_default();
        writeln!(out, "{},{parent},{},{:e},{},{:?}", r.id, r.depth, r.bound, r.fractional, r.action)?;
    }
    Ok(())
}

fn fractionality<T: Scalar>(v: T) -> T {
    v.min(T::one() - v).max(T::zero())
}

/// Integer positions whose relaxed value is farther than `tol` from 0 or 1.
pub fn fractional_positions<T: Scalar>(x: &[T], integers: &[usize], tol: T) -> Vec<usize> {
    integers.iter().copied().filter(|&j| fractionality(x[j]) > tol).collect()
}

/// Splits a node on its most fractional integer variable (lowest position on
/// ties). Returns the variable and the child fixings `[down, up]`.
pub fn branch<T: Scalar>(
    fixings: &BTreeMap<usize, bool>,
    x: &[T],
    integers: &[usize],
    tol: T,
) -> Result<(usize, [BTreeMap<usize, bool>; 2]), BnbError> {
    let mut best: Option<(usize, T)> = None;
    for j in fractional_positions(x, integers, tol) {
        if fixings.contains_key(&j) {
            continue;
        }
        let f = fractionality(x[j]);
        if best.is_none_or(|(_, b)| f > b) {
            best = Some((j, f));
        }
    }
    let (j, _) = best.ok_or(BnbError::Integral)?;
    let mut down = fixings.clone();
    down.insert(j, false);
    let mut up = fixings.clone();
    up.insert(j, true);
    Ok((j, [down, up]))
}

/// Fixes the `n_on` largest relaxed integer values above `tol` to one and all
/// others to zero, then re-solves. Returns the fixings and the solution when
/// the re-solve succeeds.
pub fn round_heuristic<T: Scalar>(
    program: &ConicProgram<T>,
    x: &[T],
    n_on: usize,
    settings: &BnbSettings<T>,
) -> Option<(BTreeMap<usize, bool>, ConicSolution<T>)> {
    let fixings = rounding(x, &program.integer_positions(), n_on, settings.integrality_tol);
    let sol = solve_with_fixings(program, &fixings, &settings.solver).ok()?;
    sol.status.is_solved().then_some((fixings, sol))
}

fn rounding<T: Scalar>(x: &[T], integers: &[usize], n_on: usize, tol: T) -> BTreeMap<usize, bool> {
    let mut ranked: Vec<usize> = integers.iter().copied().filter(|&j| x[j] > tol).collect();
    // stable: equal values keep ascending position order
    ranked.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).unwrap_or(Ordering::Equal));
    let on: BTreeSet<usize> = ranked.into_iter().take(n_on).collect();
    integers.iter().map(|&j| (j, on.contains(&j))).collect()
}

fn round_all<T: Scalar>(x: &[T], integers: &[usize]) -> BTreeMap<usize, bool> {
    integers.iter().map(|&j| (j, x[j] > T::lit(0.5))).collect()
}

/// Problem knowledge the search may use without affecting correctness.
pub struct SearchHooks<'a, T> {
    /// Rewrites a relaxation point into an equivalent one (feasible, same
    /// objective) before it is inspected for fractionality, branched on or
    /// rounded. Bounds always come from the solver.
    pub canonicalize: Option<&'a (dyn Fn(&mut [T]) + Sync)>,
    /// Integer patterns (positions switched on) tried as incumbents first.
    pub seeds: Vec<Vec<usize>>,
}

impl<T> Default for SearchHooks<'_, T> {
    fn default() -> Self {
        Self { canonicalize: None, seeds: Vec::new() }
    }
}

struct Node<T> {
    id: usize,
    parent: Option<usize>,
    depth: usize,
    bound: T,
    fixings: BTreeMap<usize, bool>,
}

// min-heap on (bound, id)
struct Queued<T>(Node<T>);

impl<T: Scalar> PartialEq for Queued<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Scalar> Eq for Queued<T> {}
impl<T: Scalar> PartialOrd for Queued<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Queued<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.bound.partial_cmp(&self.0.bound).unwrap_or(Ordering::Equal).then_with(|| other.0.id.cmp(&self.0.id))
    }
}

struct Search<'a, T> {
    program: &'a ConicProgram<T>,
    integers: Vec<usize>,
    n_on: usize,
    settings: &'a BnbSettings<T>,
    incumbent: Option<(T, BTreeMap<usize, bool>, ConicSolution<T>)>,
    tried: BTreeSet<Vec<bool>>,
}

impl<T: Scalar> Search<'_, T> {
    fn incumbent_value(&self) -> T {
        self.incumbent.as_ref().map_or(T::infinity(), |i| i.0)
    }

    // bound cannot improve the incumbent by more than the gap tolerances
    fn fathomed(&self, bound: T) -> bool {
        let inc = self.incumbent_value();
        if !inc.is_finite() {
            return false;
        }
        let gap = inc - bound;
        gap <= self.settings.abs_gap || gap <= self.settings.rel_gap * inc.abs()
    }

    /// Re-solves with every integer fixed and keeps the result if it improves.
    fn offer(&mut self, fixings: BTreeMap<usize, bool>) -> bool {
        let key: Vec<bool> = self.integers.iter().map(|j| fixings[j]).collect();
        if !self.tried.insert(key) {
            return false;
        }
        if fixings.values().filter(|&&on| on).count() > self.n_on {
            return false;
        }
        let Ok(sol) = solve_with_fixings(self.program, &fixings, &self.settings.solver) else {
            return false;
        };
        if !sol.status.is_solved() || sol.objective >= self.incumbent_value() {
            return false;
        }
        self.incumbent = Some((sol.objective, fixings, sol));
        true
    }
}

/// Best-first branch-and-bound over the binary variables of `program`.
///
/// `n_on` is the largest number of binaries that may be one; it only guides the
/// rounding heuristic (the budget itself must be a constraint of the program).
pub fn branch_and_bound<T: Scalar>(
    program: &ConicProgram<T>,
    n_on: usize,
    settings: &BnbSettings<T>,
) -> Result<TreeOutcome<T>, BnbError> {
    branch_and_bound_with(program, n_on, settings, &SearchHooks::default())
}

/// [`branch_and_bound`] with seed incumbents and a relaxation canonicalizer.
pub fn branch_and_bound_with<T: Scalar>(
    program: &ConicProgram<T>,
    n_on: usize,
    settings: &BnbSettings<T>,
    hooks: &SearchHooks<'_, T>,
) -> Result<TreeOutcome<T>, BnbError> {
    settings.validate()?;
    let start = Instant::now();
    let integers = program.integer_positions();
    if integers.is_empty() {
        return Err(BnbError::NoIntegers);
    }
    let mut search =
        Search { program, integers: integers.clone(), n_on, settings, incumbent: None, tried: BTreeSet::new() };
    for seed in &hooks.seeds {
        search.offer(integers.iter().map(|&j| (j, seed.contains(&j))).collect());
    }
    let mut log = Vec::new();
    let mut heap = BinaryHeap::new();
    heap.push(Queued(Node { id: 0, parent: None, depth: 0, bound: T::neg_infinity(), fixings: BTreeMap::new() }));
    let (mut next_id, mut processed) = (1, 0);
    let mut root_infeasible = false;
    let mut timed_out = false;

    while !heap.is_empty() && processed < settings.max_nodes {
        if settings.time_limit.is_some_and(|t| start.elapsed().as_secs_f64() > t) {
            timed_out = true;
            break;
        }
        let mut batch = Vec::new();
        while batch.len() < settings.workers && processed + batch.len() < settings.max_nodes {
            match heap.pop() {
                Some(Queued(node)) if search.fathomed(node.bound) => log.push(NodeRecord {
                    id: node.id,
                    parent: node.parent,
                    depth: node.depth,
                    bound: node.bound.to_f64_lossy(),
                    fractional: 0,
                    action: NodeAction::Pruned,
                }),
                Some(Queued(node)) => batch.push(node),
                None => break,
            }
        }
        if batch.is_empty() {
            break;
        }
        processed += batch.len();
        let results = solve_batch(program, &batch, &settings.solver);

        for (node, result) in batch.into_iter().zip(results) {
            let mut sol = result?;
            let mut record = NodeRecord {
                id: node.id,
                parent: node.parent,
                depth: node.depth,
                bound: node.bound.to_f64_lossy(),
                fractional: 0,
                action: NodeAction::Infeasible,
            };
            match sol.status {
                SolveStatus::Infeasible => {
                    root_infeasible |= node.id == 0;
                    log.push(record);
                    continue;
                }
                s if !s.is_solved() => {
                    return Err(BnbError::Node { node: node.id, depth: node.depth, status: s });
                }
                _ => {}
            }
            // a child can never be better than its parent
            let bound = sol.objective.max(node.bound);
            record.bound = bound.to_f64_lossy();
            if let Some(canon) = hooks.canonicalize {
                canon(&mut sol.x);
            }
            let frac = fractional_positions(&sol.x, &integers, settings.integrality_tol);
            record.fractional = frac.len();

            if search.fathomed(bound) {
                record.action = NodeAction::Pruned;
            } else if frac.is_empty() {
                record.action = if search.offer(round_all(&sol.x, &integers)) {
                    NodeAction::Incumbent
                } else {
                    NodeAction::Integral
                };
            } else {
                search.offer(rounding(&sol.x, &integers, n_on, settings.integrality_tol));
                if search.fathomed(bound) {
                    record.action = NodeAction::Pruned;
                } else {
                    let (_, children) = branch(&node.fixings, &sol.x, &integers, settings.integrality_tol)?;
                    for fixings in children {
                        heap.push(Queued(Node {
                            id: next_id,
                            parent: Some(node.id),
                            depth: node.depth + 1,
                            bound,
                            fixings,
                        }));
                        next_id += 1;
                    }
                    record.action = NodeAction::Branched;
                }
            }
            log.push(record);
        }
    }

    let open_bound = heap.iter().map(|q| q.0.bound).fold(T::infinity(), |a, b| a.min(b));
    let exhausted = heap.iter().all(|q| search.fathomed(q.0.bound));
    let pruned_bound = log
        .iter()
        .filter(|r| r.action == NodeAction::Pruned)
        .map(|r| T::lit(r.bound))
        .fold(T::infinity(), |a, b| a.min(b));
    let limit = if timed_out { TreeStatus::TimeLimit } else { TreeStatus::NodeLimit };
    let (status, bound) = match &search.incumbent {
        None if root_infeasible || heap.is_empty() => (TreeStatus::Infeasible, T::infinity()),
        None => (limit, open_bound),
        Some((obj, _, _)) => {
            let bound = obj.min(open_bound).min(pruned_bound);
            (if exhausted { TreeStatus::Optimal } else { limit }, bound)
        }
    };
    let (incumbent, fixings) = match search.incumbent {
        Some((_, f, s)) => (Some(s), f),
        None => (None, BTreeMap::new()),
    };
    Ok(TreeOutcome { status, incumbent, fixings, bound, nodes: processed, log, seconds: start.elapsed().as_secs_f64() })
}

fn solve_batch<T: Scalar>(
    program: &ConicProgram<T>,
    batch: &[Node<T>],
    settings: &SolverSettings<T>,
) -> Vec<Result<ConicSolution<T>, SolverError>> {
    let one = |node: &Node<T>| {
        if node.fixings.is_empty() {
            solve(program, settings)
        } else {
            solve_with_fixings(program, &node.fixings, settings)
        }
    };
    if batch.len() == 1 {
        return vec![one(&batch[0])];
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = batch.iter().map(|node| scope.spawn(move || one(node))).collect();
        handles.into_iter().map(|h| h.join().expect("relaxation worker panicked")).collect()
    })
}

/// Solves the program once for every way of switching on at most `max_on`
/// binaries (all others fixed to zero). Returns `(on-set, objective)` pairs,
/// with `None` for infeasible or failed fixings, in lexicographic order.
pub fn enumerate_placements<T: Scalar>(
    program: &ConicProgram<T>,
    max_on: usize,
    settings: &SolverSettings<T>,
) -> Result<Vec<(Vec<usize>, Option<T>)>, BnbError> {
    let integers = program.integer_positions();
    let mut subsets: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier = subsets.clone();
    for _ in 0..max_on {
        let mut next = Vec::new();
        for set in &frontier {
            let from = set.last().map_or(0, |&last| integers.iter().position(|&j| j == last).unwrap() + 1);
            for &j in &integers[from..] {
                let mut s = set.clone();
                s.push(j);
                next.push(s);
            }
        }
        subsets.extend(next.iter().cloned());
        frontier = next;
    }
    subsets.sort();
    let mut out = Vec::with_capacity(subsets.len());
    for set in subsets {
        let fixings: BTreeMap<usize, bool> = integers.iter().map(|&j| (j, set.contains(&j))).collect();
        let sol = solve_with_fixings(program, &fixings, settings)?;
        out.push((set, sol.status.is_solved().then_some(sol.objective)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{Cone, ProgramBuilder};

    fn knapsack() -> ConicProgram<f64> {
        // min -5a - 4b - 3c  s.t. 2a + 3b + c ≤ 4 (optimum a = c = 1, value -8)
        let mut b = ProgramBuilder::<f64>::new();
        let x = b.add_vars(Cone::Free, 3);
        for (j, c) in [-5.0, -4.0, -3.0].into_iter().enumerate() {
            b.set_binary(x + j);
            b.set_cost(x + j, c);
        }
        b.add_le(&[(x, 2.0), (x + 1, 3.0), (x + 2, 1.0)], 4.0);
        b.build(3).unwrap()
    }

    #[test]
    fn branches_on_most_fractional() {
        let (j, kids) = branch(&BTreeMap::new(), &[0.5, 0.2], &[0, 1], 1e-6).unwrap();
        assert_eq!(j, 0);
        assert_eq!(kids[0][&0], false);
        assert_eq!(kids[1][&0], true);
    }

    #[test]
    fn ties_go_to_lowest_position() {
        let (j, _) = branch(&BTreeMap::new(), &[0.3, 0.3], &[0, 1], 1e-6).unwrap();
        assert_eq!(j, 0);
        let (j, _) = branch(&BTreeMap::new(), &[0.7, 0.3], &[0, 1], 1e-6).unwrap();
        assert_eq!(j, 0);
    }

    #[test]
    fn integral_relaxation_cannot_branch() {
        assert_eq!(branch(&BTreeMap::new(), &[1.0, 0.0], &[0, 1], 1e-6).unwrap_err(), BnbError::Integral);
    }

    #[test]
    fn rounding_takes_largest() {
        let f = rounding(&[0.9, 0.6, 0.1], &[0, 1, 2], 2, 1e-6);
        assert_eq!(f.values().copied().collect::<Vec<_>>(), vec![true, true, false]);
        let f = rounding(&[1e-9, 0.0, 1e-7], &[0, 1, 2], 2, 1e-6);
        assert!(f.values().all(|&on| !on));
    }

    #[test]
    fn knapsack_optimum() {
        let p = knapsack();
        let out = branch_and_bound(&p, 3, &BnbSettings::default()).unwrap();
        assert_eq!(out.status, TreeStatus::Optimal);
        assert!((out.objective().unwrap() + 8.0).abs() < 1e-6);
        assert_eq!(out.fixings.values().copied().collect::<Vec<_>>(), vec![true, false, true]);
        let best = enumerate_placements(&p, 3, &SolverSettings::default())
            .unwrap()
            .into_iter()
            .filter_map(|(_, v)| v)
            .fold(f64::INFINITY, f64::min);
        assert!((best + 8.0).abs() < 1e-6);
    }

    #[test]
    fn parallel_batches_agree() {
        let p = knapsack();
        let serial = branch_and_bound(&p, 3, &BnbSettings::default()).unwrap();
        let parallel = branch_and_bound(&p, 3, &BnbSettings { workers: 4, ..Default::default() }).unwrap();
        assert!((serial.objective().unwrap() - parallel.objective().unwrap()).abs() < 1e-7);
    }

    #[test]
    fn integral_root_needs_no_branching() {
        let mut b = ProgramBuilder::<f64>::new();
        let x = b.add_var(Cone::Free);
        b.set_binary(x);
        b.set_cost(x, 1.0);
        let p = b.build(1).unwrap();
        let out = branch_and_bound(&p, 1, &BnbSettings::default()).unwrap();
        assert_eq!(out.nodes, 1);
        assert!(out.log.iter().all(|r| r.action != NodeAction::Branched));
        assert!(out.objective().unwrap().abs() < 1e-8);
    }

    #[test]
    fn infeasible_root() {
        let mut b = ProgramBuilder::<f64>::new();
        let x = b.add_var(Cone::Free);
        b.set_binary(x);
        b.add_eq(&[(x, 1.0)], 2.0);
        let p = b.build(1).unwrap();
        let out = branch_and_bound(&p, 1, &BnbSettings::default()).unwrap();
        assert_eq!(out.status, TreeStatus::Infeasible);
        assert!(out.incumbent.is_none());
    }
}
