use std::collections::VecDeque;

use crate::network::NetworkCase;

/// Fundamental cycles of the network graph over a BFS spanning tree.
///
/// Each loop is induced by one chord (non-tree branch) and is oriented along
/// that chord. Entries are `(branch, ±1)`: +1 when the branch direction agrees
/// with the loop direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleBasis {
    n_branch: usize,
    loops: Vec<Vec<(usize, i8)>>,
}

impl CycleBasis {
    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn loops(&self) -> &[Vec<(usize, i8)>] {
        &self.loops
    }

    pub fn n_branch(&self) -> usize {
        self.n_branch
    }

    /// Dense loop-by-branch matrix `c_l`.
    pub fn dense(&self) -> Vec<Vec<i8>> {
        self.loops
            .iter()
            .map(|l| {
                let mut row = vec![0; self.n_branch];
                for &(k, s) in l {
                    row[k] = s;
                }
                row
            })
            .collect()
    }
}

pub fn build_cycle_basis(case: &NetworkCase) -> CycleBasis {
    build_cycle_basis_from(case, 0)
}

/// Cycle basis over the BFS tree rooted at bus position `root`.
pub fn build_cycle_basis_from(case: &NetworkCase, root: usize) -> CycleBasis {
    let n = case.buses().len();
    let ends: Vec<(usize, usize)> =
        case.branches().iter().map(|b| (case.pos(b.from_bus), case.pos(b.to_bus))).collect();
    let mut adj = vec![Vec::new(); n];
    for (k, &(i, j)) in ends.iter().enumerate() {
        adj[i].push((j, k));
        adj[j].push((i, k));
    }

    // parent[v] = (parent bus, branch to parent)
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut in_tree = vec![false; ends.len()];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &(v, k) in &adj[u] {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                parent[v] = Some((u, k));
                in_tree[k] = true;
                queue.push_back(v);
            }
        }
    }

    // sign of traversing branch k from bus a to bus b
    let sign = |k: usize, a: usize| -> i8 {
        if ends[k].0 == a {
            1
        } else {
            -1
        }
    };

    let mut loops = Vec::new();
    for (k, &(a, b)) in ends.iter().enumerate() {
        if in_tree[k] {
            continue;
        }
        // chord a -> b, then the tree path b -> lca -> a
        let mut cycle = vec![(k, 1i8)];
        let (mut u, mut v) = (b, a);
        let mut down = Vec::new();
        while u != v {
            if depth[u] >= depth[v] {
                let (p, e) = parent[u].expect("non-root has parent");
                cycle.push((e, sign(e, u)));
                u = p;
            } else {
                let (p, e) = parent[v].expect("non-root has parent");
                down.push((e, sign(e, p)));
                v = p;
            }
        }
        cycle.extend(down.into_iter().rev());
        loops.push(cycle);
    }
    CycleBasis { n_branch: ends.len(), loops }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{ieee30, two_bus, Branch, Bus, NetworkCase};
    use proptest::prelude::*;

    fn ring(n: usize, extra: &[(usize, usize)]) -> NetworkCase {
        let buses = (1..=n).map(|id| Bus { id, v_min: 0.9, v_max: 1.1, shunt_b: 0.0, is_candidate: true }).collect();
        let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (i, i + 1)).collect();
        pairs.extend_from_slice(extra);
        let branches = pairs
            .into_iter()
            .map(|(f, t)| Branch {
                from_bus: f,
                to_bus: t,
                r: 0.01,
                x: 0.1,
                b_ch: 0.0,
                tau: 1.0,
                theta_ps: 0.0,
                s_max: 0.0,
            })
            .collect();
        NetworkCase::new(100.0, buses, branches, vec![], vec![]).unwrap()
    }

    fn is_closed(case: &NetworkCase, cycle: &[(usize, i8)]) -> bool {
        let mut net = vec![0i32; case.buses().len()];
        for &(k, s) in cycle {
            let b = &case.branches()[k];
            net[case.pos(b.from_bus)] += s as i32;
            net[case.pos(b.to_bus)] -= s as i32;
        }
        net.iter().all(|&v| v == 0)
    }

    #[test]
    fn tree_has_no_loops() {
        assert!(build_cycle_basis(&two_bus()).is_empty());
        assert!(build_cycle_basis(&ring(5, &[])).is_empty());
    }

    #[test]
    fn triangle_has_one_loop_through_all_branches() {
        let case = ring(3, &[(3, 1)]);
        let basis = build_cycle_basis(&case);
        assert_eq!(basis.len(), 1);
        let mut members: Vec<usize> = basis.loops()[0].iter().map(|e| e.0).collect();
        members.sort();
        assert_eq!(members, vec![0, 1, 2]);
        assert!(is_closed(&case, &basis.loops()[0]));
    }

    #[test]
    fn ieee30_has_twelve_closed_loops() {
        let case = ieee30();
        let basis = build_cycle_basis(&case);
        assert_eq!(basis.len(), 41 - 30 + 1);
        for cycle in basis.loops() {
            assert!(is_closed(&case, cycle));
            assert_eq!(cycle[0].1, 1);
        }
    }

    #[test]
    fn each_chord_appears_in_exactly_one_loop() {
        // independence: every loop owns a chord no other loop uses
        let basis = build_cycle_basis(&ieee30());
        let chords: Vec<usize> = basis.loops().iter().map(|l| l[0].0).collect();
        for (c, &chord) in chords.iter().enumerate() {
            for (d, l) in basis.loops().iter().enumerate() {
                assert_eq!(l.iter().any(|e| e.0 == chord), c == d);
            }
        }
    }

    #[test]
    fn loop_count_independent_of_root() {
        let case = ieee30();
        for root in 0..30 {
            let basis = build_cycle_basis_from(&case, root);
            assert_eq!(basis.len(), 12);
            assert!(basis.loops().iter().all(|c| is_closed(&case, c)));
        }
    }

    proptest! {
        #[test]
        fn potential_differences_vanish_around_loops(
            angles in proptest::collection::vec(-1.0f64..1.0, 30),
            root in 0usize..30,
        ) {
            let case = ieee30();
            let basis = build_cycle_basis_from(&case, root);
            let diff: Vec<f64> = case
                .branches()
                .iter()
                .map(|b| angles[case.pos(b.from_bus)] - angles[case.pos(b.to_bus)])
                .collect();
            for cycle in basis.loops() {
                let sum: f64 = cycle.iter().map(|&(k, s)| s as f64 * diff[k]).sum();
                prop_assert!(sum.abs() < 1e-12);
            }
        }
    }
}
