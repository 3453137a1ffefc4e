#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use svcplan::conic::{Cone, ConicProgram, ProgramBuilder};
use svcplan::micp::rows::{Row, Sense};
use svcplan::micp::{emit_trilinear_linearization, MicpIndex, SvcSpec};
use svcplan::network::ieee30;

// Dense two-phase simplex (Bland's rule) for min cᵀx, Ax = b, x ≥ 0, b ≥ 0.

pub fn simplex(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
    let (m, n) = (a.len(), c.len());
    // tableau columns: n structurals, m artificials, rhs
    let width = n + m + 1;
    let mut t: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row = vec![0.0; width];
            row[..n].copy_from_slice(&a[i]);
            row[n + i] = 1.0;
            row[width - 1] = b[i];
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    let pivot = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, r: usize, col: usize| {
        let p = t[r][col];
        t[r].iter_mut().for_each(|v| *v /= p);
        for i in 0..t.len() {
            if i != r && t[i][col] != 0.0 {
                let f = t[i][col];
                let src = t[r].clone();
                t[i].iter_mut().zip(&src).for_each(|(v, s)| *v -= f * s);
            }
        }
        basis[r] = col;
    };

    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| -> bool {
        loop {
            // reduced costs of allowed columns
            let entering = (0..allowed).find(|&j| {
                if basis.contains(&j) {
                    return false;
                }
                let rc = cost[j] - (0..t.len()).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>();
                rc < -1e-10
            });
            let Some(col) = entering else { return true };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..t.len() {
                if t[i][col] > 1e-12 {
                    let ratio = t[i][width - 1] / t[i][col];
                    // Bland: smallest ratio, then smallest basic index
                    if best.map_or(true, |(bi, br)| ratio < br - 1e-12 || (ratio <= br + 1e-12 && basis[i] < basis[bi]))
                    {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = best else { return false };
            pivot(t, basis, r, col);
        }
    };

    let mut phase1 = vec![0.0; n + m];
    phase1[n..].iter_mut().for_each(|v| *v = 1.0);
    run(&mut t, &mut basis, &phase1, n + m);
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= n).map(|i| t[i][width - 1]).sum();
    if infeas > 1e-9 {
        return None;
    }
    // drive remaining artificials out of the basis
    for i in 0..m {
        if basis[i] >= n {
            if let Some(col) = (0..n).find(|&j| t[i][j].abs() > 1e-9) {
                pivot(&mut t, &mut basis, i, col);
            }
        }
    }
    let mut cost = vec![0.0; n + m];
    cost[..n].copy_from_slice(c);
    if !run(&mut t, &mut basis, &cost, n) {
        return Some(f64::NEG_INFINITY);
    }
    Some((0..m).map(|i| cost[basis[i]] * t[i][width - 1]).sum())
}

// Feasible and bounded by construction: b = A x0 with x0 ≥ 0, c = Aᵀy0 + s0 with s0 ≥ 0.
pub fn random_lp(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let n = rng.gen_range(2..=50);
    let m = rng.gen_range(1..=(n / 2).max(1));
    let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let x0: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { rng.gen_range(0.0..2.0) } else { 0.0 }).collect();
    let y0: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut b: Vec<f64> = a.iter().map(|row| row.iter().zip(&x0).map(|(a, x)| a * x).sum()).collect();
    let mut a = a;
    // simplex wants b ≥ 0
    for i in 0..m {
        if b[i] < 0.0 {
            b[i] = -b[i];
            a[i].iter_mut().for_each(|v| *v = -*v);
        }
    }
    let c: Vec<f64> = (0..n).map(|j| (0..m).map(|i| a[i][j] * y0[i]).sum::<f64>() + rng.gen_range(0.0..1.0)).collect();
    (a, b, c)
}

pub fn conic_lp(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> ConicProgram<f64> {
    let mut pb = ProgramBuilder::<f64>::new();
    let x = pb.add_vars(Cone::Nonnegative, c.len());
    for (j, &cj) in c.iter().enumerate() {
        pb.set_cost(x + j, cj);
    }
    for (row, &bi) in a.iter().zip(b) {
        let terms: Vec<(usize, f64)> = row.iter().enumerate().map(|(j, &v)| (x + j, v)).collect();
        pb.add_eq(&terms, bi);
    }
    pb.build(c.len()).unwrap()
}

/// Half-plane `a·(qv, z) ≤ r` obtained by fixing δ and W in a linearization row.
pub fn half_plane(row: &Row, qv: usize, z: usize, fixed: &BTreeMap<usize, f64>) -> Vec<([f64; 2], f64)> {
    let mut a = [0.0; 2];
    let mut moved = 0.0;
    for &(j, c) in &row.terms {
        if j == qv {
            a[0] += c;
        } else if j == z {
            a[1] += c;
        } else {
            moved += c * fixed[&j];
        }
    }
    let neg = |a: [f64; 2]| [-a[0], -a[1]];
    match row.sense {
        Sense::Le(r) => vec![(a, r - moved)],
        Sense::Ge(r) => vec![(neg(a), moved - r)],
        Sense::Eq(r) => vec![(a, r - moved), (neg(a), moved - r)],
        Sense::Range(lo, hi) => vec![(a, hi - moved), (neg(a), moved - lo)],
    }
}

/// Range of `qv` over the polygon, from its vertices (pairwise line
/// intersections that satisfy every half-plane).
pub fn project_by_vertices(planes: &[([f64; 2], f64)]) -> Option<(f64, f64)> {
    let mut range: Option<(f64, f64)> = None;
    for (i, (a, r)) in planes.iter().enumerate() {
        for (b, s) in &planes[i + 1..] {
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-14 {
                continue;
            }
            let p = [(r * b[1] - a[1] * s) / det, (a[0] * s - r * b[0]) / det];
            if planes.iter().all(|(c, t)| c[0] * p[0] + c[1] * p[1] <= t + 1e-12) {
                range = Some(match range {
                    None => (p[0], p[0]),
                    Some((lo, hi)) => (lo.min(p[0]), hi.max(p[0])),
                });
            }
        }
    }
    range
}

pub fn projected_qv(svc: &SvcSpec, delta: f64, w: f64) -> Option<(f64, f64)> {
    let case = ieee30();
    let index = MicpIndex::allocate(&case, 1, &case.candidate_buses());
    let rows = emit_trilinear_linearization(&case, 0, &index, svc);
    // first candidate only
    let rows: Vec<Row> = rows.into_iter().take(6).collect();
    let bus = index.candidate_positions()[0];
    let fixed = BTreeMap::from([(index.w(bus, 0), w), (index.delta(0), delta)]);
    let planes: Vec<_> = rows.iter().flat_map(|r| half_plane(r, index.qv(0, 0), index.z(0, 0), &fixed)).collect();
    project_by_vertices(&planes)
}
