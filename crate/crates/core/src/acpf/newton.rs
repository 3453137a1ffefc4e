//! Polar Newton-Raphson power flow.

use num_complex::Complex;
use serde::Serialize;

use crate::network::{Load, NetworkCase};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

/// Active output and voltage setpoint of one generator bus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setpoint {
    pub bus: usize,
    pub p: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcSolution<T> {
    pub converged: bool,
    pub iterations: usize,
    /// Largest bus power mismatch at the final iterate (p.u.).
    pub mismatch: T,
    /// Mismatch before each Newton step.
    pub trace: Vec<T>,
    pub kind: Vec<BusKind>,
    pub vm: Vec<T>,
    pub va: Vec<T>,
    /// Complex power entering each branch at its from and to terminals.
    pub s_from: Vec<Complex<T>>,
    pub s_to: Vec<Complex<T>>,
    /// Σ Re(s_from + s_to) (p.u.).
    pub loss: T,
}

/// Dense bus admittance matrix with extra shunt susceptances `(bus id, b)`.
pub fn admittance<T: Scalar>(case: &NetworkCase, extra_shunts: &[(usize, f64)]) -> Vec<Vec<Complex<T>>> {
    let n = case.buses().len();
    let mut y = vec![vec![Complex::new(T::zero(), T::zero()); n]; n];
    for (i, b) in case.buses().iter().enumerate() {
        y[i][i].im += T::lit(b.shunt_b);
    }
    for &(id, b) in extra_shunts {
        let i = case.pos(id);
        y[i][i].im += T::lit(b);
    }
    for br in case.branches() {
        let (f, t) = (case.pos(br.from_bus), case.pos(br.to_bus));
        let [yff, yft, ytf, ytt] = branch_admittance::<T>(br);
        y[f][f] += yff;
        y[f][t] += yft;
        y[t][f] += ytf;
        y[t][t] += ytt;
    }
    y
}

// π-model with an ideal transformer τ∠θ on the from side
fn branch_admittance<T: Scalar>(br: &crate::network::Branch) -> [Complex<T>; 4] {
    let ys = Complex::new(T::one(), T::zero()) / Complex::new(T::lit(br.r), T::lit(br.x));
    let half = Complex::new(T::zero(), T::lit(br.b_ch / 2.0));
    let tap = Complex::from_polar(T::lit(br.tau), T::lit(br.theta_ps));
    let ytt = ys + half;
    let yff = ytt / (tap * tap.conj());
    let yft = -ys / tap.conj();
    let ytf = -ys / tap;
    [yff, yft, ytf, ytt]
}

/// Complex power injections `V ⊙ conj(Y V)`.
pub fn injections<T: Scalar>(y: &[Vec<Complex<T>>], vm: &[T], va: &[T]) -> Vec<Complex<T>> {
    let v: Vec<Complex<T>> = vm.iter().zip(va).map(|(&m, &a)| Complex::from_polar(m, a)).collect();
    (0..v.len())
        .map(|i| {
            let current =
                y[i].iter().zip(&v).fold(Complex::new(T::zero(), T::zero()), |acc, (&yij, &vj)| acc + yij * vj);
            v[i] * current.conj()
        })
        .collect()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn lu_solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < T::lit(1e-14) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let d = f * a[col][k];
                a[row][k] -= d;
            }
            let d = f * b[col];
            b[row] -= d;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let s = (row + 1..n).fold(b[row], |s, k| s - a[row][k] * x[k]);
        x[row] = s / a[row][row];
    }
    Some(x)
}

pub const MAX_ITERATIONS: usize = 30;

/// Newton-Raphson from a flat start.
///
/// The slack bus holds its setpoint voltage at angle 0; every other generator
/// bus is PV with the given active output; all remaining buses are PQ. Loads
/// are subtracted at their buses and `svc` adds constant susceptances.
pub fn newton_raphson<T: Scalar>(
    case: &NetworkCase,
    loads: &[Load],
    generators: &[Setpoint],
    svc: &[(usize, f64)],
    slack: usize,
    tol: T,
) -> AcSolution<T> {
    let n = case.buses().len();
    let y = admittance::<T>(case, svc);
    let mut kind = vec![BusKind::Pq; n];
    let mut p_spec = vec![T::zero(); n];
    let mut q_spec = vec![T::zero(); n];
    let mut vm = vec![T::one(); n];
    let mut va = vec![T::zero(); n];
    for l in loads {
        let i = case.pos(l.bus);
        p_spec[i] -= T::lit(l.p_base);
        q_spec[i] -= T::lit(l.q_base);
    }
    for g in generators {
        let i = case.pos(g.bus);
        p_spec[i] += T::lit(g.p);
        kind[i] = BusKind::Pv;
        vm[i] = T::lit(g.v);
    }
    let s = case.pos(slack);
    kind[s] = BusKind::Slack;

    let angle_vars: Vec<usize> = (0..n).filter(|&i| kind[i] != BusKind::Slack).collect();
    let mag_vars: Vec<usize> = (0..n).filter(|&i| kind[i] == BusKind::Pq).collect();
    let (na, nm) = (angle_vars.len(), mag_vars.len());

    let mismatch_of = |vm: &[T], va: &[T]| {
        let inj = injections(&y, vm, va);
        let mut f = Vec::with_capacity(na + nm);
        f.extend(angle_vars.iter().map(|&i| inj[i].re - p_spec[i]));
        f.extend(mag_vars.iter().map(|&i| inj[i].im - q_spec[i]));
        let norm = f.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        (f, inj, norm)
    };

    let mut trace = Vec::new();
    let mut iterations = 0;
    let (mut f, mut inj, mut norm) = mismatch_of(&vm, &va);
    while norm > tol && iterations < MAX_ITERATIONS && norm.is_finite() {
        trace.push(norm);
        let jac = jacobian(&y, &vm, &va, &inj, &angle_vars, &mag_vars);
        let Some(dx) = lu_solve(jac, f.iter().map(|&v| -v).collect()) else {
            break;
        };
        for (a, &i) in angle_vars.iter().enumerate() {
            va[i] += dx[a];
        }
        for (m, &i) in mag_vars.iter().enumerate() {
            let step = dx[na + m] * vm[i];
            vm[i] += step;
        }
        iterations += 1;
        (f, inj, norm) = mismatch_of(&vm, &va);
    }
    let _ = inj;
    trace.push(norm);

    let v: Vec<Complex<T>> = vm.iter().zip(&va).map(|(&m, &a)| Complex::from_polar(m, a)).collect();
    let (mut s_from, mut s_to) = (Vec::new(), Vec::new());
    let mut loss = T::zero();
    for br in case.branches() {
        let (fi, ti) = (case.pos(br.from_bus), case.pos(br.to_bus));
        let [yff, yft, ytf, ytt] = branch_admittance::<T>(br);
        let i_f = yff * v[fi] + yft * v[ti];
        let i_t = ytf * v[fi] + ytt * v[ti];
        let (sf, st) = (v[fi] * i_f.conj(), v[ti] * i_t.conj());
        loss += sf.re + st.re;
        s_from.push(sf);
        s_to.push(st);
    }
    AcSolution { converged: norm <= tol, iterations, mismatch: norm, trace, kind, vm, va, s_from, s_to, loss }
}

// Jacobian of [P; Q] mismatches w.r.t. [θ; ΔV/V].
fn jacobian<T: Scalar>(
    y: &[Vec<Complex<T>>],
    vm: &[T],
    va: &[T],
    inj: &[Complex<T>],
    angle_vars: &[usize],
    mag_vars: &[usize],
) -> Vec<Vec<T>> {
    let (na, nm) = (angle_vars.len(), mag_vars.len());
    let mut jac = vec![vec![T::zero(); na + nm]; na + nm];
    // H_ij = ∂P_i/∂θ_j, N_ij = V_j ∂P_i/∂V_j, M_ij = ∂Q_i/∂θ_j, L_ij = V_j ∂Q_i/∂V_j
    let entry = |i: usize, j: usize| -> (T, T, T, T) {
        let (g, b) = (y[i][j].re, y[i][j].im);
        if i == j {
            let (p, q) = (inj[i].re, inj[i].im);
            let v2 = vm[i] * vm[i];
            (-q - b * v2, p + g * v2, p - g * v2, q - b * v2)
        } else {
            let d = va[i] - va[j];
            let vv = vm[i] * vm[j];
            let (s, c) = (d.sin(), d.cos());
            let h = vv * (g * s - b * c);
            let nn = vv * (g * c + b * s);
            (h, nn, -nn, h)
        }
    };
    for (r, &i) in angle_vars.iter().enumerate() {
        for (c, &j) in angle_vars.iter().enumerate() {
            jac[r][c] = entry(i, j).0;
        }
        for (c, &j) in mag_vars.iter().enumerate() {
            jac[r][na + c] = entry(i, j).1;
        }
    }
    for (r, &i) in mag_vars.iter().enumerate() {
        for (c, &j) in angle_vars.iter().enumerate() {
            jac[na + r][c] = entry(i, j).2;
        }
        for (c, &j) in mag_vars.iter().enumerate() {
            jac[na + r][na + c] = entry(i, j).3;
        }
    }
    jac
}
