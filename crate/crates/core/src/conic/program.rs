use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

/// Cone attached to a contiguous block of variables.
///
/// * `SecondOrder` over `(t, w…)`: `t ≥ ‖w‖`.
/// * `RotatedSecondOrder` over `(u, v, w…)`: `2uv ≥ ‖w‖²`, `u, v ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cone {
    Free,
    Nonnegative,
    SecondOrder,
    RotatedSecondOrder,
}

impl Cone {
    pub(crate) fn tag(self) -> &'static str {
        match self {
            Cone::Free => "free",
            Cone::Nonnegative => "nonneg",
            Cone::SecondOrder => "soc",
            Cone::RotatedSecondOrder => "rsoc",
        }
    }

    pub(crate) fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "free" => Cone::Free,
            "nonneg" => Cone::Nonnegative,
            "soc" => Cone::SecondOrder,
            "rsoc" => Cone::RotatedSecondOrder,
            _ => return None,
        })
    }

    fn mergeable(self) -> bool {
        matches!(self, Cone::Free | Cone::Nonnegative)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeBlock {
    pub cone: Cone,
    pub start: usize,
    pub len: usize,
}

impl ConeBlock {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProgramError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("cone blocks do not partition the variables: {0}")]
    Partition(String),
    #[error("variable {0} is marked integer but not bounded in [0, 1]")]
    IntegerBounds(usize),
    #[error("variable {0} is not in the integrality mask")]
    NotInteger(usize),
    #[error("malformed program text at line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Standard-form conic program
///
/// ```text
/// minimize    cᵀx
/// subject to  A x = b
///             lower ≤ x ≤ upper
///             x[block] ∈ cone(block)   for every block
///             x[j] ∈ {0, 1}            for j in the integrality mask
/// ```
///
/// The first `n_model` variables are the named model quantities; the rest are
/// cone copies and inequality slacks added during assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram<T> {
    pub(crate) objective: Vec<T>,
    pub(crate) eq: Vec<(usize, usize, T)>,
    pub(crate) rhs: Vec<T>,
    pub(crate) blocks: Vec<ConeBlock>,
    pub(crate) lower: Vec<T>,
    pub(crate) upper: Vec<T>,
    pub(crate) integer: Vec<bool>,
    pub(crate) n_model: usize,
}

impl<T: Scalar> ConicProgram<T> {
    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_eq(&self) -> usize {
        self.rhs.len()
    }

    pub fn n_model(&self) -> usize {
        self.n_model
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    /// Equality coefficients as `(row, column, value)` in insertion order.
    pub fn equalities(&self) -> &[(usize, usize, T)] {
        &self.eq
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    pub fn blocks(&self) -> &[ConeBlock] {
        &self.blocks
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn integer_mask(&self) -> &[bool] {
        &self.integer
    }

    pub fn integer_positions(&self) -> Vec<usize> {
        (0..self.n_vars()).filter(|&j| self.integer[j]).collect()
    }

    /// Same program with a different objective.
    pub fn with_objective(&self, objective: Vec<T>) -> Result<Self, ProgramError> {
        if objective.len() != self.n_vars() {
            return Err(ProgramError::Dimension(format!(
                "objective has {} entries, program has {} variables",
                objective.len(),
                self.n_vars()
            )));
        }
        Ok(Self { objective, ..self.clone() })
    }

    /// Collapses the bounds of integer variables to the given values.
    pub fn with_fixings(&self, fixings: &BTreeMap<usize, bool>) -> Result<Self, ProgramError> {
        let mut out = self.clone();
        for (&j, &on) in fixings {
            if j >= self.n_vars() || !self.integer[j] {
                return Err(ProgramError::NotInteger(j));
            }
            let v = if on { T::one() } else { T::zero() };
            out.lower[j] = v;
            out.upper[j] = v;
        }
        Ok(out)
    }

    /// Same program with the given bounds on one variable.
    pub fn with_bounds(&self, j: usize, lower: T, upper: T) -> Self {
        let mut out = self.clone();
        out.lower[j] = lower;
        out.upper[j] = upper;
        out
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        self.objective.iter().zip(x).fold(T::zero(), |acc, (&c, &v)| acc + c * v)
    }

    /// `A x - b` per equality row.
    pub fn eq_residual(&self, x: &[T]) -> Vec<T> {
        let mut r: Vec<T> = self.rhs.iter().map(|&b| -b).collect();
        for &(i, j, a) in &self.eq {
            r[i] += a * x[j];
        }
        r
    }

    /// Largest violation of bounds and cone membership at `x`.
    pub fn cone_violation(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        for j in 0..self.n_vars() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for b in &self.blocks {
            let v = &x[b.range()];
            let viol = match b.cone {
                Cone::Free => T::zero(),
                Cone::Nonnegative => v.iter().fold(T::zero(), |m, &a| m.max(-a)),
                Cone::SecondOrder => {
                    let tail = v[1..].iter().fold(T::zero(), |s, &a| s + a * a).sqrt();
                    (tail - v[0]).max(T::zero())
                }
                Cone::RotatedSecondOrder => {
                    let (u, w) = (v[0], v[1]);
                    let tail = v[2..].iter().fold(T::zero(), |s, &a| s + a * a);
                    // distance-like measure: (u+v)/√2 ≥ ‖((u-v)/√2, w)‖
                    let half = T::lit(std::f64::consts::FRAC_1_SQRT_2);
                    let t = (u + w) * half;
                    let d = (u - w) * half;
                    ((d * d + tail).sqrt() - t).max(T::zero())
                }
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Checks dimensions, the block partition and the integrality mask.
    pub fn validate(&self) -> Result<(), ProgramError> {
        let n = self.n_vars();
        if self.lower.len() != n || self.upper.len() != n || self.integer.len() != n {
            return Err(ProgramError::Dimension("bound or mask length differs from variable count".into()));
        }
        if self.n_model > n {
            return Err(ProgramError::Dimension("model variable count exceeds total".into()));
        }
        for &(i, j, a) in &self.eq {
            if i >= self.n_eq() || j >= n || !a.is_finite() {
                return Err(ProgramError::Dimension(format!("bad equality entry ({i}, {j})")));
            }
        }
        let mut next = 0;
        for b in &self.blocks {
            if b.start != next || b.len == 0 {
                return Err(ProgramError::Partition(format!("block at {} (expected {next})", b.start)));
            }
            if b.cone == Cone::RotatedSecondOrder && b.len < 2 {
                return Err(ProgramError::Partition(format!("rotated cone at {} shorter than 2", b.start)));
            }
            next += b.len;
        }
        if next != n {
            return Err(ProgramError::Partition(format!("blocks cover {next} of {n} variables")));
        }
        for j in 0..n {
            if self.integer[j] && !(self.lower[j] >= T::zero() && self.upper[j] <= T::one()) {
                return Err(ProgramError::IntegerBounds(j));
            }
        }
        Ok(())
    }
}

/// Incremental builder for [`ConicProgram`].
#[derive(Debug, Clone)]
pub struct ProgramBuilder<T> {
    objective: Vec<T>,
    eq: Vec<(usize, usize, T)>,
    rhs: Vec<T>,
    blocks: Vec<ConeBlock>,
    lower: Vec<T>,
    upper: Vec<T>,
    integer: Vec<bool>,
}

impl<T: Scalar> Default for ProgramBuilder<T> {
    fn default() -> Self {
        Self {
            objective: Vec::new(),
            eq: Vec::new(),
            rhs: Vec::new(),
            blocks: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            integer: Vec::new(),
        }
    }
}

impl<T: Scalar> ProgramBuilder<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_eq(&self) -> usize {
        self.rhs.len()
    }

    fn push_block(&mut self, cone: Cone, len: usize) -> usize {
        let start = self.n_vars();
        match self.blocks.last_mut() {
            Some(last) if cone.mergeable() && last.cone == cone => last.len += len,
            _ => self.blocks.push(ConeBlock { cone, start, len }),
        }
        self.objective.extend(std::iter::repeat(T::zero()).take(len));
        self.lower.extend(std::iter::repeat(T::neg_infinity()).take(len));
        self.upper.extend(std::iter::repeat(T::infinity()).take(len));
        self.integer.extend(std::iter::repeat(false).take(len));
        start
    }

    /// Adds `len` free or nonnegative scalar variables; returns the first position.
    pub fn add_vars(&mut self, cone: Cone, len: usize) -> usize {
        assert!(cone.mergeable(), "use add_cone for conic blocks");
        self.push_block(cone, len)
    }

    pub fn add_var(&mut self, cone: Cone) -> usize {
        self.add_vars(cone, 1)
    }

    /// Adds a conic block of `len` fresh variables; returns the first position.
    pub fn add_cone(&mut self, cone: Cone, len: usize) -> usize {
        assert!(len > 0);
        if cone.mergeable() {
            return self.add_vars(cone, len);
        }
        self.push_block(cone, len)
    }

    pub fn set_cost(&mut self, j: usize, c: T) {
        self.objective[j] = c;
    }

    pub fn add_cost(&mut self, j: usize, c: T) {
        self.objective[j] += c;
    }

    pub fn set_bounds(&mut self, j: usize, lower: T, upper: T) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    /// Tightens bounds (intersection with the current ones).
    pub fn tighten(&mut self, j: usize, lower: T, upper: T) {
        self.lower[j] = self.lower[j].max(lower);
        self.upper[j] = self.upper[j].min(upper);
    }

    /// Marks a variable binary, setting its bounds to [0, 1].
    pub fn set_binary(&mut self, j: usize) {
        self.integer[j] = true;
        self.lower[j] = self.lower[j].max(T::zero());
        self.upper[j] = self.upper[j].min(T::one());
    }

    pub fn add_eq(&mut self, terms: &[(usize, T)], rhs: T) -> usize {
        let row = self.n_eq();
        self.eq.extend(terms.iter().map(|&(j, a)| (row, j, a)));
        self.rhs.push(rhs);
        row
    }

    /// `terms ≤ rhs` through a nonnegative slack.
    pub fn add_le(&mut self, terms: &[(usize, T)], rhs: T) -> usize {
        let s = self.add_var(Cone::Nonnegative);
        let mut t = terms.to_vec();
        t.push((s, T::one()));
        self.add_eq(&t, rhs);
        s
    }

    /// `terms ≥ rhs` through a nonnegative surplus.
    pub fn add_ge(&mut self, terms: &[(usize, T)], rhs: T) -> usize {
        let s = self.add_var(Cone::Nonnegative);
        let mut t = terms.to_vec();
        t.push((s, -T::one()));
        self.add_eq(&t, rhs);
        s
    }

    /// `lo ≤ terms ≤ hi` through one bounded slack.
    pub fn add_range(&mut self, terms: &[(usize, T)], lo: T, hi: T) -> usize {
        let s = self.add_var(Cone::Free);
        self.set_bounds(s, lo, hi);
        let mut t = terms.to_vec();
        t.push((s, -T::one()));
        self.add_eq(&t, T::zero());
        s
    }

    pub fn build(self, n_model: usize) -> Result<ConicProgram<T>, ProgramError> {
        let p = ConicProgram {
            objective: self.objective,
            eq: self.eq,
            rhs: self.rhs,
            blocks: self.blocks,
            lower: self.lower,
            upper: self.upper,
            integer: self.integer,
            n_model,
        };
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacent_scalar_blocks_merge() {
        let mut b = ProgramBuilder::<f64>::new();
        b.add_vars(Cone::Free, 2);
        b.add_var(Cone::Free);
        b.add_cone(Cone::SecondOrder, 3);
        b.add_cone(Cone::SecondOrder, 3);
        b.add_var(Cone::Nonnegative);
        let p = b.build(0).unwrap();
        let kinds: Vec<(Cone, usize)> = p.blocks().iter().map(|b| (b.cone, b.len)).collect();
        assert_eq!(
            kinds,
            vec![(Cone::Free, 3), (Cone::SecondOrder, 3), (Cone::SecondOrder, 3), (Cone::Nonnegative, 1)]
        );
    }

    #[test]
    fn integer_mask_requires_unit_box() {
        let mut b = ProgramBuilder::<f64>::new();
        let j = b.add_var(Cone::Free);
        b.set_binary(j);
        b.set_bounds(j, 0.0, 2.0);
        assert_eq!(b.build(1).unwrap_err(), ProgramError::IntegerBounds(0));
    }

    #[test]
    fn fixings_outside_mask_are_rejected() {
        let mut b = ProgramBuilder::<f64>::new();
        b.add_vars(Cone::Free, 2);
        b.set_binary(1);
        let p = b.build(2).unwrap();
        assert!(p.with_fixings(&BTreeMap::from([(1, true)])).is_ok());
        assert_eq!(p.with_fixings(&BTreeMap::from([(0, true)])).unwrap_err(), ProgramError::NotInteger(0));
    }

    #[test]
    fn rotated_violation() {
        let mut b = ProgramBuilder::<f64>::new();
        b.add_cone(Cone::RotatedSecondOrder, 3);
        let p = b.build(3).unwrap();
        assert_eq!(p.cone_violation(&[2.0, 1.0, 2.0]), 0.0);
        assert!(p.cone_violation(&[1.0, 1.0, 2.0]) > 0.1);
    }
}
