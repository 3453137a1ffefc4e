//! Symbolic constraint records emitted by the formulation layers before they
//! are lowered into a [`ConicProgram`](crate::conic::ConicProgram).

use std::fmt;

use crate::conic::Cone;

/// `Σ coef·x[pos] + constant`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Affine {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Affine {
    pub fn var(pos: usize) -> Self {
        Self { terms: vec![(pos, 1.0)], constant: 0.0 }
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn plus(mut self, pos: usize, coef: f64) -> Self {
        self.terms.push((pos, coef));
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, a)| a * x[j]).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sense {
    Eq(f64),
    Le(f64),
    Ge(f64),
    Range(f64, f64),
}

/// One linear constraint `lhs (sense)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub label: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
}

impl Row {
    pub fn new(label: impl Into<String>, terms: Vec<(usize, f64)>, sense: Sense) -> Self {
        Self { label: label.into(), terms, sense }
    }

    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let v = self.lhs(x);
        match self.sense {
            Sense::Eq(b) => (v - b).abs(),
            Sense::Le(b) => (v - b).max(0.0),
            Sense::Ge(b) => (b - v).max(0.0),
            Sense::Range(lo, hi) => (lo - v).max(v - hi).max(0.0),
        }
    }

    pub fn coefficient(&self, pos: usize) -> f64 {
        self.terms.iter().filter(|t| t.0 == pos).map(|t| t.1).sum()
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.label)?;
        for (j, a) in &self.terms {
            write!(f, " {a:+}*x{j}")?;
        }
        match self.sense {
            Sense::Eq(b) => write!(f, " = {b}"),
            Sense::Le(b) => write!(f, " <= {b}"),
            Sense::Ge(b) => write!(f, " >= {b}"),
            Sense::Range(lo, hi) => write!(f, " in [{lo}, {hi}]"),
        }
    }
}

/// Membership of a tuple of affine expressions in a cone.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeRecord {
    pub label: String,
    pub cone: Cone,
    pub entries: Vec<Affine>,
}

impl ConeRecord {
    /// Conic slack: `t - ‖w‖` for second-order cones, `2uv - ‖w‖²` for
    /// rotated cones. Nonnegative on the cone.
    pub fn margin(&self, x: &[f64]) -> f64 {
        let v: Vec<f64> = self.entries.iter().map(|e| e.eval(x)).collect();
        match self.cone {
            Cone::SecondOrder => v[0] - v[1..].iter().map(|a| a * a).sum::<f64>().sqrt(),
            Cone::RotatedSecondOrder => 2.0 * v[0] * v[1] - v[2..].iter().map(|a| a * a).sum::<f64>(),
            Cone::Nonnegative => v.iter().copied().fold(f64::INFINITY, f64::min),
            Cone::Free => 0.0,
        }
    }
}

impl fmt::Display for ConeRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}(", self.label, self.cone)?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", e.constant)?;
            for (j, a) in &e.terms {
                write!(f, " {a:+}*x{j}")?;
            }
        }
        write!(f, ")")
    }
}
