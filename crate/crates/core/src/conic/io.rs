//! Plain-text program format.
//!
//! ```text
//! conic-program v1
//! dims <n_vars> <n_model> <n_eq>
//! block <free|nonneg|soc|rsoc> <start> <len>
//! var <j> <cost> <lower> <upper> <0|1>
//! eq <row> <col> <coef>
//! rhs <row> <value>
//! end
//! ```
//!
//! Numbers use shortest round-trip decimal form, so write → read is exact for
//! `f64`. `var` lines are only written for variables with a nonzero cost,
//! finite bounds or an integrality mark.

use std::fmt::Write as _;

use super::program::{Cone, ConeBlock, ConicProgram, ProgramError};
use crate::Scalar;

const HEADER: &str = "conic-program v1";

pub fn write_program<T: Scalar>(p: &ConicProgram<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "dims {} {} {}", p.n_vars(), p.n_model(), p.n_eq());
    for b in p.blocks() {
        let _ = writeln!(out, "block {} {} {}", b.cone.tag(), b.start, b.len);
    }
    for j in 0..p.n_vars() {
        let (c, lo, hi, int) = (p.objective[j], p.lower[j], p.upper[j], p.integer[j]);
        if c != T::zero() || lo.is_finite() || hi.is_finite() || int {
            let _ = writeln!(
                out,
                "var {j} {} {} {} {}",
                c.to_f64_lossy(),
                lo.to_f64_lossy(),
                hi.to_f64_lossy(),
                u8::from(int)
            );
        }
    }
    for &(i, j, a) in p.equalities() {
        let _ = writeln!(out, "eq {i} {j} {}", a.to_f64_lossy());
    }
    for (i, b) in p.rhs().iter().enumerate() {
        if *b != T::zero() {
            let _ = writeln!(out, "rhs {i} {}", b.to_f64_lossy());
        }
    }
    out.push_str("end\n");
    out
}

pub fn read_program<T: Scalar>(text: &str) -> Result<ConicProgram<T>, ProgramError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let err = |line: usize, message: &str| ProgramError::Format { line, message: message.to_string() };

    match lines.next() {
        Some((_, l)) if l == HEADER => {}
        Some((n, _)) => return Err(err(n, "missing header")),
        None => return Err(err(0, "empty input")),
    }
    let mut p: Option<ConicProgram<T>> = None;
    let mut ended = false;
    for (n, line) in lines {
        if ended {
            return Err(err(n, "content after end"));
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |k: usize| -> Result<f64, ProgramError> {
            fields.get(k).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| err(n, "bad number"))
        };
        let idx = |k: usize| -> Result<usize, ProgramError> {
            fields.get(k).and_then(|s| s.parse::<usize>().ok()).ok_or_else(|| err(n, "bad index"))
        };
        if fields[0] == "dims" {
            let (nv, nm, ne) = (idx(1)?, idx(2)?, idx(3)?);
            p = Some(ConicProgram {
                objective: vec![T::zero(); nv],
                eq: Vec::new(),
                rhs: vec![T::zero(); ne],
                blocks: Vec::new(),
                lower: vec![T::neg_infinity(); nv],
                upper: vec![T::infinity(); nv],
                integer: vec![false; nv],
                n_model: nm,
            });
            continue;
        }
        if fields[0] == "end" {
            ended = true;
            continue;
        }
        let prog = p.as_mut().ok_or_else(|| err(n, "dims must come first"))?;
        match fields[0] {
            "block" => {
                let cone = fields.get(1).and_then(|t| Cone::from_tag(t)).ok_or_else(|| err(n, "unknown cone"))?;
                prog.blocks.push(ConeBlock { cone, start: idx(2)?, len: idx(3)? });
            }
            "var" => {
                let j = idx(1)?;
                if j >= prog.objective.len() {
                    return Err(err(n, "variable out of range"));
                }
                prog.objective[j] = T::lit(num(2)?);
                prog.lower[j] = T::lit(num(3)?);
                prog.upper[j] = T::lit(num(4)?);
                prog.integer[j] = idx(5)? == 1;
            }
            "eq" => prog.eq.push((idx(1)?, idx(2)?, T::lit(num(3)?))),
            "rhs" => {
                let i = idx(1)?;
                *prog.rhs.get_mut(i).ok_or_else(|| err(n, "row out of range"))? = T::lit(num(2)?);
            }
            _ => return Err(err(n, "unknown record")),
        }
    }
    if !ended {
        return Err(err(text.lines().count(), "missing end"));
    }
    let p = p.ok_or_else(|| err(0, "missing dims"))?;
    p.validate()?;
    Ok(p)
}
