//! Reader and writer for the MATPOWER text case format (version 2).
//!
//! Only `mpc.baseMVA`, `mpc.bus`, `mpc.gen` and `mpc.branch` are interpreted;
//! other matrices (`gencost`, ...) and cell arrays (`bus_name`) are skipped.
//!
//! | table    | columns used                                                  |
//! |----------|---------------------------------------------------------------|
//! | `bus`    | 1 id, 2 type, 3 Pd, 4 Qd, 5 Gs, 6 Bs, 12 Vmax, 13 Vmin         |
//! | `gen`    | 1 bus, 4 Qmax, 5 Qmin, 8 status, 9 Pmax, 10 Pmin               |
//! | `branch` | 1 from, 2 to, 3 r, 4 x, 5 b, 6 rateA, 9 ratio, 10 angle, 11 status |
//!
//! MW, MVar and MVA columns are divided by the base; a tap ratio of 0 means
//! 1; the shift angle is converted from degrees to radians. Out-of-service
//! generators and branches are dropped. Isolated buses (type 4) and nonzero
//! shunt conductance are rejected.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use super::{Branch, Bus, Generator, Load, NetworkCase, NetworkError};

type Rows = Vec<(usize, Vec<f64>)>;

enum Mode {
    Top,
    Matrix(String),
    Cell,
}

fn parse_err(line: usize, message: impl Into<String>) -> NetworkError {
    NetworkError::Parse { line, message: message.into() }
}

fn push_rows(rows: &mut Rows, chunk: &str, line: usize) -> Result<(), NetworkError> {
    for row in chunk.split(';') {
        let row = row.trim();
        if row.is_empty() {
            continue;
        }
        let values = row
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| parse_err(line, format!("invalid number `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((line, values));
    }
    Ok(())
}

/// Parses a MATPOWER case and returns a validated per-unit [`NetworkCase`].
pub fn parse_case(text: &str) -> Result<NetworkCase, NetworkError> {
    let mut base_mva = None;
    let mut tables: BTreeMap<String, Rows> = BTreeMap::new();
    let mut mode = Mode::Top;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.split('%').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match &mode {
            Mode::Cell => {
                if line.contains('}') {
                    mode = Mode::Top;
                }
            }
            Mode::Matrix(name) => {
                let (body, closed) = match line.find(']') {
                    Some(p) => (&line[..p], true),
                    None => (line, false),
                };
                let rows = tables.get_mut(name).expect("table opened");
                push_rows(rows, body, line_no)?;
                if closed {
                    mode = Mode::Top;
                }
            }
            Mode::Top => {
                if line.starts_with("function") {
                    continue;
                }
                let Some((lhs, rhs)) = line.split_once('=') else {
                    return Err(parse_err(line_no, format!("unexpected content `{line}`")));
                };
                let Some(name) = lhs.trim().strip_prefix("mpc.") else {
                    return Err(parse_err(line_no, format!("expected `mpc.<field> = ...`, got `{line}`")));
                };
                let name = name.trim().to_string();
                let rhs = rhs.trim();
                if let Some(rest) = rhs.strip_prefix('[') {
                    let (body, closed) = match rest.find(']') {
                        Some(p) => (&rest[..p], true),
                        None => (rest, false),
                    };
                    if tables.contains_key(&name) {
                        return Err(parse_err(line_no, format!("duplicate table mpc.{name}")));
                    }
                    let rows = tables.entry(name.clone()).or_default();
                    push_rows(rows, body, line_no)?;
                    if !closed {
                        mode = Mode::Matrix(name);
                    }
                } else if rhs.starts_with('{') {
                    if !rhs.contains('}') {
                        mode = Mode::Cell;
                    }
                } else if name == "baseMVA" {
                    let v = rhs.trim_end_matches(';').trim();
                    base_mva =
                        Some(v.parse::<f64>().map_err(|_| parse_err(line_no, format!("invalid baseMVA `{v}`")))?);
                }
            }
        }
    }
    if !matches!(mode, Mode::Top) {
        return Err(parse_err(last_line, "unterminated matrix or cell array"));
    }

    let base = base_mva.ok_or_else(|| parse_err(last_line, "missing mpc.baseMVA"))?;
    if !(base > 0.0) {
        return Err(parse_err(last_line, "baseMVA must be positive"));
    }
    let table = |name: &str| tables.get(name).ok_or_else(|| parse_err(last_line, format!("missing mpc.{name}")));
    let check_width = |rows: &Rows, width: usize, name: &str| -> Result<(), NetworkError> {
        for (line, row) in rows {
            if row.len() < width {
                return Err(parse_err(
                    *line,
                    format!("mpc.{name} row has {} columns, need at least {width}", row.len()),
                ));
            }
        }
        Ok(())
    };
    let bus_rows = table("bus")?;
    let gen_rows = table("gen")?;
    let branch_rows = table("branch")?;
    check_width(bus_rows, 13, "bus")?;
    check_width(gen_rows, 10, "gen")?;
    check_width(branch_rows, 11, "branch")?;

    let as_id = |v: f64, line: usize| -> Result<usize, NetworkError> {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(parse_err(line, format!("invalid bus id {v}")))
        }
    };

    let mut generators = Vec::new();
    for (line, g) in gen_rows {
        if g[7] <= 0.0 {
            continue;
        }
        generators.push(Generator {
            bus: as_id(g[0], *line)?,
            p_min: g[9] / base,
            p_max: g[8] / base,
            q_min: g[4] / base,
            q_max: g[3] / base,
        });
    }
    let gen_buses: HashSet<usize> = generators.iter().map(|g| g.bus).collect();

    let mut buses = Vec::with_capacity(bus_rows.len());
    let mut loads = Vec::new();
    for (line, b) in bus_rows {
        let id = as_id(b[0], *line)?;
        if b[1] == 4.0 {
            return Err(parse_err(*line, format!("bus {id}: isolated buses are not supported")));
        }
        if b[4] != 0.0 {
            return Err(parse_err(*line, format!("bus {id}: shunt conductance is not supported")));
        }
        if b[2] != 0.0 || b[3] != 0.0 {
            loads.push(Load { bus: id, p_base: b[2] / base, q_base: b[3] / base });
        }
        buses.push(Bus {
            id,
            v_min: b[12],
            v_max: b[11],
            shunt_b: b[5] / base,
            is_candidate: !gen_buses.contains(&id),
        });
    }

    let mut branches = Vec::new();
    for (line, r) in branch_rows {
        if r[10] <= 0.0 {
            continue;
        }
        branches.push(Branch {
            from_bus: as_id(r[0], *line)?,
            to_bus: as_id(r[1], *line)?,
            r: r[2],
            x: r[3],
            b_ch: r[4],
            tau: if r[8] == 0.0 { 1.0 } else { r[8] },
            theta_ps: r[9].to_radians(),
            s_max: r[5] / base,
        });
    }

    NetworkCase::new(base, buses, branches, generators, loads)
}

// Finds a value near `guess` that `forward` maps exactly onto `target`, so
// that per-unit conversion survives a write/read cycle bit for bit.
fn invert(target: f64, guess: f64, forward: impl Fn(f64) -> f64) -> f64 {
    if forward(guess) == target || !guess.is_finite() || guess == 0.0 {
        return guess;
    }
    let (mut up, mut down) = (guess, guess);
    for _ in 0..16 {
        up = f64::from_bits(if up > 0.0 { up.to_bits() + 1 } else { up.to_bits() - 1 });
        down = f64::from_bits(if down > 0.0 { down.to_bits() - 1 } else { down.to_bits() + 1 });
        if forward(up) == target {
            return up;
        }
        if forward(down) == target {
            return down;
        }
    }
    guess
}

fn to_mw(pu: f64, base: f64) -> f64 {
    invert(pu, pu * base, |mw| mw / base)
}

/// Writes a case in the same dialect [`parse_case`] reads.
pub fn serialize_case(case: &NetworkCase) -> String {
    let base = case.base_mva();
    let mut pd = vec![0.0; case.buses().len()];
    let mut qd = vec![0.0; case.buses().len()];
    for l in case.loads() {
        let i = case.pos(l.bus);
        pd[i] += l.p_base;
        qd[i] += l.q_base;
    }
    let slack = case.generators().first().map(|g| g.bus);
    let gen_buses = case.generator_buses();

    let mut out = String::new();
    out.push_str("function mpc = case\n");
    out.push_str("mpc.version = '2';\n");
    let _ = writeln!(out, "mpc.baseMVA = {base};\n");
    out.push_str("%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n");
    out.push_str("mpc.bus = [\n");
    for (i, b) in case.buses().iter().enumerate() {
        let kind = if Some(b.id) == slack {
            3
        } else if gen_buses.contains(&b.id) {
            2
        } else {
            1
        };
        let _ = writeln!(
            out,
            "\t{}\t{kind}\t{}\t{}\t0\t{}\t1\t1\t0\t0\t1\t{}\t{};",
            b.id,
            to_mw(pd[i], base),
            to_mw(qd[i], base),
            to_mw(b.shunt_b, base),
            b.v_max,
            b.v_min
        );
    }
    out.push_str("];\n\n");
    out.push_str("%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n");
    out.push_str("mpc.gen = [\n");
    for g in case.generators() {
        let _ = writeln!(
            out,
            "\t{}\t0\t0\t{}\t{}\t1\t{base}\t1\t{}\t{};",
            g.bus,
            to_mw(g.q_max, base),
            to_mw(g.q_min, base),
            to_mw(g.p_max, base),
            to_mw(g.p_min, base)
        );
    }
    out.push_str("];\n\n");
    out.push_str("%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\n");
    out.push_str("mpc.branch = [\n");
    for br in case.branches() {
        let ratio = if br.tau == 1.0 && br.theta_ps == 0.0 { 0.0 } else { br.tau };
        let angle = invert(br.theta_ps, br.theta_ps.to_degrees(), f64::to_radians);
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t0\t0\t{ratio}\t{angle}\t1;",
            br.from_bus,
            br.to_bus,
            br.r,
            br.x,
            br.b_ch,
            to_mw(br.s_max, base)
        );
    }
    out.push_str("];\n");
    out
}


#[cfg(test)]
const IEEE_TAIL: &str = "
mpc.gencost = [
	2	0	0	3	0.02	2	0;
];
mpc.bus_name = {
	'Glen Lyn 132';
	'Claytor 132';
};
";
