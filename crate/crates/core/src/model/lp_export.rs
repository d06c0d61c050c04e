use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{LinearProgram, MilpModel, Sense, VarKind};
use crate::{Error, Result};

fn term(out: &mut String, first: bool, coef: f64, name: &str) {
    let sign = if coef < 0.0 { "-" } else { "+" };
    if first {
        if coef < 0.0 {
            out.push_str(" -");
        }
    } else {
        let _ = write!(out, " {sign}");
    }
    let _ = write!(out, " {} {name}", coef.abs());
}

/// Renders the program in CPLEX LP text format, one line per row.
pub fn export_lp(m: &MilpModel) -> String {
    render(&m.lp)
}

pub(crate) fn render(lp: &LinearProgram) -> String {
    let names: Vec<&str> = lp.variables.iter().map(|v| v.name.as_str()).collect();
    let mut out = String::new();
    out.push_str("\\ service allocation program\n");
    out.push_str("Maximize\n obj:");
    let mut first = true;
    for (v, &c) in lp.objective.iter().enumerate() {
        if c != 0.0 {
            term(&mut out, first, c, names[v]);
            first = false;
        }
    }
    if first {
        if let Some(n) = names.first() {
            let _ = write!(out, " 0 {n}");
        }
    }
    out.push('\n');

    out.push_str("Subject To\n");
    for c in &lp.constraints {
        let _ = write!(out, " {}:", c.name);
        let mut first = true;
        for &(v, a) in &c.coeffs {
            if a != 0.0 {
                term(&mut out, first, a, names[v]);
                first = false;
            }
        }
        if first {
            // An all-zero row still needs a column to be well formed.
            let _ = write!(out, " 0 {}", names.first().copied().unwrap_or("dummy"));
        }
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", c.rhs);
    }

    out.push_str("Bounds\n");
    for v in &lp.variables {
        if v.kind == VarKind::Continuous {
            let up = if v.upper.is_finite() { v.upper.to_string() } else { "+inf".into() };
            let lo = if v.lower.is_finite() { v.lower.to_string() } else { "-inf".into() };
            let _ = writeln!(out, " {lo} <= {} <= {up}", v.name);
        }
    }
    let bins: Vec<&str> = lp
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for chunk in bins.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

pub fn write_lp(m: &MilpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, export_lp(m)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_milp, Constraint, LinearProgram, Variable};
    use crate::testutil::tiny_scenario;

    #[test]
    fn empty_model_is_well_formed() {
        let text = render(&LinearProgram::default());
        let lines: Vec<&str> = text.lines().collect();
        let st = lines.iter().position(|l| *l == "Subject To").unwrap();
        assert_eq!(lines[st + 1], "Bounds");
        assert_eq!(*lines.last().unwrap(), "End");
    }

    #[test]
    fn one_line_per_constraint() {
        let (s, req) = tiny_scenario(3);
        let m = build_milp(&s, &req);
        let text = export_lp(&m);
        let lines: Vec<&str> = text.lines().collect();
        let st = lines.iter().position(|l| *l == "Subject To").unwrap();
        let bd = lines.iter().position(|l| *l == "Bounds").unwrap();
        assert_eq!(bd - st - 1, m.lp.n_rows());
        for (c, l) in m.lp.constraints.iter().zip(&lines[st + 1..bd]) {
            assert!(l.starts_with(&format!(" {}:", c.name)));
        }
    }

    #[test]
    fn hand_written_program() {
        let lp = LinearProgram {
            variables: vec![
                Variable { name: "a".into(), kind: VarKind::Continuous, lower: 0.0, upper: 10.0 },
                Variable { name: "b".into(), kind: VarKind::Binary, lower: 0.0, upper: 1.0 },
            ],
            constraints: vec![Constraint {
                name: "c0".into(),
                coeffs: vec![(0, 1.0), (1, -2.5)],
                sense: Sense::Ge,
                rhs: -1.0,
            }],
            objective: vec![-1.0, 3.0],
        };
        let text = render(&lp);
        assert!(text.contains(" obj: - 1 a + 3 b\n"));
        assert!(text.contains(" c0: 1 a - 2.5 b >= -1\n"));
        assert!(text.contains(" 0 <= a <= 10\n"));
        assert!(text.contains("Binaries\n b\n"));
    }
}
