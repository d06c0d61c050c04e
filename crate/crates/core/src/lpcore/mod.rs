//! Linear relaxation and a bounded-variable primal simplex.
//!
//! The solver is a revised simplex over sparse columns with a product-form
//! basis inverse that is rebuilt every 100 updates. Phase one minimizes the
//! sum of bound infeasibilities of the basic columns; phase two optimizes the
//! objective. Pricing is Dantzig's rule, falling back to Bland's rule after a
//! run of degenerate pivots. The ratio test is Harris' two-pass variant with
//! bound flips. Rows and columns are equilibrated by powers of two, so
//! scaling never perturbs the data.

mod eta;
mod scaling;
mod simplex;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::model::{LinearProgram, MilpModel, Sense, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration cap or deadline reached.
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

/// Column statuses of a final basis, structurals then one logical per row.
/// Pass it back to [`solve_program_with`] to warm-start a related problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub status: Vec<VarStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    /// Primal feasibility tolerance, on the scaled problem.
    pub feas_tol: f64,
    /// Reduced-cost tolerance, on the scaled problem.
    pub opt_tol: f64,
    /// Smallest pivot magnitude accepted.
    pub pivot_tol: f64,
    pub max_iter: usize,
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_switch: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            feas_tol: 1e-7,
            opt_tol: 1e-9,
            pivot_tol: 1e-9,
            max_iter: 200_000,
            refactor_every: 100,
            degenerate_switch: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// One value per model variable; meaningful when `Optimal`.
    pub values: Vec<f64>,
    /// Maximization objective at `values`.
    pub objective: f64,
    pub iterations: usize,
    #[serde(skip)]
    pub basis: Option<Basis>,
}

/// The same model with every binary declared continuous on `[0, 1]`.
pub fn relax(m: &MilpModel) -> MilpModel {
    let mut out = m.clone();
    for v in &mut out.lp.variables {
        if v.kind == VarKind::Binary {
            v.kind = VarKind::Continuous;
            v.lower = v.lower.max(0.0);
            v.upper = v.upper.min(1.0);
        }
    }
    out
}

/// Solves the linear program of `m` with every column treated as continuous
/// within its bounds. `tol` is the primal feasibility tolerance.
pub fn solve_lp(m: &MilpModel, tol: f64, max_iter: usize) -> LpSolution {
    let opts = LpOptions {
        feas_tol: tol,
        max_iter,
        ..LpOptions::default()
    };
    solve_program(&m.lp, &opts)
}

pub fn solve_program(lp: &LinearProgram, opts: &LpOptions) -> LpSolution {
    let lower: Vec<f64> = lp.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = lp.variables.iter().map(|v| v.upper).collect();
    solve_program_with(lp, &lower, &upper, opts, None, None)
}

/// Solves `lp` with the column bounds replaced by `lower`/`upper`, optionally
/// from a previous basis and with a wall-clock deadline.
pub fn solve_program_with(
    lp: &LinearProgram,
    lower: &[f64],
    upper: &[f64],
    opts: &LpOptions,
    warm: Option<&Basis>,
    deadline: Option<Instant>,
) -> LpSolution {
    let n = lp.n_vars();
    let m = lp.n_rows();
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return LpSolution {
            status: LpStatus::Infeasible,
            values: vec![0.0; n],
            objective: 0.0,
            iterations: 0,
            basis: None,
        };
    }
    let sc = scaling::Scaling::compute(lp);

    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (r, c) in lp.constraints.iter().enumerate() {
        for &(j, a) in &c.coeffs {
            cols[j].push((r, a * sc.row[r] * sc.col[j]));
        }
    }
    let mut lo = Vec::with_capacity(n + m);
    let mut up = Vec::with_capacity(n + m);
    let mut cost = Vec::with_capacity(n + m);
    for j in 0..n {
        lo.push(lower[j] / sc.col[j]);
        up.push(upper[j] / sc.col[j]);
        cost.push(-lp.objective[j] * sc.col[j] * sc.obj);
    }
    for (r, c) in lp.constraints.iter().enumerate() {
        let b = c.rhs * sc.row[r];
        let (l, u) = match c.sense {
            Sense::Le => (-b, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, -b),
            Sense::Eq => (-b, -b),
        };
        lo.push(l);
        up.push(u);
        cost.push(0.0);
    }

    let mut sx = simplex::Simplex::new(m, &cols, lo, up, cost, *opts, deadline);
    sx.install(warm);
    let out = sx.run();
    let values: Vec<f64> = (0..n)
        .map(|j| {
            let v = out.x[j] * sc.col[j];
            // Snap to the original bounds to hide scaling round-off.
            let near = |b: f64| b.is_finite() && (v - b).abs() <= 1e-12 * b.abs().max(1.0);
            if near(lower[j]) {
                lower[j]
            } else if near(upper[j]) {
                upper[j]
            } else {
                v
            }
        })
        .collect();
    LpSolution {
        status: out.status,
        objective: lp.evaluate(&values),
        values,
        iterations: sx.iterations,
        basis: Some(out.basis),
    }
}
