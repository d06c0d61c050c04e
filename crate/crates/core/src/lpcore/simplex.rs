use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::eta::EtaFile;
use super::{Basis, LpOptions, LpStatus, VarStatus};

const NONE: usize = usize::MAX;

/// Computational form: `A x + s = 0` with bounded structurals `x` and one
/// logical `s` per row, bounds chosen so that `s = -a_r x` encodes the row
/// sense. The engine minimizes `cost`.
pub(crate) struct Simplex {
    m: usize,
    n: usize,
    col_start: Vec<usize>,
    row_idx: Vec<usize>,
    val: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    status: Vec<VarStatus>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    eta: EtaFile,
    updates: usize,
    opts: LpOptions,
    pub iterations: usize,
    deadline: Option<Instant>,
    // work arrays
    col: Vec<f64>,
    y: Vec<f64>,
    phase_cost: Vec<f64>,
    rejected: Vec<bool>,
}

pub(crate) struct Outcome {
    pub status: LpStatus,
    /// Values of every column, structurals first.
    pub x: Vec<f64>,
    pub basis: Basis,
}

impl Simplex {
    /// `cols[j]` lists `(row, coefficient)` of structural `j`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m: usize,
        cols: &[Vec<(usize, f64)>],
        lower: Vec<f64>,
        upper: Vec<f64>,
        cost: Vec<f64>,
        opts: LpOptions,
        deadline: Option<Instant>,
    ) -> Self {
        let n = cols.len();
        let mut col_start = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut val = Vec::new();
        col_start.push(0);
        for c in cols {
            for &(r, a) in c {
                if a != 0.0 {
                    row_idx.push(r);
                    val.push(a);
                }
            }
            col_start.push(row_idx.len());
        }
        let total = n + m;
        debug_assert_eq!(lower.len(), total);
        Simplex {
            m,
            n,
            col_start,
            row_idx,
            val,
            lower,
            upper,
            cost,
            x: vec![0.0; total],
            status: vec![VarStatus::AtLower; total],
            basis: vec![NONE; m],
            pos: vec![NONE; total],
            eta: EtaFile::new(),
            updates: 0,
            opts,
            iterations: 0,
            deadline,
            col: vec![0.0; m],
            y: vec![0.0; m],
            phase_cost: vec![0.0; total],
            rejected: vec![false; total],
        }
    }

    fn nonbasic_at(&self, j: usize, preferred: VarStatus) -> (VarStatus, f64) {
        let (l, u) = (self.lower[j], self.upper[j]);
        match preferred {
            VarStatus::AtUpper if u.is_finite() => (VarStatus::AtUpper, u),
            _ if l.is_finite() => (VarStatus::AtLower, l),
            _ if u.is_finite() => (VarStatus::AtUpper, u),
            _ => (VarStatus::Free, 0.0),
        }
    }

    /// Installs a starting basis: the given one when it has exactly one basic
    /// column per row, the all-logical basis otherwise.
    pub fn install(&mut self, warm: Option<&Basis>) {
        let total = self.n + self.m;
        let usable = warm.filter(|b| {
            b.status.len() == total && b.status.iter().filter(|s| **s == VarStatus::Basic).count() == self.m
        });
        let start: Vec<VarStatus> = match usable {
            Some(b) => b.status.clone(),
            None => (0..total)
                .map(|j| if j >= self.n { VarStatus::Basic } else { VarStatus::AtLower })
                .collect(),
        };
        let mut r = 0;
        for (j, st) in start.into_iter().enumerate() {
            if st == VarStatus::Basic {
                self.status[j] = VarStatus::Basic;
                self.basis[r] = j;
                self.pos[j] = r;
                r += 1;
            } else {
                let (s, v) = self.nonbasic_at(j, st);
                self.status[j] = s;
                self.x[j] = v;
                self.pos[j] = NONE;
            }
        }
        self.reinvert();
        self.compute_primal();
    }

    fn column_into(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if j < self.n {
            for t in self.col_start[j]..self.col_start[j + 1] {
                out[self.row_idx[t]] = self.val[t];
            }
        } else {
            out[j - self.n] = 1.0;
        }
    }

    /// Rebuilds the eta file from scratch. Logical columns sit on their own
    /// rows; structural columns are taken sparsest-first and pivot on the
    /// least-used row among entries within a factor 10 of the largest.
    /// Columns without an acceptable pivot leave the basis and the logicals of
    /// the rows they leave uncovered take their place.
    fn reinvert(&mut self) {
        let (m, n) = (self.m, self.n);
        self.eta.clear();
        self.updates = 0;
        let mut covered = vec![false; m];
        let mut new_basis = vec![NONE; m];
        let mut structs = Vec::new();
        for &v in &self.basis {
            if v == NONE {
                continue;
            }
            if v >= n {
                covered[v - n] = true;
                new_basis[v - n] = v;
            } else {
                structs.push(v);
            }
        }
        structs.sort_unstable();

        let mut count = vec![0usize; structs.len()];
        let mut row_count = vec![0usize; m];
        let mut row_cols: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (k, &j) in structs.iter().enumerate() {
            for t in self.col_start[j]..self.col_start[j + 1] {
                let r = self.row_idx[t];
                if !covered[r] {
                    count[k] += 1;
                    row_count[r] += 1;
                    row_cols[r].push(k);
                }
            }
        }
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
            count.iter().enumerate().map(|(k, &c)| Reverse((c, k))).collect();
        let mut done = vec![false; structs.len()];
        let mut dropped = Vec::new();
        let mut w = vec![0.0; m];
        while let Some(Reverse((c, k))) = heap.pop() {
            if done[k] || c != count[k] {
                continue;
            }
            done[k] = true;
            let j = structs[k];
            self.column_into(j, &mut w);
            self.eta.ftran(&mut w);
            let mut amax = 0.0f64;
            for r in 0..m {
                if !covered[r] {
                    amax = amax.max(w[r].abs());
                }
            }
            if amax < self.opts.pivot_tol {
                dropped.push(j);
                continue;
            }
            let mut best = NONE;
            for r in 0..m {
                if covered[r] || w[r].abs() < 0.1 * amax {
                    continue;
                }
                if best == NONE
                    || row_count[r] < row_count[best]
                    || (row_count[r] == row_count[best] && w[r].abs() > w[best].abs())
                {
                    best = r;
                }
            }
            self.eta.push(best, &w);
            covered[best] = true;
            new_basis[best] = j;
            for &k2 in &row_cols[best] {
                if !done[k2] {
                    count[k2] -= 1;
                    heap.push(Reverse((count[k2], k2)));
                }
            }
        }
        for j in dropped {
            let (s, v) = self.nonbasic_at(j, VarStatus::AtLower);
            self.status[j] = s;
            self.x[j] = v;
            self.pos[j] = NONE;
        }
        for r in 0..m {
            if !covered[r] {
                let v = n + r;
                new_basis[r] = v;
                self.status[v] = VarStatus::Basic;
            }
        }
        for (r, &v) in new_basis.iter().enumerate() {
            self.pos[v] = r;
        }
        self.basis = new_basis;
    }

    fn compute_primal(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            if self.status[j] == VarStatus::Basic || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            if j < self.n {
                for t in self.col_start[j]..self.col_start[j + 1] {
                    rhs[self.row_idx[t]] -= self.val[t] * xj;
                }
            } else {
                rhs[j - self.n] -= xj;
            }
        }
        self.eta.ftran(&mut rhs);
        for r in 0..self.m {
            self.x[self.basis[r]] = rhs[r];
        }
    }

    /// Sets phase-one costs; returns the total infeasibility.
    fn phase_one_costs(&mut self) -> f64 {
        let tol = self.opts.feas_tol;
        let mut total = 0.0;
        self.phase_cost.iter_mut().for_each(|c| *c = 0.0);
        for &v in &self.basis {
            let x = self.x[v];
            if x < self.lower[v] - tol {
                self.phase_cost[v] = -1.0;
                total += self.lower[v] - x;
            } else if x > self.upper[v] + tol {
                self.phase_cost[v] = 1.0;
                total += x - self.upper[v];
            }
        }
        total
    }

    fn reduced_cost(&self, j: usize, cost: &[f64]) -> f64 {
        if j < self.n {
            let mut d = cost[j];
            for t in self.col_start[j]..self.col_start[j + 1] {
                d -= self.val[t] * self.y[self.row_idx[t]];
            }
            d
        } else {
            cost[j] - self.y[j - self.n]
        }
    }

    /// Chooses the entering column and its direction (+1 increase, -1 decrease).
    fn price(&mut self, phase_one: bool, bland: bool) -> Option<(usize, f64)> {
        let cost = if phase_one { &self.phase_cost } else { &self.cost };
        for r in 0..self.m {
            self.y[r] = cost[self.basis[r]];
        }
        self.eta.btran(&mut self.y);
        let cost = if phase_one { &self.phase_cost } else { &self.cost };
        let tol = self.opts.opt_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.n + self.m {
            let st = self.status[j];
            if st == VarStatus::Basic || self.rejected[j] || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.reduced_cost(j, cost);
            let dir = match st {
                VarStatus::AtLower if d < -tol => 1.0,
                VarStatus::AtUpper if d > tol => -1.0,
                VarStatus::Free if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn effective_bounds(&self, v: usize, phase_one: bool) -> (f64, f64) {
        let (l, u) = (self.lower[v], self.upper[v]);
        if phase_one {
            let x = self.x[v];
            let tol = self.opts.feas_tol;
            if x < l - tol {
                return (f64::NEG_INFINITY, l);
            }
            if x > u + tol {
                return (u, f64::INFINITY);
            }
        }
        (l, u)
    }

    pub fn run(&mut self) -> Outcome {
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut clean_check = false;
        let status = loop {
            if self.iterations >= self.opts.max_iter {
                break LpStatus::IterationLimit;
            }
            if let Some(d) = self.deadline {
                if self.iterations % 32 == 0 && Instant::now() >= d {
                    break LpStatus::IterationLimit;
                }
            }
            if self.updates >= self.opts.refactor_every || self.eta.nnz() > 40 * (self.m + self.val.len()) {
                self.reinvert();
                self.compute_primal();
                self.rejected.iter_mut().for_each(|r| *r = false);
            }
            let infeas = self.phase_one_costs();
            let phase_one = infeas > 0.0;
            let Some((q, dir)) = self.price(phase_one, bland) else {
                if !clean_check {
                    // Confirm on a fresh factorization before concluding.
                    self.reinvert();
                    self.compute_primal();
                    self.rejected.iter_mut().for_each(|r| *r = false);
                    clean_check = true;
                    continue;
                }
                break if phase_one { LpStatus::Infeasible } else { LpStatus::Optimal };
            };
            let mut alpha = std::mem::take(&mut self.col);
            self.column_into(q, &mut alpha);
            self.eta.ftran(&mut alpha);

            let ftol = self.opts.feas_tol;
            let ptol = self.opts.pivot_tol;
            // Pass 1: largest step keeping every basic within its tolerance.
            let mut theta_max = f64::INFINITY;
            for r in 0..self.m {
                let a = alpha[r];
                if a.abs() <= ptol {
                    continue;
                }
                let v = self.basis[r];
                let rate = -dir * a;
                let (l, u) = self.effective_bounds(v, phase_one);
                let xv = self.x[v];
                let lim = if rate < 0.0 {
                    if l == f64::NEG_INFINITY {
                        continue;
                    }
                    (xv - l + ftol) / -rate
                } else {
                    if u == f64::INFINITY {
                        continue;
                    }
                    (u - xv + ftol) / rate
                };
                theta_max = theta_max.min(lim);
            }
            let range = self.upper[q] - self.lower[q];
            if range.is_finite() && range <= theta_max {
                // Bound flip: the entering column reaches its other bound first.
                for r in 0..self.m {
                    let v = self.basis[r];
                    self.x[v] -= dir * alpha[r] * range;
                }
                let (s, v) = if dir > 0.0 {
                    (VarStatus::AtUpper, self.upper[q])
                } else {
                    (VarStatus::AtLower, self.lower[q])
                };
                self.status[q] = s;
                self.x[q] = v;
                self.col = alpha;
                self.iterations += 1;
                degenerate = 0;
                bland = false;
                clean_check = false;
                continue;
            }
            if theta_max == f64::INFINITY {
                self.col = alpha;
                if phase_one {
                    self.rejected[q] = true;
                    continue;
                }
                break LpStatus::Unbounded;
            }
            // Pass 2: among the rows blocking within theta_max, the largest pivot.
            let mut leave = NONE;
            let mut leave_step = 0.0;
            let mut leave_value = 0.0;
            for r in 0..self.m {
                let a = alpha[r];
                if a.abs() <= ptol {
                    continue;
                }
                let v = self.basis[r];
                let rate = -dir * a;
                let (l, u) = self.effective_bounds(v, phase_one);
                let xv = self.x[v];
                let (step, target) = if rate < 0.0 {
                    if l == f64::NEG_INFINITY {
                        continue;
                    }
                    ((xv - l) / -rate, l)
                } else {
                    if u == f64::INFINITY {
                        continue;
                    }
                    ((u - xv) / rate, u)
                };
                if step > theta_max {
                    continue;
                }
                let better = leave == NONE
                    || if bland {
                        step < leave_step || (step == leave_step && v < self.basis[leave])
                    } else {
                        a.abs() > alpha[leave].abs()
                    };
                if better {
                    leave = r;
                    leave_step = step;
                    leave_value = target;
                }
            }
            if alpha[leave].abs() < 1e-7 && self.updates > 0 {
                // Unreliable pivot: refactor and price again.
                self.col = alpha;
                self.reinvert();
                self.compute_primal();
                continue;
            }
            let t = leave_step.max(0.0);
            for r in 0..self.m {
                let v = self.basis[r];
                self.x[v] -= dir * alpha[r] * t;
            }
            self.x[q] += dir * t;
            let out = self.basis[leave];
            // Every blocking value is a real bound of the leaving column, also
            // when a phase-one infeasibility is removed.
            self.x[out] = leave_value;
            self.status[out] = if leave_value == self.lower[out] {
                VarStatus::AtLower
            } else {
                VarStatus::AtUpper
            };
            self.pos[out] = NONE;
            self.status[q] = VarStatus::Basic;
            self.basis[leave] = q;
            self.pos[q] = leave;
            self.eta.push(leave, &alpha);
            self.updates += 1;
            self.col = alpha;
            self.iterations += 1;
            self.rejected.iter_mut().for_each(|r| *r = false);
            clean_check = false;

            if t <= 1e-12 {
                degenerate += 1;
                if degenerate >= self.opts.degenerate_switch {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
        };
        Outcome {
            status,
            x: self.x.clone(),
            basis: Basis {
                status: self.status.clone(),
            },
        }
    }
}
