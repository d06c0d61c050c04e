use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::lpcore::{solve_program_with, Basis, LpOptions, LpStatus};
use crate::model::{Allocation, MilpModel, DEFAULT_TOL};

/// Improvement below which a node cannot beat the incumbent.
const PRUNE_TOL: f64 = 1e-7;
const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BnbStatus {
    Optimal,
    TimeLimit,
    Infeasible,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BnbReport {
    pub incumbent: Allocation,
    pub incumbent_objective: f64,
    pub best_bound: f64,
    pub gap: f64,
    pub nodes_explored: usize,
    pub status: BnbStatus,
    /// `(parent bound, node bound)` of every solved non-root node, when
    /// requested through [`BnbOptions::record_bounds`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bound_log: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct BnbOptions {
    pub time_budget: Option<Duration>,
    pub node_limit: Option<usize>,
    /// Starting incumbent; used only if it satisfies the model.
    pub warm_start: Option<Allocation>,
    pub lp: LpOptions,
    pub record_bounds: bool,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            time_budget: None,
            node_limit: None,
            warm_start: None,
            lp: LpOptions::default(),
            record_bounds: false,
        }
    }
}

struct Node {
    /// Bound inherited from the parent LP.
    bound: f64,
    seq: usize,
    fixes: Vec<(usize, f64)>,
    basis: Option<Rc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap: higher bound first, then older node.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then(other.seq.cmp(&self.seq))
    }
}

/// Branch-and-bound with a time budget. The search draws no random numbers,
/// so the result is the same for every `seed`.
pub fn branch_and_bound(m: &MilpModel, time_budget: Duration, _seed: u64) -> BnbReport {
    branch_and_bound_with(
        m,
        &BnbOptions {
            time_budget: Some(time_budget),
            ..BnbOptions::default()
        },
    )
}

fn pick_branch(m: &MilpModel, x: &[f64]) -> Option<usize> {
    let (ys, xs, ths) = m.binary_columns();
    for group in [ys, xs, ths] {
        let mut best: Option<(f64, usize)> = None;
        for v in group {
            let frac = x[v] - x[v].floor();
            if frac <= INT_TOL || frac >= 1.0 - INT_TOL {
                continue;
            }
            let dist = (frac - 0.5).abs();
            if best.map_or(true, |(d, _)| dist < d) {
                best = Some((dist, v));
            }
        }
        if let Some((_, v)) = best {
            return Some(v);
        }
    }
    None
}

/// Rounds the binaries of an integral LP point, resets rates to their
/// minimal values and returns the allocation with its model objective.
fn integral_candidate(m: &MilpModel, x: &[f64]) -> Option<(Allocation, f64)> {
    let mut a = m.allocation_from_point(x);
    a.f = m.minimal_frequencies(&a.x);
    let point = m.point_from_allocation(&a);
    m.is_feasible_point(&point, DEFAULT_TOL)
        .then(|| (a, m.lp.evaluate(&point)))
}

/// Greedy rounding of a fractional point: services by descending largest
/// placement value, each on the first host (by descending value) where the
/// grown allocation still satisfies the model, taking the resource with the
/// largest assignment value in every scope cell.
fn round_point(m: &MilpModel, x: &[f64]) -> Option<(Allocation, f64)> {
    let by_value = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    let mut order: Vec<(usize, f64)> = (0..m.n_services)
        .map(|j| (j, (0..m.n_hosts).map(|h| x[m.y_vars[h][j]]).fold(0.0, f64::max)))
        .filter(|&(_, v)| v > INT_TOL)
        .collect();
    order.sort_by(by_value);
    let mut a = Allocation::empty(m.n_resources, m.n_hosts, m.n_services);
    let mut best = None;
    for (j, _) in order {
        let pick: Vec<usize> = m.cell_groups[j]
            .iter()
            .filter_map(|g| {
                g.iter()
                    .map(|&p| (m.x_vars[j][p].0, x[m.x_vars[j][p].1]))
                    .min_by(|a, b| by_value(a, b))
                    .map(|(i, _)| i)
            })
            .collect();
        if pick.len() < m.cell_groups[j].len() {
            continue;
        }
        let mut hosts: Vec<(usize, f64)> = (0..m.n_hosts).map(|h| (h, x[m.y_vars[h][j]])).collect();
        hosts.sort_by(by_value);
        for (h, v) in hosts {
            if v <= INT_TOL {
                break;
            }
            a.y[h][j] = true;
            a.x[j] = pick.iter().copied().collect();
            a.f = m.minimal_frequencies(&a.x);
            let point = m.point_from_allocation(&a);
            if m.is_feasible_point(&point, DEFAULT_TOL) {
                best = Some(m.lp.evaluate(&point));
                break;
            }
            a.y[h][j] = false;
            a.x[j].clear();
        }
    }
    a.f = m.minimal_frequencies(&a.x);
    best.map(|j| (a, j))
}

/// Best-bound branch-and-bound with depth-first plunging. Placement
/// binaries are branched first, then assignment binaries; linearization
/// binaries only if still fractional once those are integral.
pub fn branch_and_bound_with(m: &MilpModel, opts: &BnbOptions) -> BnbReport {
    let start = Instant::now();
    let deadline = opts.time_budget.map(|d| start + d);
    let out_of_time = || deadline.is_some_and(|d| Instant::now() >= d);
    let base_lo: Vec<f64> = m.lp.variables.iter().map(|v| v.lower).collect();
    let base_up: Vec<f64> = m.lp.variables.iter().map(|v| v.upper).collect();

    let empty = Allocation::empty(m.n_resources, m.n_hosts, m.n_services);
    let mut incumbent = (empty.clone(), f64::NEG_INFINITY);
    for cand in opts.warm_start.iter().chain(std::iter::once(&empty)) {
        let mut a = cand.clone();
        a.f = m.minimal_frequencies(&a.x);
        let point = m.point_from_allocation(&a);
        if m.is_feasible_point(&point, DEFAULT_TOL) {
            let j = m.lp.evaluate(&point);
            if j > incumbent.1 {
                incumbent = (a, j);
            }
        }
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let mut nodes = 0usize;
    let mut log = Vec::new();
    let mut open_bound = f64::NEG_INFINITY;
    let mut limited = false;
    let mut root_infeasible = false;
    let trivial: f64 = m
        .lp
        .objective
        .iter()
        .zip(&m.lp.variables)
        .map(|(&c, v)| if c > 0.0 { c * v.upper } else { c * v.lower })
        .sum();
    let mut next = Some(Node {
        bound: trivial,
        seq,
        fixes: Vec::new(),
        basis: None,
    });

    let mut lo = base_lo.clone();
    let mut up = base_up.clone();
    while let Some(node) = next.take().or_else(|| heap.pop()) {
        if !node.fixes.is_empty() && node.bound <= incumbent.1 + PRUNE_TOL {
            continue;
        }
        if out_of_time() || opts.node_limit.is_some_and(|n| nodes >= n) {
            open_bound = open_bound.max(node.bound);
            limited = true;
            break;
        }
        lo.copy_from_slice(&base_lo);
        up.copy_from_slice(&base_up);
        for &(v, val) in &node.fixes {
            lo[v] = val;
            up[v] = val;
        }
        let mut sol = solve_program_with(&m.lp, &lo, &up, &opts.lp, node.basis.as_deref(), deadline);
        if matches!(sol.status, LpStatus::IterationLimit | LpStatus::Unbounded) && node.basis.is_some() && !out_of_time() {
            sol = solve_program_with(&m.lp, &lo, &up, &opts.lp, None, deadline);
        }
        nodes += 1;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                if node.fixes.is_empty() {
                    root_infeasible = true;
                }
                continue;
            }
            LpStatus::IterationLimit | LpStatus::Unbounded => {
                // Unresolved node: keep its inherited bound open.
                open_bound = open_bound.max(node.bound);
                limited = true;
                if out_of_time() {
                    break;
                }
                continue;
            }
        }
        if opts.record_bounds && !node.fixes.is_empty() {
            log.push((node.bound, sol.objective));
        }
        let bound = sol.objective.min(node.bound);
        if bound <= incumbent.1 + PRUNE_TOL {
            continue;
        }
        if let Some((a, j)) = round_point(m, &sol.values) {
            if j > incumbent.1 + PRUNE_TOL {
                incumbent = (a, j);
                if bound <= incumbent.1 + PRUNE_TOL {
                    continue;
                }
            }
        }
        let Some(v) = pick_branch(m, &sol.values) else {
            if let Some((a, j)) = integral_candidate(m, &sol.values) {
                if j > incumbent.1 {
                    incumbent = (a, j);
                }
            }
            continue;
        };
        let basis = sol.basis.map(Rc::new);
        let up_first = sol.values[v] >= 0.5;
        let mut child = |val: f64| {
            seq += 1;
            let mut fixes = node.fixes.clone();
            fixes.push((v, val));
            Node {
                bound,
                seq,
                fixes,
                basis: basis.clone(),
            }
        };
        let (a, b) = if up_first { (child(1.0), child(0.0)) } else { (child(0.0), child(1.0)) };
        heap.push(b);
        next = Some(a);
    }

    if root_infeasible {
        return BnbReport {
            incumbent: empty,
            incumbent_objective: 0.0,
            best_bound: 0.0,
            gap: 0.0,
            nodes_explored: nodes,
            status: BnbStatus::Infeasible,
            bound_log: log,
        };
    }
    if limited {
        for n in heap.iter() {
            open_bound = open_bound.max(n.bound);
        }
    }
    let (inc, j) = incumbent;
    let j = if j.is_finite() { j } else { 0.0 };
    let best_bound = if limited { open_bound.max(j) } else { j };
    BnbReport {
        incumbent: inc,
        incumbent_objective: j,
        best_bound,
        gap: (best_bound - j) / j.abs().max(1.0),
        nodes_explored: nodes,
        status: if limited { BnbStatus::TimeLimit } else { BnbStatus::Optimal },
        bound_log: log,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::enumerate_optimum;
    use crate::model::{build_milp, check_feasibility};
    use crate::testutil::tiny_scenario;

    fn solve(seed: u64) -> (BnbReport, f64) {
        let (s, req) = tiny_scenario(seed);
        let m = build_milp(&s, &req);
        let rep = branch_and_bound_with(
            &m,
            &BnbOptions {
                record_bounds: true,
                ..BnbOptions::default()
            },
        );
        assert!(check_feasibility(&s, &req, &rep.incumbent, DEFAULT_TOL).is_empty());
        let (_, j) = enumerate_optimum(&s, &req).unwrap();
        (rep, j)
    }

    #[test]
    fn matches_enumeration_on_tiny_instances() {
        for seed in 0..12 {
            let (rep, j) = solve(seed);
            assert_eq!(rep.status, BnbStatus::Optimal, "seed {seed}");
            assert!((rep.incumbent_objective - j).abs() <= 1e-6, "seed {seed}: {} vs {j}", rep.incumbent_objective);
            assert_eq!(rep.gap, 0.0);
        }
    }

    #[test]
    fn child_bounds_never_exceed_parent() {
        for seed in 0..12 {
            let (rep, _) = solve(seed);
            for &(parent, child) in &rep.bound_log {
                assert!(child <= parent + 1e-7, "seed {seed}: {child} > {parent}");
            }
        }
    }

    #[test]
    fn zero_capacity_gives_empty_optimum() {
        let (mut s, req) = tiny_scenario(2);
        for h in &mut s.hosts {
            h.cpu_capacity = 0.0;
        }
        let rep = branch_and_bound(&build_milp(&s, &req), Duration::from_secs(10), 0);
        assert_eq!(rep.status, BnbStatus::Optimal);
        assert_eq!(rep.incumbent.placed_count(), 0);
        assert_eq!(rep.incumbent_objective, 0.0);
    }

    #[test]
    fn no_services_is_solved_at_the_root() {
        let (s, _) = tiny_scenario(0);
        let rep = branch_and_bound(&build_milp(&s, &[]), Duration::from_secs(10), 0);
        assert_eq!(rep.status, BnbStatus::Optimal);
        assert_eq!(rep.nodes_explored, 1);
    }

    #[test]
    fn node_limit_reports_an_open_bound() {
        let (s, req) = tiny_scenario(5);
        let m = build_milp(&s, &req);
        let rep = branch_and_bound_with(
            &m,
            &BnbOptions {
                node_limit: Some(0),
                ..BnbOptions::default()
            },
        );
        assert_eq!(rep.status, BnbStatus::TimeLimit);
        assert!(rep.best_bound >= rep.incumbent_objective - 1e-9);
        assert_eq!(rep.nodes_explored, 0);
    }
}
