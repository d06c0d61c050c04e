use serde::{Deserialize, Serialize};

use super::Allocation;
use crate::scenario::{Scenario, ServiceRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Binary,
    Continuous,
}

/// What a column of the program stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariableRole {
    X { i: usize, j: usize },
    Y { m: usize, j: usize },
    Theta { m: usize, i: usize, j: usize },
    F { i: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// A sparse row `sum(coeffs) sense rhs`. Column ids are unique within a row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A maximization problem over bounded columns.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Dense objective coefficients, one per variable.
    pub objective: Vec<f64>,
}

impl LinearProgram {
    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn n_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn n_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn add_variable(&mut self, name: String, kind: VarKind, lower: f64, upper: f64, obj: f64) -> usize {
        self.variables.push(Variable { name, kind, lower, upper });
        self.objective.push(obj);
        self.variables.len() - 1
    }

    pub fn add_constraint(&mut self, name: String, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        self.constraints.push(Constraint { name, coeffs, sense, rhs });
        self.constraints.len() - 1
    }

    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    /// Row activity, summed in coefficient order.
    pub fn activity(&self, row: usize, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &(v, a) in &self.constraints[row].coeffs {
            acc += a * values[v];
        }
        acc
    }

    /// Adds a row unless it has no coefficients and holds trivially.
    fn add_row(&mut self, name: String, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Option<usize> {
        let trivial = match sense {
            Sense::Le => rhs >= 0.0,
            Sense::Ge => rhs <= 0.0,
            Sense::Eq => rhs == 0.0,
        };
        if coeffs.is_empty() && trivial {
            return None;
        }
        Some(self.add_constraint(name, coeffs, sense, rhs))
    }

    /// Largest absolute bound or row violation of a point.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, var) in self.variables.iter().enumerate() {
            worst = worst.max(var.lower - values[v]).max(values[v] - var.upper);
        }
        for (r, c) in self.constraints.iter().enumerate() {
            let a = self.activity(r, values);
            let viol = match c.sense {
                Sense::Le => a - c.rhs,
                Sense::Ge => c.rhs - a,
                Sense::Eq => (a - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

/// The linearized allocation program together with its index maps.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub lp: LinearProgram,
    pub roles: Vec<VariableRole>,
    /// `y_vars[m][j]`
    pub y_vars: Vec<Vec<usize>>,
    /// `x_vars[j]`: eligible `(resource, column)` pairs, ascending resource.
    pub x_vars: Vec<Vec<(usize, usize)>>,
    /// `theta_vars[j][m][p]` pairs with `x_vars[j][p]`.
    pub theta_vars: Vec<Vec<Vec<usize>>>,
    pub f_vars: Vec<usize>,
    /// `(m1, m2, row)` of every host-pair bandwidth row.
    pub backhaul_rows: Vec<(usize, usize, usize)>,
    /// `cell_groups[j][c]`: positions in `x_vars[j]` of the resources in the
    /// `c`-th scope cell of service `j`, cells ascending.
    pub cell_groups: Vec<Vec<Vec<usize>>>,
    /// Execution frequency of each service.
    pub frequencies: Vec<f64>,
    pub n_resources: usize,
    pub n_hosts: usize,
    pub n_services: usize,
}

impl MilpModel {
    pub fn x_var(&self, i: usize, j: usize) -> Option<usize> {
        let xs = &self.x_vars[j];
        xs.binary_search_by_key(&i, |p| p.0).ok().map(|p| xs[p].1)
    }

    pub fn theta_var(&self, m: usize, i: usize, j: usize) -> Option<usize> {
        let xs = &self.x_vars[j];
        xs.binary_search_by_key(&i, |p| p.0).ok().map(|p| self.theta_vars[j][m][p])
    }

    /// Column values of an allocation with `theta = x * y`.
    pub fn point_from_allocation(&self, a: &Allocation) -> Vec<f64> {
        let mut v = vec![0.0; self.lp.n_vars()];
        for m in 0..self.n_hosts {
            for j in 0..self.n_services {
                if a.y[m][j] {
                    v[self.y_vars[m][j]] = 1.0;
                }
            }
        }
        for j in 0..self.n_services {
            for (p, &(i, col)) in self.x_vars[j].iter().enumerate() {
                if a.x[j].contains(&i) {
                    v[col] = 1.0;
                    for m in 0..self.n_hosts {
                        if a.y[m][j] {
                            v[self.theta_vars[j][m][p]] = 1.0;
                        }
                    }
                }
            }
        }
        for (i, &col) in self.f_vars.iter().enumerate() {
            v[col] = a.f[i];
        }
        v
    }

    /// Reads an allocation off a point, treating values above 0.5 as set.
    pub fn allocation_from_point(&self, values: &[f64]) -> Allocation {
        let mut a = Allocation::empty(self.n_resources, self.n_hosts, self.n_services);
        for m in 0..self.n_hosts {
            for j in 0..self.n_services {
                a.y[m][j] = values[self.y_vars[m][j]] > 0.5;
            }
        }
        for j in 0..self.n_services {
            for &(i, col) in &self.x_vars[j] {
                if values[col] > 0.5 {
                    a.x[j].insert(i);
                }
            }
        }
        for (i, &col) in self.f_vars.iter().enumerate() {
            a.f[i] = values[col].max(0.0);
        }
        a
    }

    /// Smallest sampling rates serving every assigned service.
    pub fn minimal_frequencies(&self, x: &[std::collections::BTreeSet<usize>]) -> Vec<f64> {
        let mut f = vec![0.0f64; self.n_resources];
        for (j, xs) in x.iter().enumerate() {
            for &i in xs {
                f[i] = f[i].max(self.frequencies[j]);
            }
        }
        f
    }

    /// Whether every bound and row holds within `tol`, relative to
    /// `max(1, |rhs|)` for rows.
    pub fn is_feasible_point(&self, values: &[f64], tol: f64) -> bool {
        let lp = &self.lp;
        let bounds_ok = lp.variables.iter().zip(values).all(|(v, &x)| {
            x >= v.lower - tol * v.lower.abs().max(1.0) && x <= v.upper + tol * v.upper.abs().max(1.0)
        });
        bounds_ok
            && lp.constraints.iter().enumerate().all(|(r, c)| {
                let a = lp.activity(r, values);
                let slack = tol * c.rhs.abs().max(1.0);
                match c.sense {
                    Sense::Le => a <= c.rhs + slack,
                    Sense::Ge => a >= c.rhs - slack,
                    Sense::Eq => (a - c.rhs).abs() <= slack,
                }
            })
    }

    /// Columns that are integral in the unrelaxed model, grouped as
    /// placements, assignments and linearization columns.
    pub fn binary_columns(&self) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut y = Vec::new();
        let mut x = Vec::new();
        let mut th = Vec::new();
        for (v, r) in self.roles.iter().enumerate() {
            match r {
                VariableRole::Y { .. } => y.push(v),
                VariableRole::X { .. } => x.push(v),
                VariableRole::Theta { .. } => th.push(v),
                VariableRole::F { .. } => {}
            }
        }
        (y, x, th)
    }
}

/// Builds the linearized program: placement, assignment and linearization
/// binaries, sampling rates, and the capacity, coverage, frequency and
/// linearization rows. The objective maximizes `J_r - gamma * J_edge` with the
/// flow terms expanded through `f` and `theta`.
pub fn build_milp(s: &Scenario, req: &[ServiceRequest]) -> MilpModel {
    let n_hosts = s.n_hosts();
    let n_res = s.n_resources();
    let n_svc = req.len();
    let c = &s.cost_model;
    let g = c.gamma;

    let mut lp = LinearProgram::default();
    let mut roles = Vec::new();

    let mut y_vars = vec![vec![0; n_svc]; n_hosts];
    for (m, row) in y_vars.iter_mut().enumerate() {
        for (j, r) in req.iter().enumerate() {
            let obj = 1.0 - g * (c.c_cpu * r.cpu_demand + c.c_mem * s.storage_footprint(r));
            row[j] = lp.add_variable(format!("y_{m}_{j}"), VarKind::Binary, 0.0, 1.0, obj);
            roles.push(VariableRole::Y { m, j });
        }
    }

    let mut x_vars = Vec::with_capacity(n_svc);
    let mut f_upper = vec![0.0f64; n_res];
    for (j, r) in req.iter().enumerate() {
        let mut elig: Vec<usize> = r
            .scope
            .iter()
            .flat_map(|&k| s.resources_in(r.data_type, k).iter().copied())
            .collect();
        elig.sort_unstable();
        let mut xs = Vec::with_capacity(elig.len());
        for i in elig {
            f_upper[i] = f_upper[i].max(r.frequency);
            let v = lp.add_variable(format!("x_{i}_{j}"), VarKind::Binary, 0.0, 1.0, 0.0);
            roles.push(VariableRole::X { i, j });
            xs.push((i, v));
        }
        x_vars.push(xs);
    }

    let mut theta_vars = Vec::with_capacity(n_svc);
    for (j, r) in req.iter().enumerate() {
        let mut per_host = Vec::with_capacity(n_hosts);
        for m in 0..n_hosts {
            let mut cols = Vec::with_capacity(x_vars[j].len());
            for &(i, _) in &x_vars[j] {
                let obj = if s.host_of(i) != m {
                    -g * c.c_bw2 * (r.frequency * s.payload_of(i))
                } else {
                    0.0
                };
                cols.push(lp.add_variable(format!("th_{m}_{i}_{j}"), VarKind::Binary, 0.0, 1.0, obj));
                roles.push(VariableRole::Theta { m, i, j });
            }
            per_host.push(cols);
        }
        theta_vars.push(per_host);
    }

    let mut f_vars = Vec::with_capacity(n_res);
    for i in 0..n_res {
        let obj = -g * (c.c_bw1 + c.c_bw2) * s.payload_of(i);
        f_vars.push(lp.add_variable(format!("f_{i}"), VarKind::Continuous, 0.0, f_upper[i], obj));
        roles.push(VariableRole::F { i });
    }

    // Host CPU and storage.
    for (m, host) in s.hosts.iter().enumerate() {
        let row = req.iter().enumerate().map(|(j, r)| (y_vars[m][j], r.cpu_demand)).collect();
        lp.add_row(format!("cpu_{m}"), row, Sense::Le, host.cpu_capacity);
        let row = req
            .iter()
            .enumerate()
            .map(|(j, r)| (y_vars[m][j], s.storage_footprint(r)))
            .collect();
        lp.add_row(format!("sto_{m}"), row, Sense::Le, host.storage_capacity);
    }
    // At most one host per service.
    for j in 0..n_svc {
        let row = (0..n_hosts).map(|m| (y_vars[m][j], 1.0)).collect();
        lp.add_row(format!("one_{j}"), row, Sense::Le, 1.0);
    }
    // One stream per scope cell of a placed service.
    let mut cell_groups = vec![Vec::new(); n_svc];
    for (j, r) in req.iter().enumerate() {
        let mut scope = r.scope.clone();
        scope.sort_unstable();
        for k in scope {
            cell_groups[j].push(
                s.resources_in(r.data_type, k)
                    .iter()
                    .map(|&i| x_vars[j].binary_search_by_key(&i, |p| p.0).unwrap())
                    .collect(),
            );
            let mut row: Vec<(usize, f64)> = s
                .resources_in(r.data_type, k)
                .iter()
                .map(|&i| (x_vars[j][x_vars[j].binary_search_by_key(&i, |p| p.0).unwrap()].1, 1.0))
                .collect();
            row.extend((0..n_hosts).map(|m| (y_vars[m][j], -1.0)));
            lp.add_row(format!("cov_{j}_{k}"), row, Sense::Eq, 0.0);
        }
    }
    // Sampling rates.
    let mut feeds: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_res];
    for (j, r) in req.iter().enumerate() {
        for &(i, v) in &x_vars[j] {
            lp.add_row(
                format!("flo_{i}_{j}"),
                vec![(f_vars[i], 1.0), (v, -r.frequency)],
                Sense::Ge,
                0.0,
            );
            feeds[i].push((v, -r.frequency));
        }
    }
    for (i, fed) in feeds.into_iter().enumerate() {
        if fed.is_empty() {
            continue;
        }
        let mut row = vec![(f_vars[i], 1.0)];
        row.extend(fed);
        lp.add_row(format!("fhi_{i}"), row, Sense::Le, 0.0);
    }
    // Wireless uplink and fronthaul.
    for (h, b) in s.base_stations.iter().enumerate() {
        let row = s
            .resources_of_sbs(h)
            .iter()
            .map(|&i| (f_vars[i], s.payload_of(i)))
            .collect();
        lp.add_row(format!("up_{h}"), row, Sense::Le, b.uplink_capacity);
    }
    for (m, host) in s.hosts.iter().enumerate() {
        let mut sbs = host.served_sbs.clone();
        sbs.sort_unstable();
        let row = sbs
            .iter()
            .flat_map(|&h| s.resources_of_sbs(h).iter())
            .map(|&i| (f_vars[i], s.payload_of(i)))
            .collect();
        lp.add_row(format!("fh_{m}"), row, Sense::Le, host.fronthaul_capacity);
    }
    // Linearization of theta = x * y.
    for j in 0..n_svc {
        for m in 0..n_hosts {
            for (p, &(i, xv)) in x_vars[j].iter().enumerate() {
                let th = theta_vars[j][m][p];
                let yv = y_vars[m][j];
                lp.add_row(format!("tx_{m}_{i}_{j}"), vec![(th, 1.0), (xv, -1.0)], Sense::Le, 0.0);
                lp.add_row(format!("ty_{m}_{i}_{j}"), vec![(th, 1.0), (yv, -1.0)], Sense::Le, 0.0);
                lp.add_row(
                    format!("txy_{m}_{i}_{j}"),
                    vec![(th, 1.0), (xv, -1.0), (yv, -1.0)],
                    Sense::Ge,
                    -1.0,
                );
            }
        }
    }
    // Host-to-host bandwidth, summed in the same order as the flow ledger.
    let mut backhaul_rows = Vec::new();
    for m1 in 0..n_hosts {
        for m2 in 0..n_hosts {
            if m1 == m2 {
                continue;
            }
            let mut row = Vec::new();
            for (j, r) in req.iter().enumerate() {
                for (p, &(i, _)) in x_vars[j].iter().enumerate() {
                    if s.host_of(i) == m1 {
                        row.push((theta_vars[j][m2][p], r.frequency * s.payload_of(i)));
                    }
                }
            }
            if let Some(id) = lp.add_row(format!("bh_{m1}_{m2}"), row, Sense::Le, s.backhaul(m1, m2)) {
                backhaul_rows.push((m1, m2, id));
            }
        }
    }

    MilpModel {
        lp,
        roles,
        y_vars,
        x_vars,
        theta_vars,
        f_vars,
        backhaul_rows,
        cell_groups,
        frequencies: req.iter().map(|r| r.frequency).collect(),
        n_resources: n_res,
        n_hosts,
        n_services: n_svc,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_feasibility, compute_flows, objective, DEFAULT_TOL};
    use crate::testutil::{random_allocation, tiny_scenario};

    #[test]
    fn no_services_leaves_only_rate_columns_fixed_at_zero() {
        let (s, _) = tiny_scenario(0);
        let m = build_milp(&s, &[]);
        assert_eq!(m.lp.n_vars(), s.n_resources());
        assert!(m.lp.variables.iter().all(|v| v.upper == 0.0 && v.kind == VarKind::Continuous));
    }

    #[test]
    fn theta_columns_follow_eligibility() {
        let (s, req) = tiny_scenario(9);
        let m = build_milp(&s, &req);
        for (j, r) in req.iter().enumerate() {
            for i in 0..s.n_resources() {
                assert_eq!(m.x_var(i, j).is_some(), s.eligible(i, r));
                for h in 0..s.n_hosts() {
                    assert_eq!(m.theta_var(h, i, j).is_some(), s.eligible(i, r));
                }
            }
        }
        for c in &m.lp.constraints {
            assert!(c.coeffs.iter().all(|&(v, _)| v < m.lp.n_vars()));
        }
    }

    #[test]
    fn point_evaluation_matches_objective_and_checker() {
        for seed in 0..60 {
            let (s, req) = tiny_scenario(seed);
            let m = build_milp(&s, &req);
            let a = random_allocation(&s, &req, seed * 3 + 1);
            let p = m.point_from_allocation(&a);
            let o = objective(&s, &req, &a, &compute_flows(&s, &req, &a));
            assert!((m.lp.evaluate(&p) - o.j).abs() < 1e-9, "seed {seed}");
            let ok = check_feasibility(&s, &req, &a, DEFAULT_TOL).is_empty();
            // Same absolute scale on both sides: bounds are O(1e9), so compare
            // against the relative tolerance used by the checker.
            let ok_lp = m.lp.constraints.iter().enumerate().all(|(r, c)| {
                let act = m.lp.activity(r, &p);
                let slack = DEFAULT_TOL * c.rhs.abs().max(1.0);
                match c.sense {
                    Sense::Le => act <= c.rhs + slack,
                    Sense::Ge => act >= c.rhs - slack,
                    Sense::Eq => (act - c.rhs).abs() <= slack,
                }
            }) && m.lp.variables.iter().zip(&p).all(|(v, x)| *x >= v.lower && *x <= v.upper + 1e-12);
            assert_eq!(ok, ok_lp, "seed {seed}");
            assert_eq!(m.allocation_from_point(&p), a);
        }
    }

    #[test]
    fn backhaul_rows_equal_ledger_bitwise() {
        for seed in 0..40 {
            let (s, req) = tiny_scenario(seed);
            let m = build_milp(&s, &req);
            let a = random_allocation(&s, &req, seed);
            let p = m.point_from_allocation(&a);
            let led = compute_flows(&s, &req, &a);
            for &(m1, m2, row) in &m.backhaul_rows {
                assert_eq!(m.lp.activity(row, &p), led.backhaul[m1][m2]);
            }
        }
    }
}
