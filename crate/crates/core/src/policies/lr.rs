use std::time::Instant;

use rand::seq::SliceRandom;

use super::state::{Delta, HostScope, PolicyState};
use super::{classify_reject, finish, PolicyReport};
use crate::lpcore::LpSolution;
use crate::model::{build_milp, check_feasibility, extract_frequencies, MilpModel, DEFAULT_TOL};
use crate::scenario::{Scenario, ServiceRequest};

const INT_TOL: f64 = 1e-6;

/// Fractional placement and assignment values of a relaxed solution.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedValues {
    /// `y[m][j]`
    pub y: Vec<Vec<f64>>,
    /// `x[j][i]`, zero for ineligible resources.
    pub x: Vec<Vec<f64>>,
}

impl RelaxedValues {
    pub fn from_solution(m: &MilpModel, sol: &LpSolution) -> Self {
        let v = &sol.values;
        let y = m
            .y_vars
            .iter()
            .map(|row| row.iter().map(|&c| v[c]).collect())
            .collect();
        let x = m
            .x_vars
            .iter()
            .map(|xs| {
                let mut row = vec![0.0; m.n_resources];
                for &(i, c) in xs {
                    row[i] = v[c];
                }
                row
            })
            .collect();
        RelaxedValues { y, x }
    }
}

fn descending(a: &(usize, f64), b: &(usize, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Tries to cover every scope cell of service `j`, placed on host `m`, with
/// resources of relaxed value above `mu`, best value first, visiting cells
/// in random order. A resource is taken when its raised sampling rate and
/// the stream towards `m` respect the uplink, fronthaul and backhaul
/// capacities. On success the streams are committed together with the
/// placement of `j` on `m`; on failure the state is left untouched.
pub fn allocate_sensors(state: &mut PolicyState, m: usize, j: usize, relaxed: &RelaxedValues, mu: f64) -> bool {
    let (s, req) = (state.s, state.req);
    let r = &req[j];
    let mut cells = r.scope.clone();
    cells.sort_unstable();
    cells.shuffle(&mut state.rng);

    let mut d = Delta::default();
    let mut bh = std::collections::BTreeMap::<usize, f64>::new();
    let mut tests = 0;
    let mut covered = true;
    for k in cells {
        let mut cands: Vec<(usize, f64)> = s
            .resources_in(r.data_type, k)
            .iter()
            .map(|&i| (i, relaxed.x[j][i]))
            .filter(|&(_, v)| v > mu)
            .collect();
        cands.sort_by(descending);
        let mut ok = false;
        for (i, _) in cands {
            tests += 1;
            let m1 = s.host_of(i);
            let stream = r.frequency * s.payload_of(i);
            if m1 != m {
                let used = state.ledger.backhaul[m1][m] + bh.get(&m1).copied().unwrap_or(0.0);
                if !super::state::fits(used, stream, s.backhaul(m1, m)) {
                    continue;
                }
            }
            if state.try_stream(&mut d, i, j, true) {
                if m1 != m {
                    *bh.entry(m1).or_insert(0.0) += stream;
                }
                ok = true;
                break;
            }
        }
        if !ok {
            covered = false;
            break;
        }
    }
    state.ops.note_resource_tests(tests);
    if covered {
        state.commit(m, j, &d);
    }
    covered
}

/// Rounds a relaxed solution into an allocation. An integral relaxation is
/// returned as is. Otherwise services are taken by descending largest
/// placement value; each goes to the first host, by descending value above
/// `mu`, with compute and storage room, and is kept only if its scope can be
/// covered there.
pub fn lr_round(s: &Scenario, req: &[ServiceRequest], relaxed: &LpSolution, mu: f64, seed: u64) -> PolicyReport {
    let start = Instant::now();
    let model = build_milp(s, req);
    let (ys, xs, ths) = model.binary_columns();
    let integral = ys
        .iter()
        .chain(&xs)
        .chain(&ths)
        .all(|&c| relaxed.values[c].min(1.0 - relaxed.values[c]).abs() <= INT_TOL);
    if integral {
        let mut a = model.allocation_from_point(&relaxed.values);
        a.f = extract_frequencies(req, &a.x, s.n_resources());
        if check_feasibility(s, req, &a, DEFAULT_TOL).is_empty() {
            let state = PolicyState::from_allocation(s, req, a, HostScope::All);
            return finish("lr", state, vec![None; req.len()], start);
        }
    }

    let rv = RelaxedValues::from_solution(&model, relaxed);
    let mut state = PolicyState::new(s, req, seed, HostScope::All);
    let mut causes = vec![None; req.len()];
    let best = |j: usize| (0..s.n_hosts()).map(|m| rv.y[m][j]).fold(f64::NEG_INFINITY, f64::max);
    let mut order: Vec<(usize, f64)> = (0..req.len()).map(|j| (j, best(j))).collect();
    order.sort_by(descending);

    for (j, _) in order {
        let mut hosts: Vec<(usize, f64)> = (0..s.n_hosts())
            .map(|m| (m, rv.y[m][j]))
            .filter(|&(_, v)| v > mu)
            .collect();
        hosts.sort_by(descending);
        let mut tests = 0;
        let mut target = None;
        for (m, _) in hosts {
            tests += 1;
            if state.edge_fits(m, j) {
                target = Some(m);
                break;
            }
        }
        state.ops.note_host_tests(tests);
        let placed = target.is_some_and(|m| allocate_sensors(&mut state, m, j, &rv, mu));
        if !placed {
            causes[j] = Some(classify_reject(&state, j).expect("service is not placed"));
        }
        state.tested[j] = true;
    }
    finish("lr", state, causes, start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::{relax, solve_program, LpOptions};
    use crate::model::compute_flows;
    use crate::policies::Outcome;
    use crate::testutil::tiny_scenario;

    fn relaxed(s: &Scenario, req: &[ServiceRequest]) -> LpSolution {
        solve_program(&relax(&build_milp(s, req)).lp, &LpOptions::default())
    }

    #[test]
    fn allocations_are_feasible() {
        for seed in 0..40 {
            let (s, req) = tiny_scenario(seed);
            let rep = lr_round(&s, &req, &relaxed(&s, &req), 0.01, seed);
            assert!(check_feasibility(&s, &req, &rep.allocation, DEFAULT_TOL).is_empty(), "seed {seed}");
            assert_eq!(rep.deployed() as f64, rep.objective.j_r);
        }
    }

    #[test]
    fn full_cut_off_rejects_everything() {
        let (s, req) = tiny_scenario(7);
        let mut sol = relaxed(&s, &req);
        // Force the rounding path with a fractional placement.
        let m = build_milp(&s, &req);
        sol.values[m.y_vars[0][0]] = 0.5;
        let rep = lr_round(&s, &req, &sol, 1.0, 0);
        assert_eq!(rep.deployed(), 0);
        assert!(rep.outcomes.iter().all(|o| matches!(o, Outcome::Rejected(_))));
    }

    #[test]
    fn integral_relaxation_is_returned_directly() {
        let (s, req) = tiny_scenario(3);
        let m = build_milp(&s, &req);
        let (a, _) = crate::exact::enumerate_optimum(&s, &req).unwrap();
        let sol = LpSolution {
            status: crate::lpcore::LpStatus::Optimal,
            values: m.point_from_allocation(&a),
            objective: 0.0,
            iterations: 0,
            basis: None,
        };
        let rep = lr_round(&s, &req, &sol, 0.01, 0);
        assert_eq!(rep.allocation, a);
    }

    #[test]
    fn uncoverable_cell_leaves_state_unchanged() {
        let (s, mut req) = tiny_scenario(1);
        let empty_cell = (0..s.n_cells()).find(|&k| s.resources_in(req[0].data_type, k).is_empty());
        let Some(k) = empty_cell else { return };
        req[0].scope = vec![k];
        let m = build_milp(&s, &req);
        let rv = RelaxedValues::from_solution(&m, &relaxed(&s, &req));
        let mut st = PolicyState::new(&s, &req, 0, HostScope::All);
        let before = st.ledger.clone();
        st.alloc.y[0][0] = true;
        assert!(!allocate_sensors(&mut st, 0, 0, &rv, 0.0));
        assert!(st.alloc.x[0].is_empty());
        assert_eq!(st.ledger, before);
        st.alloc.y[0][0] = false;
        assert_eq!(st.ledger, compute_flows(&s, &req, &st.alloc));
    }

    #[test]
    fn deterministic_per_seed() {
        let (s, req) = tiny_scenario(11);
        let sol = relaxed(&s, &req);
        let mut a = lr_round(&s, &req, &sol, 0.01, 5);
        let mut b = lr_round(&s, &req, &sol, 0.01, 5);
        a.runtime_s = 0.0;
        b.runtime_s = 0.0;
        assert_eq!(a, b);
    }
}
