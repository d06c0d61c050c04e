use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{compute_flows, Allocation};
use crate::scenario::{Scenario, ServiceRequest};

/// Default tolerance of [`check_feasibility`], canonical units.
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationKind {
    Cpu,
    Storage,
    SingleHost,
    Coverage,
    FreqLower,
    FreqUpper,
    Uplink,
    Fronthaul,
    Backhaul,
}

/// One violated constraint.
///
/// `subjects` lists the ids the constraint is indexed by: a host for CPU and
/// storage, a service for the single-host rule, `(service, cell)` or
/// `(service, resource)` for coverage, `(resource, service)` and `(resource)`
/// for the frequency rows, a base station, a host, and `(from, to)` for the
/// bandwidth rows. For `FreqLower` the inequality reads `lhs <= rhs`, with
/// `lhs` the required rate and `rhs` the assigned one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subjects: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

fn exceeds(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs > rhs + tol * rhs.abs().max(1.0)
}

/// Lists every violated constraint of the model. The tolerance is relative to
/// the bound magnitude (absolute below 1).
pub fn check_feasibility(s: &Scenario, req: &[ServiceRequest], a: &Allocation, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    let n_hosts = s.n_hosts();
    let led = compute_flows(s, req, a);
    let mut push = |kind, subjects: Vec<usize>, lhs, rhs| out.push(Violation { kind, subjects, lhs, rhs });

    for (m, host) in s.hosts.iter().enumerate() {
        if exceeds(led.cpu[m], host.cpu_capacity, tol) {
            push(ViolationKind::Cpu, vec![m], led.cpu[m], host.cpu_capacity);
        }
        if exceeds(led.storage[m], host.storage_capacity, tol) {
            push(ViolationKind::Storage, vec![m], led.storage[m], host.storage_capacity);
        }
    }

    for (j, r) in req.iter().enumerate() {
        let placed = (0..n_hosts).filter(|&m| a.y[m][j]).count();
        if placed > 1 {
            push(ViolationKind::SingleHost, vec![j], placed as f64, 1.0);
        }
        for &i in &a.x[j] {
            if i >= s.n_resources() || !s.eligible(i, r) {
                push(ViolationKind::Coverage, vec![j, i], 1.0, 0.0);
            }
        }
        for &k in &r.scope {
            let covered = s
                .resources_in(r.data_type, k)
                .iter()
                .filter(|i| a.x[j].contains(i))
                .count();
            if covered != placed {
                push(ViolationKind::Coverage, vec![j, k], covered as f64, placed as f64);
            }
        }
    }

    let mut upper = vec![0.0; s.n_resources()];
    for (j, r) in req.iter().enumerate() {
        for &i in &a.x[j] {
            if i >= s.n_resources() {
                continue;
            }
            upper[i] += r.frequency;
            if exceeds(r.frequency, a.f[i], tol) {
                push(ViolationKind::FreqLower, vec![i, j], r.frequency, a.f[i]);
            }
        }
    }
    for (i, &f) in a.f.iter().enumerate() {
        if f < -tol {
            push(ViolationKind::FreqLower, vec![i], 0.0, f);
        }
        if exceeds(f, upper[i], tol) {
            push(ViolationKind::FreqUpper, vec![i], f, upper[i]);
        }
    }

    for (h, b) in s.base_stations.iter().enumerate() {
        if exceeds(led.uplink[h], b.uplink_capacity, tol) {
            push(ViolationKind::Uplink, vec![h], led.uplink[h], b.uplink_capacity);
        }
    }
    for (m, host) in s.hosts.iter().enumerate() {
        if exceeds(led.fronthaul[m], host.fronthaul_capacity, tol) {
            push(ViolationKind::Fronthaul, vec![m], led.fronthaul[m], host.fronthaul_capacity);
        }
    }
    for m1 in 0..n_hosts {
        for m2 in 0..n_hosts {
            if m1 != m2 && exceeds(led.backhaul[m1][m2], s.backhaul(m1, m2), tol) {
                push(ViolationKind::Backhaul, vec![m1, m2], led.backhaul[m1][m2], s.backhaul(m1, m2));
            }
        }
    }
    out
}

/// Smallest rates satisfying the frequency rows: each resource samples at the
/// fastest frequency among the services it feeds, 0 when unused.
pub fn extract_frequencies(req: &[ServiceRequest], x: &[BTreeSet<usize>], n_resources: usize) -> Vec<f64> {
    let mut f = vec![0.0f64; n_resources];
    for (r, xs) in req.iter().zip(x) {
        for &i in xs {
            f[i] = f[i].max(r.frequency);
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_allocation, tiny_scenario};

    fn place_whole(s: &Scenario, r: &ServiceRequest, a: &mut Allocation, m: usize) {
        let j = r.id;
        a.y[m][j] = true;
        for &k in &r.scope {
            if let Some(&i) = s.resources_in(r.data_type, k).first() {
                a.x[j].insert(i);
            }
        }
    }

    #[test]
    fn empty_allocation_is_feasible() {
        for seed in 0..10 {
            let (s, req) = tiny_scenario(seed);
            let a = Allocation::empty(s.n_resources(), s.n_hosts(), req.len());
            assert!(check_feasibility(&s, &req, &a, DEFAULT_TOL).is_empty());
        }
    }

    #[test]
    fn cpu_overload_is_the_only_violation() {
        let (mut s, mut req) = tiny_scenario(3);
        req.truncate(1);
        let r = &mut req[0];
        // Make every scope cell coverable by a local resource and give the
        // network plenty of room.
        r.scope.retain(|&k| !s.resources_in(r.data_type, k).is_empty());
        if r.scope.is_empty() {
            let i = s.resources.iter().find(|x| x.data_type == r.data_type).unwrap();
            r.scope = vec![i.cell];
        }
        for b in &mut s.base_stations {
            b.uplink_capacity = 1e12;
        }
        for h in &mut s.hosts {
            h.fronthaul_capacity = 1e12;
            h.storage_capacity = 1e15;
            h.cpu_capacity = 0.5 * r.cpu_demand;
        }
        for row in &mut s.backhaul_capacity {
            for v in row.iter_mut().flatten() {
                *v = 1e12;
            }
        }
        let mut a = Allocation::empty(s.n_resources(), s.n_hosts(), 1);
        place_whole(&s, &req[0], &mut a, 0);
        a.f = extract_frequencies(&req, &a.x, s.n_resources());
        let v = check_feasibility(&s, &req, &a, DEFAULT_TOL);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].kind, ViolationKind::Cpu);
        assert_eq!(v[0].subjects, vec![0]);
    }

    #[test]
    fn frequency_rules() {
        let (s, req) = tiny_scenario(5);
        let mut x = vec![BTreeSet::new(); req.len()];
        let mut r2 = req.clone();
        if r2.len() < 2 {
            return;
        }
        r2[0].frequency = 0.25;
        r2[1].frequency = 1.0;
        x[0].insert(0);
        x[1].insert(0);
        let f = extract_frequencies(&r2, &x, s.n_resources());
        assert_eq!(f[0], 1.0);
        assert!(f[1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn extracted_frequencies_satisfy_frequency_rows() {
        for seed in 0..30 {
            let (s, req) = tiny_scenario(seed);
            let a = random_allocation(&s, &req, seed);
            let v = check_feasibility(&s, &req, &a, DEFAULT_TOL);
            assert!(
                v.iter().all(|v| !matches!(v.kind, ViolationKind::FreqLower | ViolationKind::FreqUpper)),
                "{v:?}"
            );
        }
    }

    #[test]
    fn double_placement_and_partial_coverage_are_reported() {
        let (s, req) = tiny_scenario(11);
        let mut a = Allocation::empty(s.n_resources(), s.n_hosts(), req.len());
        if s.n_hosts() < 2 {
            return;
        }
        a.y[0][0] = true;
        a.y[1][0] = true;
        let kinds: Vec<_> = check_feasibility(&s, &req, &a, DEFAULT_TOL).iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::SingleHost));
        assert!(kinds.contains(&ViolationKind::Coverage));
    }

    #[test]
    fn ineligible_resource_is_a_coverage_violation() {
        let (s, req) = tiny_scenario(2);
        let r = &req[0];
        let Some(bad) = (0..s.n_resources()).find(|&i| !s.eligible(i, r)) else {
            return;
        };
        let mut a = Allocation::empty(s.n_resources(), s.n_hosts(), req.len());
        a.x[0].insert(bad);
        a.f = extract_frequencies(&req, &a.x, s.n_resources());
        let v = check_feasibility(&s, &req, &a, DEFAULT_TOL);
        assert!(v.iter().any(|v| v.kind == ViolationKind::Coverage && v.subjects == vec![0, bad]));
    }
}
