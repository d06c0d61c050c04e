use serde::{Deserialize, Serialize};

use super::Allocation;
use crate::scenario::{Scenario, ServiceRequest};

/// Loads induced by an allocation, all in canonical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowLedger {
    /// F_h per base station
    pub uplink: Vec<f64>,
    /// F_m per host
    pub fronthaul: Vec<f64>,
    /// F_{m1,m2}: traffic from host m1 to host m2
    pub backhaul: Vec<Vec<f64>>,
    /// δ_m per host
    pub cpu: Vec<f64>,
    /// γ_m per host
    pub storage: Vec<f64>,
}

impl FlowLedger {
    pub fn zero(n_sbs: usize, n_hosts: usize) -> Self {
        FlowLedger {
            uplink: vec![0.0; n_sbs],
            fronthaul: vec![0.0; n_hosts],
            backhaul: vec![vec![0.0; n_hosts]; n_hosts],
            cpu: vec![0.0; n_hosts],
            storage: vec![0.0; n_hosts],
        }
    }

    /// Traffic leaving host `m` towards other hosts.
    pub fn backhaul_out(&self, m: usize) -> f64 {
        self.backhaul[m].iter().sum()
    }

    /// Traffic entering host `m` from other hosts.
    pub fn backhaul_in(&self, m: usize) -> f64 {
        self.backhaul.iter().map(|row| row[m]).sum()
    }
}

/// How host-to-host streams are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BackhaulMode {
    /// One stream per (service, resource) pair at the service frequency.
    #[default]
    PerService,
    /// Services co-located on a host share one stream per resource at the
    /// largest of their frequencies. Exploration only; the optimization model
    /// always uses `PerService`.
    Deduplicated,
}

pub fn compute_flows(s: &Scenario, req: &[ServiceRequest], a: &Allocation) -> FlowLedger {
    compute_flows_with(s, req, a, BackhaulMode::PerService)
}

pub fn compute_flows_with(s: &Scenario, req: &[ServiceRequest], a: &Allocation, mode: BackhaulMode) -> FlowLedger {
    let n_hosts = s.n_hosts();
    let mut led = FlowLedger::zero(s.n_sbs(), n_hosts);

    for (i, &f) in a.f.iter().enumerate() {
        if f != 0.0 {
            led.uplink[s.sbs_of(i)] += f * s.payload_of(i);
        }
    }
    for (m, host) in s.hosts.iter().enumerate() {
        led.fronthaul[m] = host.served_sbs.iter().map(|&h| led.uplink[h]).sum();
    }

    match mode {
        BackhaulMode::PerService => {
            for (j, r) in req.iter().enumerate() {
                for m2 in 0..n_hosts {
                    if !a.y[m2][j] {
                        continue;
                    }
                    for &i in &a.x[j] {
                        let m1 = s.host_of(i);
                        if m1 != m2 {
                            led.backhaul[m1][m2] += r.frequency * s.payload_of(i);
                        }
                    }
                }
            }
        }
        BackhaulMode::Deduplicated => {
            // (resource, destination host) -> largest frequency
            let mut streams = std::collections::BTreeMap::<(usize, usize), f64>::new();
            for (j, r) in req.iter().enumerate() {
                for m2 in 0..n_hosts {
                    if !a.y[m2][j] {
                        continue;
                    }
                    for &i in &a.x[j] {
                        if s.host_of(i) != m2 {
                            let e = streams.entry((i, m2)).or_insert(0.0);
                            *e = e.max(r.frequency);
                        }
                    }
                }
            }
            for ((i, m2), lambda) in streams {
                led.backhaul[s.host_of(i)][m2] += lambda * s.payload_of(i);
            }
        }
    }

    for (j, r) in req.iter().enumerate() {
        for m in 0..n_hosts {
            if a.y[m][j] {
                led.cpu[m] += r.cpu_demand;
                led.storage[m] += s.storage_footprint(r);
            }
        }
    }
    led
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Allocation;
    use crate::scenario::units::MB;
    use crate::testutil::{random_allocation, tiny_scenario};

    #[test]
    fn empty_allocation_has_zero_ledger() {
        let (s, req) = tiny_scenario(7);
        let a = Allocation::empty(s.n_resources(), s.n_hosts(), req.len());
        let led = compute_flows(&s, &req, &a);
        assert_eq!(led, FlowLedger::zero(s.n_sbs(), s.n_hosts()));
    }

    #[test]
    fn single_resource_uplink() {
        let (s, req) = tiny_scenario(7);
        let mut a = Allocation::empty(s.n_resources(), s.n_hosts(), req.len());
        let i = s.resources.iter().find(|r| r.data_type == 0).unwrap().id;
        a.f[i] = 1.0;
        let led = compute_flows(&s, &req, &a);
        let h = s.sbs_of(i);
        assert_eq!(led.uplink[h], 2.0 * MB);
        assert_eq!(led.uplink.iter().sum::<f64>(), 2.0 * MB);
    }

    /// Straight transcription of the flow equations, looping over terminals
    /// and base stations instead of the resource index.
    fn naive(s: &Scenario, req: &[ServiceRequest], a: &Allocation) -> FlowLedger {
        let n_hosts = s.n_hosts();
        let mut led = FlowLedger::zero(s.n_sbs(), n_hosts);
        for h in 0..s.n_sbs() {
            for t in &s.terminals {
                if t.associated_sbs == h {
                    for &i in &t.resources {
                        led.uplink[h] += a.f[i] * s.data_types[s.resources[i].data_type].payload;
                    }
                }
            }
        }
        for m in 0..n_hosts {
            for &h in &s.hosts[m].served_sbs {
                led.fronthaul[m] += led.uplink[h];
            }
        }
        for m1 in 0..n_hosts {
            for m2 in 0..n_hosts {
                if m1 == m2 {
                    continue;
                }
                for (j, r) in req.iter().enumerate() {
                    if !a.y[m2][j] {
                        continue;
                    }
                    for &h in &s.hosts[m1].served_sbs {
                        for t in s.terminals.iter().filter(|t| t.associated_sbs == h) {
                            for &i in &t.resources {
                                if s.resources[i].data_type == r.data_type && a.x[j].contains(&i) {
                                    led.backhaul[m1][m2] +=
                                        r.frequency * s.data_types[s.resources[i].data_type].payload;
                                }
                            }
                        }
                    }
                }
            }
        }
        for m in 0..n_hosts {
            for (j, r) in req.iter().enumerate() {
                if a.y[m][j] {
                    led.cpu[m] += r.cpu_demand;
                    led.storage[m] += r.persistent_storage
                        + s.data_types[r.data_type].payload * r.scope.len() as f64;
                }
            }
        }
        led
    }

    #[test]
    fn matches_naive_summation_on_random_allocations() {
        for seed in 0..40 {
            let (s, req) = tiny_scenario(seed);
            let a = random_allocation(&s, &req, seed + 1000);
            let got = compute_flows(&s, &req, &a);
            let want = naive(&s, &req, &a);
            let close = |x: &[f64], y: &[f64]| {
                x.iter().zip(y).all(|(p, q)| (p - q).abs() <= 1e-9 * (1.0 + q.abs()))
            };
            assert!(close(&got.uplink, &want.uplink));
            assert!(close(&got.fronthaul, &want.fronthaul));
            assert!(close(&got.cpu, &want.cpu));
            assert!(close(&got.storage, &want.storage));
            for m in 0..s.n_hosts() {
                assert!(close(&got.backhaul[m], &want.backhaul[m]));
                // Aggregation identity: F_m is the sum of its stations' F_h.
                let sum: f64 = s.hosts[m].served_sbs.iter().map(|&h| got.uplink[h]).sum();
                assert_eq!(got.fronthaul[m], sum);
            }
        }
    }

    #[test]
    fn deduplicated_mode_never_exceeds_per_service() {
        for seed in 0..20 {
            let (s, req) = tiny_scenario(seed);
            let a = random_allocation(&s, &req, seed);
            let per = compute_flows(&s, &req, &a);
            let dedup = compute_flows_with(&s, &req, &a, BackhaulMode::Deduplicated);
            for m1 in 0..s.n_hosts() {
                for m2 in 0..s.n_hosts() {
                    assert!(dedup.backhaul[m1][m2] <= per.backhaul[m1][m2] + 1e-6);
                }
            }
        }
    }
}
