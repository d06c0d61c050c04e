use serde::{Deserialize, Serialize};

use super::{Allocation, FlowLedger};
use crate::scenario::{Scenario, ServiceRequest};

/// Objective decomposition: deployed count, leased-resource cost and
/// `j = j_r - gamma * j_edge`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub j_r: f64,
    pub j_edge: f64,
    pub j: f64,
}

pub fn objective(s: &Scenario, _req: &[ServiceRequest], a: &Allocation, ledger: &FlowLedger) -> Objective {
    let c = &s.cost_model;
    let j_r = a.placed_count() as f64;
    let mut j_edge = c.c_bw1 * ledger.uplink.iter().sum::<f64>();
    for m in 0..s.n_hosts() {
        j_edge += c.c_cpu * ledger.cpu[m]
            + c.c_mem * ledger.storage[m]
            + c.c_bw2 * (ledger.fronthaul[m] + ledger.backhaul_out(m));
    }
    Objective {
        j_r,
        j_edge,
        j: j_r - c.gamma * j_edge,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::compute_flows;
    use crate::testutil::{random_allocation, tiny_scenario};

    #[test]
    fn empty_allocation_is_zero() {
        let (s, req) = tiny_scenario(1);
        let a = Allocation::empty(s.n_resources(), s.n_hosts(), req.len());
        let o = objective(&s, &req, &a, &compute_flows(&s, &req, &a));
        assert_eq!((o.j_r, o.j_edge, o.j), (0.0, 0.0, 0.0));
    }

    #[test]
    fn zero_cost_model_counts_services() {
        let (mut s, req) = tiny_scenario(1);
        s.cost_model.c_bw1 = 0.0;
        s.cost_model.c_bw2 = 0.0;
        s.cost_model.c_cpu = 0.0;
        s.cost_model.c_mem = 0.0;
        let mut a = Allocation::empty(s.n_resources(), s.n_hosts(), req.len());
        a.y[0][0] = true;
        let o = objective(&s, &req, &a, &compute_flows(&s, &req, &a));
        assert_eq!(o.j, 1.0);
    }

    #[test]
    fn edge_cost_matches_resummation() {
        for seed in 0..30 {
            let (s, req) = tiny_scenario(seed);
            let a = random_allocation(&s, &req, seed + 7);
            let o = objective(&s, &req, &a, &compute_flows(&s, &req, &a));
            // Per-term re-summation straight from the allocation.
            let c = &s.cost_model;
            let mut want = 0.0;
            for (i, f) in a.f.iter().enumerate() {
                // Every bit crosses one wireless and one fronthaul link.
                want += (c.c_bw1 + c.c_bw2) * f * s.payload_of(i);
            }
            for (j, r) in req.iter().enumerate() {
                for m in 0..s.n_hosts() {
                    if !a.y[m][j] {
                        continue;
                    }
                    want += c.c_cpu * r.cpu_demand + c.c_mem * s.storage_footprint(r);
                    for &i in &a.x[j] {
                        if s.host_of(i) != m {
                            want += c.c_bw2 * r.frequency * s.payload_of(i);
                        }
                    }
                }
            }
            assert!((o.j_edge - want).abs() <= 1e-9 * want.abs().max(1e-300), "{} vs {want}", o.j_edge);
        }
    }

    #[test]
    fn objective_is_monotone_in_gamma() {
        let (mut s, req) = tiny_scenario(4);
        let a = random_allocation(&s, &req, 3);
        let led = compute_flows(&s, &req, &a);
        let mut last = f64::INFINITY;
        for g in [0.0, 1e-9, 1e-6, 1e-3, 1.0] {
            s.cost_model.gamma = g;
            let j = objective(&s, &req, &a, &led).j;
            assert!(j <= last);
            last = j;
        }
    }
}
