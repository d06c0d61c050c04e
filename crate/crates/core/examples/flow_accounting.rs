//! Recomputes the traffic of a policy's allocation and reports how full
//! every link and host is.

use mec_alloc::harness::{generate_instance, Axis, ExperimentConfig};
use mec_alloc::model::{check_feasibility, compute_flows, DEFAULT_TOL};
use mec_alloc::policies::{greedy_best_fit, PolicyKind};

fn main() -> mec_alloc::Result<()> {
    let cfg = ExperimentConfig::new(Axis::Alpha, vec![1.5], vec![PolicyKind::Gbf]);
    let inst = generate_instance(&cfg, None, 1.5, 5)?;
    let (s, req) = (&inst.scenario, &inst.requests);
    let rep = greedy_best_fit(s, req, 5);
    assert!(check_feasibility(s, req, &rep.allocation, DEFAULT_TOL).is_empty());

    let f = compute_flows(s, req, &rep.allocation);
    println!("{} of {} services deployed", rep.deployed(), req.len());
    for (h, b) in s.base_stations.iter().enumerate() {
        println!("uplink h{h}: {:5.1}%", 100.0 * f.uplink[h] / b.uplink_capacity);
    }
    for (m, host) in s.hosts.iter().enumerate() {
        println!(
            "host m{m}: cpu {:5.1}%  storage {:5.1}%  fronthaul {:5.1}%",
            100.0 * f.cpu[m] / host.cpu_capacity,
            100.0 * f.storage[m] / host.storage_capacity,
            100.0 * f.fronthaul[m] / host.fronthaul_capacity
        );
    }
    for m1 in 0..s.n_hosts() {
        let row: Vec<String> = (0..s.n_hosts())
            .map(|m2| if m1 == m2 { "   -  ".into() } else { format!("{:5.1}%", 100.0 * f.backhaul[m1][m2] / s.backhaul(m1, m2)) })
            .collect();
        println!("backhaul from m{m1}: {}", row.join(" "));
    }
    Ok(())
}
