//! Builds the 4-host desk scenario, samples Zipf-concentrated requests and
//! writes both to a JSON document.
//!
//! ```text
//! cargo run --example generate_scenario -- [seed] [out.json]
//! ```

use mec_alloc::scenario::units::{GB, GHZ, MBPS};
use mec_alloc::scenario::{
    generate_grid_scenario, poi_cells, read_scenario, sample_service_requests, write_scenario, zipf_cell_popularity,
    GridParams, ServiceClass, SliceCapacities,
};

fn main() -> mec_alloc::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed is an integer"));
    let out = args.next().unwrap_or_else(|| std::env::temp_dir().join("desk.json").display().to_string());

    let params = GridParams::desk_with(SliceCapacities::scen_b());
    let s = generate_grid_scenario(&params, seed)?;
    println!(
        "{} cells, {} base stations, {} hosts, {} terminals, {} resources",
        s.n_cells(),
        s.n_sbs(),
        s.n_hosts(),
        s.terminals.len(),
        s.n_resources()
    );
    for h in &s.hosts {
        println!(
            "host {}: sbs {:?}, cpu {:.1} GHz, storage {:.0} GB, fronthaul {:.1} Mbps",
            h.id,
            h.served_sbs,
            h.cpu_capacity / GHZ,
            h.storage_capacity / GB,
            h.fronthaul_capacity / MBPS
        );
    }
    println!("backhaul 0 -> 1: {:.3} Mbps", s.backhaul(0, 1) / MBPS);

    let pois = poi_cells(&s.cells, s.area_side, &[[0.25, 0.25], [0.75, 0.75]]);
    let pop = zipf_cell_popularity(&pois, 1.5, &s.cells)?;
    let hottest = pop.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    println!("alpha 1.5: hottest cell {} draws {:.1}% of scopes", hottest.0, 100.0 * hottest.1);

    let classes = [ServiceClass::vr(), ServiceClass::ac()];
    let req = sample_service_requests(&classes, 12, &pop, &s.data_types, seed)?;
    for r in req.iter().take(4) {
        println!("{} #{}: scope {:?} at {} Hz", r.class_tag, r.id, r.scope, r.frequency);
    }

    write_scenario(&s, &req, &out)?;
    let (back, back_req) = read_scenario(&out)?;
    assert_eq!((back, back_req), (s, req));
    println!("wrote {out}");
    Ok(())
}
