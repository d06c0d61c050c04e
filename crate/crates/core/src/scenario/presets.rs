use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::units::{GB, GHZ, MBPS};
use super::{generate_grid_scenario, sample_service_requests, GridParams, Scenario, ServiceClass, ServiceRequest, SliceCapacities};
use crate::Result;

/// A randomized instance small enough for exhaustive enumeration: a 2 x 2
/// cell grid, one or two hosts, two or three terminals (one resource of each
/// type), one to three services with two-cell scopes, and capacities drawn
/// so that every constraint family binds now and then.
pub fn tiny_instance(seed: u64) -> Result<(Scenario, Vec<ServiceRequest>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_7171);
    let slice = SliceCapacities {
        cpu: rng.gen_range(0.05..0.6) * GHZ,
        storage: rng.gen_range(1.0..8.0) * GB,
        uplink: rng.gen_range(1.0..6.0) * MBPS,
        backhaul: rng.gen_range(0.2..4.0) * MBPS,
        fronthaul: None,
    };
    let params = GridParams {
        area_side: 40.0,
        cell_side: 20.0,
        sbs_rows: 1,
        sbs_cols: rng.gen_range(1..=2),
        coverage_radius: 30.0,
        terminals: rng.gen_range(2..=3),
        resources_per_type: 1,
        ..GridParams::paper()
    }
    .with_slice(slice);
    let s = generate_grid_scenario(&params, rng.gen())?;
    let classes = [
        ServiceClass {
            storage: [0.5 * GB, 3.0 * GB],
            scope_size: 2,
            ..ServiceClass::vr()
        },
        ServiceClass {
            storage: [0.5 * GB, 2.0 * GB],
            scope_size: 2,
            ..ServiceClass::ac()
        },
    ];
    let count = rng.gen_range(1..=3);
    // Every terminal carries both types, so occupied cells are coverable.
    let mut pop: Vec<f64> = (0..s.n_cells())
        .map(|k| if s.resources_in(0, k).is_empty() { 0.0 } else { 1.0 })
        .collect();
    if pop.iter().filter(|&&p| p > 0.0).count() < 2 {
        pop.fill(1.0);
    }
    let req = sample_service_requests(&classes, count, &pop, &s.data_types, rng.gen())?;
    Ok((s, req))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_instances_stay_within_enumeration_limits() {
        for seed in 0..100 {
            let (s, req) = tiny_instance(seed).unwrap();
            assert!(s.n_hosts() <= 2 && s.n_cells() <= 4 && s.n_resources() <= 6 && req.len() <= 3);
            assert!(s.n_hosts() * req.len() <= 8);
        }
        assert_eq!(tiny_instance(5).unwrap(), tiny_instance(5).unwrap());
    }
}
