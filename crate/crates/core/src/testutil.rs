use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{extract_frequencies, Allocation};
use crate::scenario::{tiny_instance, Scenario, ServiceRequest};

pub fn tiny_scenario(seed: u64) -> (Scenario, Vec<ServiceRequest>) {
    tiny_instance(seed).unwrap()
}

/// Random integral allocation over eligible pairs: each service is placed on
/// a random host or left out, and scope cells are covered by a random
/// eligible resource (sometimes none, sometimes one for an unplaced service).
pub fn random_allocation(s: &Scenario, req: &[ServiceRequest], seed: u64) -> Allocation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Allocation::empty(s.n_resources(), s.n_hosts(), req.len());
    for (j, r) in req.iter().enumerate() {
        let choice = rng.gen_range(0..=s.n_hosts());
        if choice < s.n_hosts() {
            a.y[choice][j] = true;
        }
        for &k in &r.scope {
            let cands = s.resources_in(r.data_type, k);
            if cands.is_empty() {
                continue;
            }
            let keep = if choice < s.n_hosts() { rng.gen_bool(0.9) } else { rng.gen_bool(0.1) };
            if keep {
                a.x[j].insert(cands[rng.gen_range(0..cands.len())]);
            }
        }
    }
    a.f = extract_frequencies(req, &a.x, s.n_resources());
    a
}
