use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::units::GB;
use super::{DataTypeSpec, ServiceRequest};
use crate::{Error, Result};

/// Template a service request is drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceClass {
    pub tag: String,
    pub data_type: usize,
    /// Execution frequency range, Hz.
    pub frequency: [f64; 2],
    /// Persistent storage range, bits.
    pub storage: [f64; 2],
    pub scope_size: usize,
}

impl ServiceClass {
    /// Visual scene recognition: camera frames at 0.125..1 Hz, 1..4 GB, 10 cells.
    pub fn vr() -> Self {
        ServiceClass {
            tag: "VR".into(),
            data_type: 0,
            frequency: [0.125, 1.0],
            storage: [1.0 * GB, 4.0 * GB],
            scope_size: 10,
        }
    }

    /// Audio event classification: microphone clips at 0.125..1 Hz, 1..2 GB, 10 cells.
    pub fn ac() -> Self {
        ServiceClass {
            tag: "AC".into(),
            data_type: 1,
            frequency: [0.125, 1.0],
            storage: [1.0 * GB, 2.0 * GB],
            scope_size: 10,
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    lo + rng.gen::<f64>() * (hi - lo)
}

/// Draws `count` requests. Request `r` uses template `r mod catalog.len()`;
/// its frequency and storage are uniform over the template ranges and its
/// scope is `scope_size` distinct cells sampled without replacement from
/// `cell_popularity`. The CPU demand is derived as
/// `frequency * payload * cycles_per_bit * |scope|`.
pub fn sample_service_requests(
    catalog: &[ServiceClass],
    count: usize,
    cell_popularity: &[f64],
    data_types: &[DataTypeSpec],
    seed: u64,
) -> Result<Vec<ServiceRequest>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if catalog.is_empty() {
        return Err(Error::Config("empty service catalog".into()));
    }
    if cell_popularity.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::Config("cell popularity must be non-negative".into()));
    }
    let k = cell_popularity.len();
    let support = cell_popularity.iter().filter(|p| **p > 0.0).count();
    for c in catalog {
        if c.scope_size > k {
            return Err(Error::Config(format!(
                "class {} asks for {} cells but the grid has {k}",
                c.tag, c.scope_size
            )));
        }
        if c.scope_size > support {
            return Err(Error::Config(format!(
                "class {} asks for {} cells but only {support} have positive popularity",
                c.tag, c.scope_size
            )));
        }
        if c.scope_size == 0 {
            return Err(Error::Config(format!("class {} has an empty scope", c.tag)));
        }
        if c.data_type >= data_types.len() {
            return Err(Error::Config(format!("class {} uses unknown data type", c.tag)));
        }
        if !(c.frequency[0] > 0.0 && c.frequency[1] >= c.frequency[0]) {
            return Err(Error::Config(format!("class {} has an invalid frequency range", c.tag)));
        }
        if !(c.storage[0] >= 0.0 && c.storage[1] >= c.storage[0]) {
            return Err(Error::Config(format!("class {} has an invalid storage range", c.tag)));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut weights = vec![0.0; k];
    for id in 0..count {
        let class = &catalog[id % catalog.len()];
        let dt = &data_types[class.data_type];
        let frequency = uniform(&mut rng, class.frequency);
        let persistent_storage = uniform(&mut rng, class.storage);

        weights.copy_from_slice(cell_popularity);
        let mut scope = Vec::with_capacity(class.scope_size);
        for _ in 0..class.scope_size {
            let total: f64 = weights.iter().sum();
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (c, w) in weights.iter().enumerate() {
                if *w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(c);
                if acc > target {
                    break;
                }
            }
            let c = pick.expect("positive support checked above");
            weights[c] = 0.0;
            scope.push(c);
        }
        scope.sort_unstable();

        let cpu_demand = frequency * dt.payload * dt.cycles_per_bit * scope.len() as f64;
        out.push(ServiceRequest {
            id,
            data_type: class.data_type,
            scope,
            frequency,
            cpu_demand,
            persistent_storage,
            class_tag: class.tag.clone(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::generate::default_data_types;
    use crate::scenario::units::GHZ;

    #[test]
    fn per_cell_compute_matches_the_service_table() {
        let dts = default_data_types();
        // VR at 1 Hz: 2e6 bits * 40 cycles/bit = 0.08 GHz per cell.
        let vr = &dts[0];
        assert!((1.0 * vr.payload * vr.cycles_per_bit - 0.08 * GHZ).abs() < 1e-3);
        // AC at 1 Hz: 1e6 * 30 = 0.03 GHz per cell.
        let ac = &dts[1];
        assert!((1.0 * ac.payload * ac.cycles_per_bit - 0.03 * GHZ).abs() < 1e-3);

        let mut fixed = ServiceClass::vr();
        fixed.frequency = [1.0, 1.0];
        let pop = vec![1.0 / 64.0; 64];
        let reqs = sample_service_requests(&[fixed], 3, &pop, &dts, 5).unwrap();
        for r in &reqs {
            assert_eq!(r.scope.len(), 10);
            assert!((r.cpu_demand - 0.8 * GHZ).abs() < 1.0);
        }
    }

    #[test]
    fn zero_count_is_empty() {
        let dts = default_data_types();
        let reqs = sample_service_requests(&[ServiceClass::vr()], 0, &[1.0; 4], &dts, 1).unwrap();
        assert!(reqs.is_empty());
    }

    #[test]
    fn scope_larger_than_grid_is_rejected() {
        let dts = default_data_types();
        let err = sample_service_requests(&[ServiceClass::vr()], 1, &[0.25; 4], &dts, 1).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn draws_respect_ranges_and_are_deterministic() {
        let dts = default_data_types();
        let pop = vec![1.0 / 64.0; 64];
        let cat = [ServiceClass::vr(), ServiceClass::ac()];
        let a = sample_service_requests(&cat, 40, &pop, &dts, 11).unwrap();
        let b = sample_service_requests(&cat, 40, &pop, &dts, 11).unwrap();
        assert_eq!(a, b);
        for (j, r) in a.iter().enumerate() {
            let class = &cat[j % 2];
            assert_eq!(r.class_tag, class.tag);
            assert!(r.frequency >= 0.125 && r.frequency <= 1.0);
            assert!(r.persistent_storage >= class.storage[0] && r.persistent_storage <= class.storage[1]);
            let mut s = r.scope.clone();
            s.dedup();
            assert_eq!(s.len(), 10);
        }
        // A shorter draw is a prefix of a longer one.
        let c = sample_service_requests(&cat, 10, &pop, &dts, 11).unwrap();
        assert_eq!(&a[..10], &c[..]);
    }

    #[test]
    fn zero_weight_cells_are_never_drawn() {
        let dts = default_data_types();
        let mut pop = vec![0.0; 64];
        for c in 0..12 {
            pop[c * 5] = 1.0;
        }
        let reqs = sample_service_requests(&[ServiceClass::vr()], 20, &pop, &dts, 2).unwrap();
        for r in reqs {
            assert!(r.scope.iter().all(|c| c % 5 == 0));
        }
    }
}
