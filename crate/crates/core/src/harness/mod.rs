//! Experiment engine: seeded instance generation, policy suites over a swept
//! parameter, CSV result tables, percentile summaries, SVG plots and the
//! command line.

pub mod cli;
mod config;
mod plot;
mod report;
mod summary;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{Axis, ClassSpec, ExperimentConfig, Preset, RequestConfig, ScenarioConfig, SliceName, SliceSpec};
pub use plot::svg_plot;
pub use report::{csv_header, read_rows, rows_to_csv, write_csv, write_rows};
pub use summary::{nearest_rank, summarize, summary_to_csv, Stat, SummaryRow};

use crate::model::{check_feasibility, compute_flows, Objective, DEFAULT_TOL};
use crate::policies::{run_policy, PolicyKind, PolicyParams, PolicyReport, RejectCause};
use crate::scenario::{
    generate_grid_scenario, poi_cells, sample_service_requests, zipf_cell_popularity, Scenario, ServiceClass, ServiceRequest,
};
use crate::{Error, Result};

/// Generation attempts per replication before giving up.
pub const MAX_ATTEMPTS: u64 = 16;

/// Environment variable capping the number of concurrent replications.
pub const THREADS_ENV: &str = "MEC_ALLOC_THREADS";

/// One generated instance of a sweep.
#[derive(Debug, Clone)]
pub struct Instance {
    pub scenario: Scenario,
    pub requests: Vec<ServiceRequest>,
    /// Replication seed the instance was derived from.
    pub seed: u64,
    /// Generation attempts it took, 1 when the first draw succeeded.
    pub attempts: u64,
}

/// One policy run on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub policy: PolicyKind,
    pub axis: Axis,
    pub axis_value: f64,
    pub seed: u64,
    pub requested: usize,
    pub deployed_frac: f64,
    pub deployed_frac_vr: f64,
    pub deployed_frac_ac: f64,
    /// Reject counts in [`RejectCause::ALL`] order.
    pub rejects: [usize; 4],
    pub objective: Objective,
    pub runtime_s: f64,
    /// Per base station.
    pub util_uplink: Vec<f64>,
    /// Per host from here on.
    pub util_cpu: Vec<f64>,
    pub util_storage: Vec<f64>,
    pub util_in: Vec<f64>,
    pub util_out: Vec<f64>,
}

fn ratio(used: f64, cap: f64) -> f64 {
    if cap > 0.0 {
        used / cap
    } else {
        0.0
    }
}

/// Deployed share of the requests whose class tag passes `keep`; 1.0 when
/// there are none.
fn deployed_share(rep: &PolicyReport, req: &[ServiceRequest], keep: impl Fn(&str) -> bool) -> f64 {
    let (mut n, mut ok) = (0, 0);
    for (j, r) in req.iter().enumerate() {
        if keep(&r.class_tag) {
            n += 1;
            ok += usize::from(rep.allocation.is_placed(j));
        }
    }
    if n == 0 {
        1.0
    } else {
        ok as f64 / n as f64
    }
}

impl ResultRow {
    pub fn from_report(rep: &PolicyReport, kind: PolicyKind, axis: Axis, axis_value: f64, inst: &Instance) -> Self {
        let (s, req) = (&inst.scenario, &inst.requests[..]);
        let ledger = compute_flows(s, req, &rep.allocation);
        let hosts = 0..s.n_hosts();
        let link_sum = |m: usize, incoming: bool| -> f64 {
            (0..s.n_hosts())
                .filter(|&o| o != m)
                .map(|o| if incoming { s.backhaul(o, m) } else { s.backhaul(m, o) })
                .sum()
        };
        ResultRow {
            policy: kind,
            axis,
            axis_value,
            seed: inst.seed,
            requested: req.len(),
            deployed_frac: deployed_share(rep, req, |_| true),
            deployed_frac_vr: deployed_share(rep, req, |t| t == "VR"),
            deployed_frac_ac: deployed_share(rep, req, |t| t == "AC"),
            rejects: RejectCause::ALL.map(|c| rep.rejects(c)),
            objective: rep.objective,
            runtime_s: rep.runtime_s,
            util_uplink: (0..s.n_sbs())
                .map(|h| ratio(ledger.uplink[h], s.base_stations[h].uplink_capacity))
                .collect(),
            util_cpu: hosts.clone().map(|m| ratio(ledger.cpu[m], s.hosts[m].cpu_capacity)).collect(),
            util_storage: hosts.clone().map(|m| ratio(ledger.storage[m], s.hosts[m].storage_capacity)).collect(),
            util_in: hosts.clone().map(|m| ratio(ledger.backhaul_in(m), link_sum(m, true))).collect(),
            util_out: hosts.map(|m| ratio(ledger.backhaul_out(m), link_sum(m, false))).collect(),
        }
    }

    pub fn rejected(&self) -> usize {
        self.rejects.iter().sum()
    }

    pub fn reject_count(&self, cause: RejectCause) -> usize {
        self.rejects[RejectCause::ALL.iter().position(|&c| c == cause).expect("known cause")]
    }

    /// Every numeric column after `seed`, named as in the CSV header.
    pub fn metrics(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("deployed_frac".to_string(), self.deployed_frac),
            ("deployed_frac_VR".to_string(), self.deployed_frac_vr),
            ("deployed_frac_AC".to_string(), self.deployed_frac_ac),
        ];
        for (name, n) in ["rej_cpu", "rej_storage", "rej_fronthaul", "rej_backhaul"].iter().zip(self.rejects) {
            out.push((name.to_string(), n as f64));
        }
        out.push(("J_r".into(), self.objective.j_r));
        out.push(("J_edge".into(), self.objective.j_edge));
        out.push(("J".into(), self.objective.j));
        out.push(("runtime_s".into(), self.runtime_s));
        for (h, v) in self.util_uplink.iter().enumerate() {
            out.push((format!("util_uplink_h{h}"), *v));
        }
        let blocks = [
            ("util_cpu_m", &self.util_cpu),
            ("util_storage_m", &self.util_storage),
            ("util_in_m", &self.util_in),
            ("util_out_m", &self.util_out),
        ];
        for (prefix, vals) in blocks {
            for (m, v) in vals.iter().enumerate() {
                out.push((format!("{prefix}{m}"), *v));
            }
        }
        out
    }
}

/// Seed of replication `rep`.
pub fn replication_seed(cfg: &ExperimentConfig, rep: usize) -> u64 {
    cfg.base_seed.wrapping_add(rep as u64)
}

/// Independent sub-seed number `stream` of `seed`.
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.gen()
}

fn scale_scenario(s: &mut Scenario, axis: Axis, v: f64) {
    match axis {
        Axis::CpuCapacity => s.hosts.iter_mut().for_each(|h| h.cpu_capacity *= v),
        Axis::StorageCapacity => s.hosts.iter_mut().for_each(|h| h.storage_capacity *= v),
        Axis::Fronthaul => s.hosts.iter_mut().for_each(|h| h.fronthaul_capacity *= v),
        Axis::Backhaul => s
            .backhaul_capacity
            .iter_mut()
            .flatten()
            .flatten()
            .for_each(|c| *c *= v),
        Axis::ServiceCount | Axis::Alpha => {}
    }
}

fn draw_scenario(cfg: &ExperimentConfig, base: Option<&Scenario>, value: f64, seed: u64) -> Result<Scenario> {
    if let Some(b) = base {
        let mut s = b.clone();
        scale_scenario(&mut s, cfg.axis, value);
        return Ok(s);
    }
    let preset = cfg.scenario.preset.ok_or_else(|| Error::Config("scenario needs a `preset` or a `file`".into()))?;
    let mut slice = cfg.scenario.base_slice();
    match cfg.axis {
        Axis::CpuCapacity => slice.cpu *= value,
        Axis::StorageCapacity => slice.storage *= value,
        Axis::Backhaul => slice.backhaul *= value,
        // Grid presets serve one base station per host.
        Axis::Fronthaul => slice.fronthaul = Some(slice.fronthaul.unwrap_or(slice.uplink) * value),
        Axis::ServiceCount | Axis::Alpha => {}
    }
    generate_grid_scenario(&preset.params(slice, cfg.scenario.mesh_backhaul), seed)
}

/// Zipf popularity around the configured PoIs, restricted to cells holding a
/// resource of every requested data type.
pub fn request_popularity(s: &Scenario, classes: &[ServiceClass], pois: &[[f64; 2]], alpha: f64) -> Result<Vec<f64>> {
    let poi = poi_cells(&s.cells, s.area_side, pois);
    let mut pop = zipf_cell_popularity(&poi, alpha, &s.cells)?;
    for (k, p) in pop.iter_mut().enumerate() {
        let coverable = classes
            .iter()
            .all(|c| c.data_type < s.data_types.len() && !s.resources_in(c.data_type, k).is_empty());
        if !coverable {
            *p = 0.0;
        }
    }
    Ok(pop)
}

/// Draws the instance of one (axis value, replication) pair. A draw whose
/// scenario cannot be generated, or whose coverable cells are too few for
/// the requested scopes, is repeated with the next sub-seed.
pub fn generate_instance(cfg: &ExperimentConfig, base: Option<&Scenario>, value: f64, seed: u64) -> Result<Instance> {
    let classes = cfg.classes()?;
    let (count, alpha) = match cfg.axis {
        Axis::ServiceCount => (value as usize, cfg.requests.alpha),
        Axis::Alpha => (cfg.requests.service_count, value),
        _ => (cfg.requests.service_count, cfg.requests.alpha),
    };
    let widest = classes.iter().map(|c| c.scope_size).max().unwrap_or(0);
    let mut last = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let drawn = draw_scenario(cfg, base, value, sub_seed(seed, 2 * attempt)).and_then(|s| {
            let pop = request_popularity(&s, &classes, &cfg.requests.pois, alpha)?;
            let support = pop.iter().filter(|&&p| p > 0.0).count();
            if count > 0 && support < widest {
                return Err(Error::Generation(format!("only {support} coverable cells for scopes of {widest}")));
            }
            let req = sample_service_requests(&classes, count, &pop, &s.data_types, sub_seed(seed, 2 * attempt + 1))?;
            Ok((s, req))
        });
        match drawn {
            Ok((scenario, requests)) => {
                return Ok(Instance {
                    scenario,
                    requests,
                    seed,
                    attempts: attempt + 1,
                })
            }
            Err(Error::Generation(msg)) => {
                log::warn!("seed {seed}, attempt {}: {msg}; regenerating with the next sub-seed", attempt + 1);
                last = msg;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Generation(format!("no valid instance for seed {seed} after {MAX_ATTEMPTS} attempts: {last}")))
}

/// Runs one policy and checks its allocation. The runtime is the wall-clock
/// time of the policy call alone.
pub fn run_checked(cfg: &ExperimentConfig, kind: PolicyKind, inst: &Instance) -> Result<PolicyReport> {
    let params = PolicyParams {
        mu: cfg.mu,
        seed: inst.seed,
        exact_budget: cfg.exact_budget(),
    };
    let start = Instant::now();
    let mut rep = run_policy(kind, &inst.scenario, &inst.requests, &params);
    rep.runtime_s = start.elapsed().as_secs_f64();
    let violations = check_feasibility(&inst.scenario, &inst.requests, &rep.allocation, DEFAULT_TOL);
    if let Some(v) = violations.first() {
        return Err(Error::InfeasibleAllocation {
            policy: kind.name().to_string(),
            detail: format!(
                "{} violated constraints on seed {}, first {:?} {:?}: {} > {}",
                violations.len(),
                inst.seed,
                v.kind,
                v.subjects,
                v.lhs,
                v.rhs
            ),
        });
    }
    Ok(rep)
}

fn run_job(cfg: &ExperimentConfig, base: Option<&Scenario>, value: f64, rep: usize) -> Result<Vec<ResultRow>> {
    let inst = generate_instance(cfg, base, value, replication_seed(cfg, rep))?;
    log::debug!("{} = {value}, seed {}: {} requests", cfg.axis.name(), inst.seed, inst.requests.len());
    cfg.policies
        .iter()
        .map(|&kind| {
            let r = run_checked(cfg, kind, &inst)?;
            Ok(ResultRow::from_report(&r, kind, cfg.axis, value, &inst))
        })
        .collect()
}

/// Number of worker threads from [`THREADS_ENV`]; unset, empty or 0 lets
/// the pool choose.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))),
        _ => Ok(0),
    }
}

/// Runs the whole sweep. Rows come ordered by axis value, replication and
/// then policy in configuration order, whatever the thread count.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let base = cfg.load_base_scenario()?;
    let jobs: Vec<(f64, usize)> = cfg
        .values
        .iter()
        .flat_map(|&v| (0..cfg.replications).map(move |r| (v, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<Vec<ResultRow>>> =
        pool.install(|| jobs.par_iter().map(|&(v, r)| run_job(cfg, base.as_ref(), v, r)).collect());
    let mut rows = Vec::with_capacity(jobs.len() * cfg.policies.len());
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::units::{GB, GHZ, MBPS};
    use crate::scenario::write_scenario;

    fn quick(axis: Axis, values: Vec<f64>) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(axis, values, vec![PolicyKind::Dsp, PolicyKind::Gff, PolicyKind::Gbf]);
        c.requests.service_count = 6;
        c.replications = 2;
        c
    }

    #[test]
    fn table_slice_reaches_the_generated_hosts() {
        let mut c = quick(Axis::Alpha, vec![0.0]);
        c.scenario.slice = Some(SliceSpec::Named(SliceName::ScenA));
        c.scenario.mesh_backhaul = false;
        let inst = generate_instance(&c, None, 0.0, 1).unwrap();
        let s = &inst.scenario;
        assert_eq!((s.n_cells(), s.n_hosts()), (64, 4));
        for h in &s.hosts {
            assert_eq!(h.storage_capacity, 20.0 * GB);
            assert_eq!(h.cpu_capacity, 4.0 * GHZ);
        }
        assert!(s.base_stations.iter().all(|b| b.uplink_capacity == 60.0 * MBPS));
        assert_eq!(s.backhaul(0, 1), 10.0 * MBPS);
        c.scenario.mesh_backhaul = true;
        let scaled = generate_instance(&c, None, 0.0, 1).unwrap();
        assert!((scaled.scenario.backhaul(0, 1) - 10.0 * MBPS * 11.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn zero_requests_count_as_fully_deployed() {
        let c = quick(Axis::ServiceCount, vec![0.0]);
        let rows = run_suite(&c).unwrap();
        assert_eq!(rows.len(), 6);
        for r in rows {
            assert_eq!(r.deployed_frac, 1.0);
            assert_eq!(r.rejected(), 0);
            assert_eq!(r.objective.j_r, 0.0);
        }
    }

    #[test]
    fn row_cardinality_and_invariants() {
        let mut c = quick(Axis::Alpha, vec![0.0, 0.6, 1.5]);
        c.requests.classes = vec![ClassSpec::Named("VR".into()), ClassSpec::Named("AC".into())];
        let rows = run_suite(&c).unwrap();
        assert_eq!(rows.len(), 3 * 2 * 3);
        for r in &rows {
            for f in [r.deployed_frac, r.deployed_frac_vr, r.deployed_frac_ac] {
                assert!((0.0..=1.0).contains(&f));
            }
            let deployed = (r.deployed_frac * r.requested as f64).round() as usize;
            assert_eq!(r.rejected() + deployed, r.requested);
            assert_eq!(r.objective.j_r as usize, deployed);
            assert_eq!(r.util_cpu.len(), 4);
            assert!(r.util_cpu.iter().chain(&r.util_in).all(|u| *u <= 1.0 + 1e-6));
        }
        assert_eq!(rows[0].seed, rows[2].seed);
        assert_ne!(rows[0].seed, rows[3].seed);
    }

    #[test]
    fn capacity_axis_scales_the_slice() {
        let c = quick(Axis::Backhaul, vec![1.0, 2.0]);
        let a = generate_instance(&c, None, 1.0, 4).unwrap();
        let b = generate_instance(&c, None, 2.0, 4).unwrap();
        assert_eq!(a.scenario.terminals, b.scenario.terminals);
        assert_eq!(a.requests, b.requests);
        assert!((b.scenario.backhaul(1, 2) - 2.0 * a.scenario.backhaul(1, 2)).abs() < 1e-6);
    }

    #[test]
    fn file_scenarios_stay_fixed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let s = generate_grid_scenario(&crate::scenario::GridParams::desk(), 8).unwrap();
        write_scenario(&s, &[], &path).unwrap();
        let mut c = quick(Axis::StorageCapacity, vec![0.5, 1.0]);
        c.scenario = ScenarioConfig {
            preset: None,
            file: Some(path),
            slice: None,
            mesh_backhaul: true,
        };
        let base = c.load_base_scenario().unwrap();
        let half = generate_instance(&c, base.as_ref(), 0.5, 0).unwrap();
        assert_eq!(half.scenario.terminals, s.terminals);
        assert_eq!(half.scenario.hosts[0].storage_capacity, 0.5 * s.hosts[0].storage_capacity);
        assert_eq!(run_suite(&c).unwrap().len(), 2 * 2 * 3);
    }

    #[test]
    fn impossible_scopes_exhaust_the_attempts() {
        let mut c = quick(Axis::Alpha, vec![0.0]);
        let mut wide = ServiceClass::vr();
        wide.scope_size = 65;
        c.requests.classes = vec![ClassSpec::Custom(wide)];
        assert!(matches!(generate_instance(&c, None, 0.0, 0), Err(Error::Generation(_))));
    }

    #[test]
    fn sub_seeds_are_distinct_and_stable() {
        assert_eq!(sub_seed(5, 1), sub_seed(5, 1));
        assert_ne!(sub_seed(5, 0), sub_seed(5, 1));
        assert_ne!(sub_seed(5, 0), sub_seed(6, 0));
    }
}
