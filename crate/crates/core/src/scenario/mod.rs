//! World model: cells, sensing resources, terminals, base stations and MEC
//! hosts, plus the generators and the scenario file format.

mod generate;
mod io;
mod presets;
mod requests;
pub mod units;
mod zipf;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use generate::{
    associate_terminals, generate_grid_scenario, CostSettings, GridParams, SliceCapacities,
};
pub use io::{read_document, read_scenario, write_document, write_scenario, Document, FORMAT_VERSION};
pub use presets::tiny_instance;
pub use requests::{sample_service_requests, ServiceClass};
pub use zipf::{poi_cells, zipf_cell_popularity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }
}

/// A square cell of the reference grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: usize,
    pub row: usize,
    pub col: usize,
    pub center: Point,
}

/// A data type with its per-sample payload (bits) and processing cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTypeSpec {
    pub id: usize,
    pub payload: f64,
    pub cycles_per_bit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingResource {
    pub id: usize,
    pub data_type: usize,
    pub cell: usize,
    pub terminal: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoTTerminal {
    pub id: usize,
    pub position: Point,
    pub resources: Vec<usize>,
    pub associated_sbs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub id: usize,
    pub position: Point,
    pub coverage_radius: f64,
    /// Wireless uplink slice, bits/second.
    pub uplink_capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MecHost {
    pub id: usize,
    pub served_sbs: Vec<usize>,
    /// cycles/second
    pub cpu_capacity: f64,
    /// bits
    pub storage_capacity: f64,
    /// bits/second over the links to the served base stations
    pub fronthaul_capacity: f64,
}

/// Unit prices of leased resources and the weight of the cost term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// per bit/second of wireless uplink
    pub c_bw1: f64,
    /// per bit/second of wired link
    pub c_bw2: f64,
    /// per cycle/second
    pub c_cpu: f64,
    /// per bit of storage
    pub c_mem: f64,
    pub gamma: f64,
}

/// One requested IoT service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceRequest {
    pub id: usize,
    pub data_type: usize,
    /// Cells that must each be covered by one data stream.
    pub scope: Vec<usize>,
    /// Execution frequency, Hz.
    pub frequency: f64,
    /// cycles/second
    pub cpu_demand: f64,
    /// bits
    pub persistent_storage: f64,
    pub class_tag: String,
}

/// The immutable world an allocation is computed for.
///
/// Build one with [`generate_grid_scenario`] or [`Scenario::from_parts`]; both
/// validate every invariant. Derived lookups (resource to base station, host,
/// and the per-cell candidate lists) are computed lazily and never serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub cells: Vec<Cell>,
    pub data_types: Vec<DataTypeSpec>,
    pub resources: Vec<SensingResource>,
    pub terminals: Vec<IoTTerminal>,
    pub base_stations: Vec<BaseStation>,
    pub hosts: Vec<MecHost>,
    /// `backhaul_capacity[m1][m2]`, bits/second; the diagonal is `None`.
    pub backhaul_capacity: Vec<Vec<Option<f64>>>,
    pub cost_model: CostModel,
    pub area_side: f64,
    pub cell_side: f64,
    pub rng_seed: u64,
    #[serde(skip)]
    index: IndexCache,
}

/// Parts of a [`Scenario`] before validation.
#[derive(Debug, Clone)]
pub struct ScenarioParts {
    pub cells: Vec<Cell>,
    pub data_types: Vec<DataTypeSpec>,
    pub resources: Vec<SensingResource>,
    pub terminals: Vec<IoTTerminal>,
    pub base_stations: Vec<BaseStation>,
    pub hosts: Vec<MecHost>,
    pub backhaul_capacity: Vec<Vec<Option<f64>>>,
    pub cost_model: CostModel,
    pub area_side: f64,
    pub cell_side: f64,
    pub rng_seed: u64,
}

#[derive(Debug, Default, Clone)]
struct IndexCache(OnceLock<ScenarioIndex>);

impl PartialEq for IndexCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
struct ScenarioIndex {
    resource_sbs: Vec<usize>,
    resource_host: Vec<usize>,
    sbs_host: Vec<usize>,
    /// `[data_type][cell]` -> resource ids, ascending
    by_type_cell: Vec<Vec<Vec<usize>>>,
    sbs_resources: Vec<Vec<usize>>,
}

impl Scenario {
    pub fn from_parts(p: ScenarioParts) -> Result<Self> {
        let s = Scenario {
            cells: p.cells,
            data_types: p.data_types,
            resources: p.resources,
            terminals: p.terminals,
            base_stations: p.base_stations,
            hosts: p.hosts,
            backhaul_capacity: p.backhaul_capacity,
            cost_model: p.cost_model,
            area_side: p.area_side,
            cell_side: p.cell_side,
            rng_seed: p.rng_seed,
            index: IndexCache::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_resources(&self) -> usize {
        self.resources.len()
    }

    pub fn n_sbs(&self) -> usize {
        self.base_stations.len()
    }

    pub fn n_hosts(&self) -> usize {
        self.hosts.len()
    }

    /// Payload (bits per sample) of resource `i`'s data type.
    pub fn payload_of(&self, i: usize) -> f64 {
        self.data_types[self.resources[i].data_type].payload
    }

    /// Base station the resource's terminal is associated with.
    pub fn sbs_of(&self, i: usize) -> usize {
        self.index().resource_sbs[i]
    }

    /// MEC host that receives resource `i`'s uplink traffic.
    pub fn host_of(&self, i: usize) -> usize {
        self.index().resource_host[i]
    }

    pub fn host_of_sbs(&self, h: usize) -> usize {
        self.index().sbs_host[h]
    }

    /// Resources of `data_type` located in `cell`, ascending ids.
    pub fn resources_in(&self, data_type: usize, cell: usize) -> &[usize] {
        &self.index().by_type_cell[data_type][cell]
    }

    /// Resources whose terminal is associated with base station `h`.
    pub fn resources_of_sbs(&self, h: usize) -> &[usize] {
        &self.index().sbs_resources[h]
    }

    /// Backhaul capacity of the ordered pair; 0 on the diagonal.
    pub fn backhaul(&self, m1: usize, m2: usize) -> f64 {
        self.backhaul_capacity[m1][m2].unwrap_or(0.0)
    }

    /// Whether resource `i` may feed service `req` (same data type, cell in scope).
    pub fn eligible(&self, i: usize, req: &ServiceRequest) -> bool {
        let r = &self.resources[i];
        r.data_type == req.data_type && req.scope.contains(&r.cell)
    }

    /// Storage a placed service occupies: persistent state plus one sample per
    /// scope cell.
    pub fn storage_footprint(&self, req: &ServiceRequest) -> f64 {
        req.persistent_storage + self.data_types[req.data_type].payload * req.scope.len() as f64
    }

    /// Cost of the whole slice when every capacity is saturated.
    pub fn max_edge_cost(&self) -> f64 {
        max_edge_cost(
            &self.cost_model,
            &self.base_stations,
            &self.hosts,
            &self.backhaul_capacity,
        )
    }

    fn index(&self) -> &ScenarioIndex {
        self.index.0.get_or_init(|| self.build_index())
    }

    fn build_index(&self) -> ScenarioIndex {
        let mut sbs_host = vec![usize::MAX; self.base_stations.len()];
        for host in &self.hosts {
            for &h in &host.served_sbs {
                sbs_host[h] = host.id;
            }
        }
        let mut by_type_cell = vec![vec![Vec::new(); self.cells.len()]; self.data_types.len()];
        let mut sbs_resources = vec![Vec::new(); self.base_stations.len()];
        let mut resource_sbs = Vec::with_capacity(self.resources.len());
        let mut resource_host = Vec::with_capacity(self.resources.len());
        for r in &self.resources {
            let h = self.terminals[r.terminal].associated_sbs;
            resource_sbs.push(h);
            resource_host.push(sbs_host[h]);
            by_type_cell[r.data_type][r.cell].push(r.id);
            sbs_resources[h].push(r.id);
        }
        ScenarioIndex {
            resource_sbs,
            resource_host,
            sbs_host,
            by_type_cell,
            sbs_resources,
        }
    }

    /// Checks every structural invariant. Errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: String, reason: &str| Err(Error::parse(field, reason.to_string()));

        if !(self.area_side > 0.0) {
            return bad("scenario.area_side".into(), "must be > 0");
        }
        if !(self.cell_side > 0.0) {
            return bad("scenario.cell_side".into(), "must be > 0");
        }
        for (k, c) in self.cells.iter().enumerate() {
            if c.id != k {
                return bad(format!("scenario.cells[{k}].id"), "ids must be dense and ordered");
            }
            let inside = |v: f64| (0.0..=self.area_side).contains(&v);
            if !inside(c.center.x) || !inside(c.center.y) {
                return bad(format!("scenario.cells[{k}].center"), "outside the reference area");
            }
        }
        for (l, d) in self.data_types.iter().enumerate() {
            if d.id != l {
                return bad(format!("scenario.data_types[{l}].id"), "ids must be dense and ordered");
            }
            if !(d.payload > 0.0) {
                return bad(format!("scenario.data_types[{l}].payload"), "must be > 0");
            }
            if !(d.cycles_per_bit >= 0.0) {
                return bad(format!("scenario.data_types[{l}].cycles_per_bit"), "must be >= 0");
            }
        }
        let n_sbs = self.base_stations.len();
        for (h, b) in self.base_stations.iter().enumerate() {
            if b.id != h {
                return bad(format!("scenario.base_stations[{h}].id"), "ids must be dense and ordered");
            }
            if !(b.coverage_radius > 0.0) {
                return bad(format!("scenario.base_stations[{h}].coverage_radius"), "must be > 0");
            }
            if !(b.uplink_capacity >= 0.0) {
                return bad(format!("scenario.base_stations[{h}].uplink_capacity"), "must be >= 0");
            }
        }
        for (t, term) in self.terminals.iter().enumerate() {
            if term.id != t {
                return bad(format!("scenario.terminals[{t}].id"), "ids must be dense and ordered");
            }
            if term.associated_sbs >= n_sbs {
                return bad(format!("scenario.terminals[{t}].associated_sbs"), "unknown base station");
            }
            let b = &self.base_stations[term.associated_sbs];
            if term.position.dist(&b.position) > b.coverage_radius * (1.0 + 1e-12) {
                return bad(
                    format!("scenario.terminals[{t}].associated_sbs"),
                    "terminal outside the coverage of its base station",
                );
            }
            for &i in &term.resources {
                if self.resources.get(i).map(|r| r.terminal) != Some(t) {
                    return bad(format!("scenario.terminals[{t}].resources"), "resource not owned by terminal");
                }
            }
        }
        for (i, r) in self.resources.iter().enumerate() {
            if r.id != i {
                return bad(format!("scenario.resources[{i}].id"), "ids must be dense and ordered");
            }
            if r.data_type >= self.data_types.len() {
                return bad(format!("scenario.resources[{i}].data_type"), "unknown data type");
            }
            if r.cell >= self.cells.len() {
                return bad(format!("scenario.resources[{i}].cell"), "unknown cell");
            }
            if r.terminal >= self.terminals.len() || !self.terminals[r.terminal].resources.contains(&i) {
                return bad(format!("scenario.resources[{i}].terminal"), "terminal does not list this resource");
            }
        }
        let mut served = vec![false; n_sbs];
        for (m, host) in self.hosts.iter().enumerate() {
            if host.id != m {
                return bad(format!("scenario.hosts[{m}].id"), "ids must be dense and ordered");
            }
            for (name, v) in [
                ("cpu_capacity", host.cpu_capacity),
                ("storage_capacity", host.storage_capacity),
                ("fronthaul_capacity", host.fronthaul_capacity),
            ] {
                if !(v >= 0.0) || !v.is_finite() {
                    return bad(format!("scenario.hosts[{m}].{name}"), "capacity must be finite and >= 0");
                }
            }
            for &h in &host.served_sbs {
                if h >= n_sbs {
                    return bad(format!("scenario.hosts[{m}].served_sbs"), "unknown base station");
                }
                if served[h] {
                    return bad(format!("scenario.hosts[{m}].served_sbs"), "base station served by two hosts");
                }
                served[h] = true;
            }
        }
        if let Some(h) = served.iter().position(|s| !s) {
            return bad("scenario.hosts".into(), &format!("base station {h} is not served by any host"));
        }
        let n_hosts = self.hosts.len();
        if self.backhaul_capacity.len() != n_hosts {
            return bad("scenario.backhaul_capacity".into(), "must have one row per host");
        }
        for (m1, row) in self.backhaul_capacity.iter().enumerate() {
            if row.len() != n_hosts {
                return bad(format!("scenario.backhaul_capacity[{m1}]"), "missing backhaul pair");
            }
            for (m2, v) in row.iter().enumerate() {
                match (m1 == m2, v) {
                    (true, _) => {}
                    (false, None) => {
                        return bad(format!("scenario.backhaul_capacity[{m1}][{m2}]"), "missing backhaul pair")
                    }
                    (false, Some(c)) if !(*c >= 0.0) || !c.is_finite() => {
                        return bad(
                            format!("scenario.backhaul_capacity[{m1}][{m2}]"),
                            "capacity must be finite and >= 0",
                        )
                    }
                    _ => {}
                }
            }
        }
        let c = &self.cost_model;
        for (name, v) in [("c_bw1", c.c_bw1), ("c_bw2", c.c_bw2), ("c_cpu", c.c_cpu), ("c_mem", c.c_mem)] {
            if !(v >= 0.0) {
                return bad(format!("scenario.cost_model.{name}"), "must be >= 0");
            }
        }
        if !(c.gamma > 0.0) {
            return bad("scenario.cost_model.gamma".into(), "must be > 0");
        }
        Ok(())
    }

    /// Checks a request list against this scenario.
    pub fn validate_requests(&self, requests: &[ServiceRequest]) -> Result<()> {
        for (j, r) in requests.iter().enumerate() {
            let field = |f: &str| format!("requests[{j}].{f}");
            if r.id != j {
                return Err(Error::parse(field("id"), "ids must be dense and ordered"));
            }
            if r.data_type >= self.data_types.len() {
                return Err(Error::parse(field("data_type"), "unknown data type"));
            }
            if r.scope.is_empty() {
                return Err(Error::parse(field("scope"), "scope must not be empty"));
            }
            let mut seen = vec![false; self.cells.len()];
            for &k in &r.scope {
                if k >= self.cells.len() || seen[k] {
                    return Err(Error::parse(field("scope"), "unknown or repeated cell"));
                }
                seen[k] = true;
            }
            if !(r.frequency > 0.0) {
                return Err(Error::parse(field("frequency"), "must be > 0"));
            }
            if !(r.cpu_demand >= 0.0) {
                return Err(Error::parse(field("cpu_demand"), "must be >= 0"));
            }
            if !(r.persistent_storage >= 0.0) {
                return Err(Error::parse(field("persistent_storage"), "must be >= 0"));
            }
        }
        Ok(())
    }
}

pub(crate) fn max_edge_cost(
    cost: &CostModel,
    base_stations: &[BaseStation],
    hosts: &[MecHost],
    backhaul: &[Vec<Option<f64>>],
) -> f64 {
    let uplink: f64 = base_stations.iter().map(|b| b.uplink_capacity).sum();
    let mut total = cost.c_bw1 * uplink;
    for (m, h) in hosts.iter().enumerate() {
        let out: f64 = backhaul[m].iter().flatten().sum();
        total += cost.c_cpu * h.cpu_capacity
            + cost.c_mem * h.storage_capacity
            + cost.c_bw2 * (h.fronthaul_capacity + out);
    }
    total
}
