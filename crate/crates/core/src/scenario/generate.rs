use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::units::{GB, GHZ, MB, MBPS};
use super::{
    max_edge_cost, BaseStation, Cell, CostModel, DataTypeSpec, IoTTerminal, MecHost, Point,
    Scenario, ScenarioParts, SensingResource,
};
use crate::{Error, Result};

/// Per-host slice capacities granted by the network operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceCapacities {
    /// Δ_m, cycles/second
    pub cpu: f64,
    /// Γ_m, bits
    pub storage: f64,
    /// B↑_h per base station, bits/second
    pub uplink: f64,
    /// B_{m1,m2} per ordered host pair, bits/second
    pub backhaul: f64,
    /// B_m; defaults to the summed uplink of the served base stations.
    #[serde(default)]
    pub fronthaul: Option<f64>,
}

impl SliceCapacities {
    /// Abundant slice: 20 GB, 4 GHz, 60 Mbps uplink, 10 Mbps backhaul.
    pub fn scen_a() -> Self {
        SliceCapacities {
            cpu: 4.0 * GHZ,
            storage: 20.0 * GB,
            uplink: 60.0 * MBPS,
            backhaul: 10.0 * MBPS,
            fronthaul: None,
        }
    }

    /// Constrained slice: 15 GB, 2 GHz, 30 Mbps uplink, 5 Mbps backhaul.
    pub fn scen_b() -> Self {
        SliceCapacities {
            cpu: 2.0 * GHZ,
            storage: 15.0 * GB,
            uplink: 30.0 * MBPS,
            backhaul: 5.0 * MBPS,
            fronthaul: None,
        }
    }

    /// Rescales the per-link backhaul so that a full mesh of `hosts` hosts
    /// gives each host the same total host-to-host capacity as a mesh of
    /// `reference` hosts.
    pub fn mesh_scaled(mut self, reference: usize, hosts: usize) -> Self {
        if reference > 1 && hosts > 1 {
            self.backhaul *= (reference - 1) as f64 / (hosts - 1) as f64;
        }
        self
    }
}

/// Unit prices; `gamma: None` derives the weight from the saturated slice cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSettings {
    pub c_bw1: f64,
    pub c_bw2: f64,
    pub c_cpu: f64,
    pub c_mem: f64,
    #[serde(default)]
    pub gamma: Option<f64>,
}

impl Default for CostSettings {
    /// One unit per Mbps (wireless and wired), per GHz and per GB.
    fn default() -> Self {
        CostSettings {
            c_bw1: 1.0 / MBPS,
            c_bw2: 1.0 / MBPS,
            c_cpu: 1.0 / GHZ,
            c_mem: 1.0 / GB,
            gamma: None,
        }
    }
}

/// Parameters of the regular-grid evaluation world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub area_side: f64,
    pub cell_side: f64,
    pub sbs_rows: usize,
    pub sbs_cols: usize,
    pub coverage_radius: f64,
    pub terminals: usize,
    /// Sensing resources of each data type carried by every terminal.
    pub resources_per_type: usize,
    pub data_types: Vec<DataTypeSpec>,
    pub slice: SliceCapacities,
    #[serde(default)]
    pub cost: CostSettings,
}

/// Camera (2 Mb frames, 40 cycles/bit) and microphone (1 Mb clips, 30 cycles/bit).
pub(crate) fn default_data_types() -> Vec<DataTypeSpec> {
    vec![
        DataTypeSpec {
            id: 0,
            payload: 2.0 * MB,
            cycles_per_bit: 40.0,
        },
        DataTypeSpec {
            id: 1,
            payload: 1.0 * MB,
            cycles_per_bit: 30.0,
        },
    ]
}

impl GridParams {
    /// 400 m x 400 m, 20 m cells (K = 400), 3 x 4 base stations with 120 m
    /// radius, 1200 terminals, one host per base station.
    pub fn paper() -> Self {
        GridParams {
            area_side: 400.0,
            cell_side: 20.0,
            sbs_rows: 3,
            sbs_cols: 4,
            coverage_radius: 120.0,
            terminals: 1200,
            resources_per_type: 1,
            data_types: default_data_types(),
            slice: SliceCapacities::scen_a(),
            cost: CostSettings::default(),
        }
    }

    /// Desktop-sized world: 160 m x 160 m (K = 64), 2 x 2 base stations and
    /// hosts, 120 terminals, Scen A slice. See [`GridParams::desk_with`].
    pub fn desk() -> Self {
        Self::desk_with(SliceCapacities::scen_a())
    }

    /// Desk world with the given per-host slice. CPU, storage and uplink are
    /// kept per host, so the aggregate slice shrinks with the host count;
    /// the per-link backhaul is mesh-scaled from the 12-host full-scale layout.
    pub fn desk_with(slice: SliceCapacities) -> Self {
        let full = GridParams::paper();
        let hosts = 4;
        GridParams {
            area_side: 160.0,
            sbs_rows: 2,
            sbs_cols: 2,
            terminals: 120,
            slice: slice.mesh_scaled(full.sbs_rows * full.sbs_cols, hosts),
            ..full
        }
    }

    pub fn with_slice(mut self, slice: SliceCapacities) -> Self {
        self.slice = slice;
        self
    }

    fn grid_dim(&self) -> Result<usize> {
        let cfg = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.area_side > 0.0) || !(self.cell_side > 0.0) {
            return cfg("area and cell sides must be > 0");
        }
        let ratio = self.area_side / self.cell_side;
        let dim = ratio.round();
        if dim < 1.0 || (ratio - dim).abs() > 1e-9 * ratio {
            return cfg("area side must be a whole multiple of the cell side");
        }
        if self.sbs_rows == 0 || self.sbs_cols == 0 {
            return cfg("base-station grid must have at least one row and column");
        }
        if !(self.coverage_radius > 0.0) {
            return cfg("coverage radius must be > 0");
        }
        let half_w = self.area_side / self.sbs_cols as f64 / 2.0;
        let half_h = self.area_side / self.sbs_rows as f64 / 2.0;
        if (half_w * half_w + half_h * half_h).sqrt() > self.coverage_radius {
            return cfg("base-station grid does not cover the whole area");
        }
        if self.resources_per_type == 0 || self.data_types.is_empty() {
            return cfg("terminals must carry at least one sensing resource");
        }
        for (l, d) in self.data_types.iter().enumerate() {
            if d.id != l || !(d.payload > 0.0) || !(d.cycles_per_bit >= 0.0) {
                return cfg("data types must have dense ids, payload > 0 and cycles_per_bit >= 0");
            }
        }
        let s = &self.slice;
        for v in [s.cpu, s.storage, s.uplink, s.backhaul, s.fronthaul.unwrap_or(0.0)] {
            if !(v >= 0.0) || !v.is_finite() {
                return cfg("slice capacities must be finite and >= 0");
            }
        }
        let c = &self.cost;
        if [c.c_bw1, c.c_bw2, c.c_cpu, c.c_mem].iter().any(|v| !(*v >= 0.0)) {
            return cfg("cost coefficients must be >= 0");
        }
        if matches!(c.gamma, Some(g) if !(g > 0.0)) {
            return cfg("gamma must be > 0");
        }
        Ok(dim as usize)
    }
}

/// Maps every terminal to its Euclidean-nearest base station (lowest id on
/// ties). Fails if a terminal lies outside the radius of that station.
pub fn associate_terminals(positions: &[Point], base_stations: &[BaseStation]) -> Result<Vec<usize>> {
    positions
        .iter()
        .enumerate()
        .map(|(t, p)| {
            let mut best: Option<(usize, f64)> = None;
            for b in base_stations {
                let d = p.dist2(&b.position);
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((b.id, d));
                }
            }
            let (h, d2) = best.ok_or_else(|| Error::Generation("no base stations".into()))?;
            if d2.sqrt() > base_stations[h].coverage_radius {
                return Err(Error::Generation(format!(
                    "terminal {t} at ({:.2}, {:.2}) is outside every coverage radius",
                    p.x, p.y
                )));
            }
            Ok(h)
        })
        .collect()
}

/// Builds a randomized grid world. Terminal placement is uniform; the result
/// is a pure function of `(params, seed)`.
pub fn generate_grid_scenario(params: &GridParams, seed: u64) -> Result<Scenario> {
    let dim = params.grid_dim()?;
    let side = params.area_side;
    let cs = params.cell_side;

    let cells: Vec<Cell> = (0..dim * dim)
        .map(|k| {
            let (row, col) = (k / dim, k % dim);
            Cell {
                id: k,
                row,
                col,
                center: Point::new((col as f64 + 0.5) * cs, (row as f64 + 0.5) * cs),
            }
        })
        .collect();

    let (rows, cols) = (params.sbs_rows, params.sbs_cols);
    let base_stations: Vec<BaseStation> = (0..rows * cols)
        .map(|h| {
            let (r, c) = (h / cols, h % cols);
            BaseStation {
                id: h,
                position: Point::new(
                    (c as f64 + 0.5) * side / cols as f64,
                    (r as f64 + 0.5) * side / rows as f64,
                ),
                coverage_radius: params.coverage_radius,
                uplink_capacity: params.slice.uplink,
            }
        })
        .collect();

    let hosts: Vec<MecHost> = base_stations
        .iter()
        .map(|b| MecHost {
            id: b.id,
            served_sbs: vec![b.id],
            cpu_capacity: params.slice.cpu,
            storage_capacity: params.slice.storage,
            fronthaul_capacity: params.slice.fronthaul.unwrap_or(b.uplink_capacity),
        })
        .collect();
    let n_hosts = hosts.len();
    let backhaul_capacity: Vec<Vec<Option<f64>>> = (0..n_hosts)
        .map(|m1| {
            (0..n_hosts)
                .map(|m2| (m1 != m2).then_some(params.slice.backhaul))
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions: Vec<Point> = (0..params.terminals)
        .map(|_| Point::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side))
        .collect();
    let assoc = associate_terminals(&positions, &base_stations)?;

    let cell_index = |v: f64| ((v / cs).floor() as usize).min(dim - 1);
    let mut resources = Vec::new();
    let mut terminals = Vec::with_capacity(positions.len());
    for (t, (p, h)) in positions.into_iter().zip(assoc).enumerate() {
        let cell = cell_index(p.y) * dim + cell_index(p.x);
        let mut owned = Vec::new();
        for d in &params.data_types {
            for _ in 0..params.resources_per_type {
                owned.push(resources.len());
                resources.push(SensingResource {
                    id: resources.len(),
                    data_type: d.id,
                    cell,
                    terminal: t,
                });
            }
        }
        terminals.push(IoTTerminal {
            id: t,
            position: p,
            resources: owned,
            associated_sbs: h,
        });
    }

    let c = &params.cost;
    let mut cost_model = CostModel {
        c_bw1: c.c_bw1,
        c_bw2: c.c_bw2,
        c_cpu: c.c_cpu,
        c_mem: c.c_mem,
        gamma: 1.0,
    };
    cost_model.gamma = match c.gamma {
        Some(g) => g,
        None => default_gamma(max_edge_cost(&cost_model, &base_stations, &hosts, &backhaul_capacity)),
    };

    Scenario::from_parts(ScenarioParts {
        cells,
        data_types: params.data_types.clone(),
        resources,
        terminals,
        base_stations,
        hosts,
        backhaul_capacity,
        cost_model,
        area_side: side,
        cell_side: cs,
        rng_seed: seed,
    })
    .map_err(|e| Error::Generation(e.to_string()))
}

/// 0.9 / J_edge^max: one more admitted service always outweighs any cost.
pub(crate) fn default_gamma(max_cost: f64) -> f64 {
    if max_cost > 0.0 {
        0.9 / max_cost
    } else {
        1.0
    }
}
