use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{OpCounters, RejectCause};
use crate::model::{compute_flows, Allocation, FlowLedger};
use crate::scenario::{Scenario, ServiceRequest};
use crate::{Error, Result};

/// Relative slack on capacity tests, far below the checker tolerance.
const FIT_TOL: f64 = 1e-9;

pub(crate) fn fits(used: f64, add: f64, cap: f64) -> bool {
    used + add <= cap + FIT_TOL * cap.abs().max(1.0)
}

/// Which hosts a policy would consider for a service; the reject classifier
/// runs its placement tests on the same set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HostScope {
    All,
    /// Only the host receiving the largest share of the service's streams.
    MaxCoverage,
}

/// Tentative per-link increments of one service's streams.
#[derive(Debug, Clone, Default)]
pub(crate) struct Delta {
    /// Chosen resource per scope cell, in scope order.
    pub chosen: Vec<usize>,
    /// New sampling rate of every touched resource.
    pub rates: BTreeMap<usize, f64>,
    pub uplink: BTreeMap<usize, f64>,
    pub fronthaul: BTreeMap<usize, f64>,
}

/// Working state of an allocation policy: the partial allocation, its
/// resource ledgers, the tested services and the run's random stream.
#[derive(Debug, Clone)]
pub struct PolicyState<'a> {
    pub s: &'a Scenario,
    pub req: &'a [ServiceRequest],
    pub alloc: Allocation,
    /// Always equal to `compute_flows(s, req, &alloc)`.
    pub ledger: FlowLedger,
    pub tested: Vec<bool>,
    pub rng: ChaCha8Rng,
    pub ops: OpCounters,
    pub scope: HostScope,
}

impl<'a> PolicyState<'a> {
    pub fn new(s: &'a Scenario, req: &'a [ServiceRequest], seed: u64, scope: HostScope) -> Self {
        PolicyState {
            s,
            req,
            alloc: Allocation::empty(s.n_resources(), s.n_hosts(), req.len()),
            ledger: FlowLedger::zero(s.n_sbs(), s.n_hosts()),
            tested: vec![false; req.len()],
            rng: ChaCha8Rng::seed_from_u64(seed),
            ops: OpCounters::default(),
            scope,
        }
    }

    /// State of an arbitrary allocation, for classifying its rejects.
    pub fn from_allocation(s: &'a Scenario, req: &'a [ServiceRequest], alloc: Allocation, scope: HostScope) -> Self {
        let mut st = Self::new(s, req, 0, scope);
        st.alloc = alloc;
        st.refresh();
        st.tested.fill(true);
        st
    }

    pub(crate) fn refresh(&mut self) {
        self.ledger = compute_flows(self.s, self.req, &self.alloc);
    }

    /// Whether host `m` has compute and storage room for service `j`.
    pub fn edge_fits(&self, m: usize, j: usize) -> bool {
        self.cpu_fits(m, j) && self.storage_fits(m, j)
    }

    fn cpu_fits(&self, m: usize, j: usize) -> bool {
        fits(self.ledger.cpu[m], self.req[j].cpu_demand, self.s.hosts[m].cpu_capacity)
    }

    fn storage_fits(&self, m: usize, j: usize) -> bool {
        let foot = self.s.storage_footprint(&self.req[j]);
        fits(self.ledger.storage[m], foot, self.s.hosts[m].storage_capacity)
    }

    /// Adds resource `i` serving service `j` to `d` if the new sampling rate
    /// respects the uplink and, when `fronthaul` is set, the fronthaul
    /// capacity.
    pub(crate) fn try_stream(&self, d: &mut Delta, i: usize, j: usize, fronthaul: bool) -> bool {
        let s = self.s;
        let cur = d.rates.get(&i).copied().unwrap_or(self.alloc.f[i]);
        let rate = cur.max(self.req[j].frequency);
        let inc = (rate - cur) * s.payload_of(i);
        let h = s.sbs_of(i);
        let hm = s.host_of(i);
        let up = d.uplink.get(&h).copied().unwrap_or(0.0);
        if !fits(self.ledger.uplink[h] + up, inc, s.base_stations[h].uplink_capacity) {
            return false;
        }
        let fh = d.fronthaul.get(&hm).copied().unwrap_or(0.0);
        if fronthaul && !fits(self.ledger.fronthaul[hm] + fh, inc, s.hosts[hm].fronthaul_capacity) {
            return false;
        }
        d.chosen.push(i);
        d.rates.insert(i, rate);
        *d.uplink.entry(h).or_insert(0.0) += inc;
        *d.fronthaul.entry(hm).or_insert(0.0) += inc;
        true
    }

    /// Backhaul increments towards `m` of `j`'s streams, per source host.
    pub(crate) fn backhaul_delta(&self, chosen: &[usize], m: usize, j: usize) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for &i in chosen {
            let m1 = self.s.host_of(i);
            if m1 != m {
                *out.entry(m1).or_insert(0.0) += self.req[j].frequency * self.s.payload_of(i);
            }
        }
        out
    }

    pub(crate) fn backhaul_fits(&self, inc: &BTreeMap<usize, f64>, m: usize) -> bool {
        inc.iter()
            .all(|(&m1, &v)| fits(self.ledger.backhaul[m1][m], v, self.s.backhaul(m1, m)))
    }

    pub(crate) fn fronthaul_fits(&self, d: &Delta) -> bool {
        d.fronthaul
            .iter()
            .all(|(&m, &v)| fits(self.ledger.fronthaul[m], v, self.s.hosts[m].fronthaul_capacity))
    }

    /// Places `j` on `m` with the streams of `d` and refreshes the ledgers.
    pub(crate) fn commit(&mut self, m: usize, j: usize, d: &Delta) {
        self.alloc.y[m][j] = true;
        self.alloc.x[j] = d.chosen.iter().copied().collect();
        for (&i, &r) in &d.rates {
            self.alloc.f[i] = r;
        }
        self.refresh();
    }

    /// Lowest-id resource per scope cell whose activation respects the
    /// uplink capacity, scope cells ascending.
    pub(crate) fn greedy_cover(&mut self, j: usize, fronthaul: bool) -> Option<Delta> {
        let r = &self.req[j];
        let mut cells = r.scope.clone();
        cells.sort_unstable();
        let mut d = Delta::default();
        let mut tests = 0;
        for k in cells {
            let mut ok = false;
            for &i in self.s.resources_in(r.data_type, k) {
                tests += 1;
                if self.try_stream(&mut d, i, j, fronthaul) {
                    ok = true;
                    break;
                }
            }
            if !ok {
                self.ops.note_resource_tests(tests);
                return None;
            }
        }
        self.ops.note_resource_tests(tests);
        Some(d)
    }

    /// Hosts by descending share of the chosen streams they collect, then id.
    pub(crate) fn rank_hosts(&self, chosen: &[usize]) -> Vec<usize> {
        let mut share = vec![0usize; self.s.n_hosts()];
        for &i in chosen {
            share[self.s.host_of(i)] += 1;
        }
        let mut hosts: Vec<usize> = (0..self.s.n_hosts()).collect();
        hosts.sort_by(|&a, &b| share[b].cmp(&share[a]).then(a.cmp(&b)));
        hosts
    }

    /// Whether `j` fits on `m` with the streams of `d`: compute, storage,
    /// fronthaul and backhaul.
    pub(crate) fn host_fits(&self, m: usize, j: usize, d: &Delta) -> bool {
        self.edge_fits(m, j) && self.fronthaul_fits(d) && self.backhaul_fits(&self.backhaul_delta(&d.chosen, m, j), m)
    }
}

/// Leading cause of rejecting service `j` under `state`: no candidate host
/// with compute room gives `Cpu`, then no host with storage room gives
/// `Storage`; if some host can take it but its scope cannot be covered
/// within the uplink and fronthaul capacities the cause is `Fronthaul`,
/// otherwise `Backhaul`.
pub fn classify_reject(state: &PolicyState, j: usize) -> Result<RejectCause> {
    if state.alloc.is_placed(j) {
        return Err(Error::Contract(format!("service {j} is deployed")));
    }
    let mut probe = state.clone();
    let cover = probe.greedy_cover(j, true);
    let hosts: Vec<usize> = match (state.scope, &cover) {
        (HostScope::MaxCoverage, Some(d)) => state.rank_hosts(&d.chosen).into_iter().take(1).collect(),
        _ => (0..state.s.n_hosts()).collect(),
    };
    if !hosts.iter().any(|&m| state.edge_fits(m, j)) {
        let any_cpu = hosts.iter().any(|&m| state.cpu_fits(m, j));
        let any_sto = hosts.iter().any(|&m| state.storage_fits(m, j));
        return Ok(if !any_cpu || any_sto { RejectCause::Cpu } else { RejectCause::Storage });
    }
    Ok(if cover.is_none() { RejectCause::Fronthaul } else { RejectCause::Backhaul })
}
