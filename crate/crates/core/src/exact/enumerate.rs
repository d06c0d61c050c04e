use crate::model::{check_feasibility, compute_flows, extract_frequencies, objective, Allocation, DEFAULT_TOL};
use crate::scenario::{Scenario, ServiceRequest};
use crate::{Error, Result};

/// Largest `hosts * services` accepted by [`enumerate_optimum`].
pub const MAX_PLACEMENT_SLOTS: usize = 8;
/// Largest number of eligible resources per scope cell.
pub const MAX_CELL_CANDIDATES: usize = 3;

type Key = (Vec<bool>, Vec<bool>);

struct Search<'a> {
    s: &'a Scenario,
    req: &'a [ServiceRequest],
    /// `host[j]`: `Some(m)` when placed.
    host: Vec<Option<usize>>,
    a: Allocation,
    best: Option<(Allocation, f64, Key)>,
}

impl Search<'_> {
    fn key(&self, a: &Allocation) -> Key {
        let y = a.y.iter().flatten().copied().collect();
        let x = a
            .x
            .iter()
            .flat_map(|xs| (0..self.s.n_resources()).map(move |i| xs.contains(&i)))
            .collect();
        (y, x)
    }

    fn consider(&mut self) {
        let (s, req) = (self.s, self.req);
        let mut a = self.a.clone();
        a.f = extract_frequencies(req, &a.x, s.n_resources());
        if !check_feasibility(s, req, &a, DEFAULT_TOL).is_empty() {
            return;
        }
        let j = objective(s, req, &a, &compute_flows(s, req, &a)).j;
        let replace = match &self.best {
            None => true,
            Some((_, bj, bkey)) => j > bj + 1e-12 || ((j - bj).abs() <= 1e-12 && self.key(&a) < *bkey),
        };
        if replace {
            let key = self.key(&a);
            self.best = Some((a, j, key));
        }
    }

    /// Chooses one resource for each scope cell of each placed service,
    /// starting at service `j`, cell position `c`.
    fn cover(&mut self, j: usize, c: usize) {
        if j == self.req.len() {
            self.consider();
            return;
        }
        let r = &self.req[j];
        if self.host[j].is_none() || c == r.scope.len() {
            self.cover(j + 1, 0);
            return;
        }
        let cands = self.s.resources_in(r.data_type, r.scope[c]);
        for &i in cands {
            let fresh = self.a.x[j].insert(i);
            self.cover(j, c + 1);
            if fresh {
                self.a.x[j].remove(&i);
            }
        }
    }

    fn place(&mut self, j: usize, cpu: &mut [f64], sto: &mut [f64]) {
        let (s, req) = (self.s, self.req);
        if j == req.len() {
            self.cover(0, 0);
            return;
        }
        self.host[j] = None;
        self.place(j + 1, cpu, sto);
        let r = &req[j];
        let coverable = r.scope.iter().all(|&k| !s.resources_in(r.data_type, k).is_empty());
        if !coverable {
            return;
        }
        for m in 0..s.n_hosts() {
            let h = &s.hosts[m];
            let foot = s.storage_footprint(r);
            let fits = |used: f64, add: f64, cap: f64| used + add <= cap + DEFAULT_TOL * cap.max(1.0);
            if !fits(cpu[m], r.cpu_demand, h.cpu_capacity) || !fits(sto[m], foot, h.storage_capacity) {
                continue;
            }
            cpu[m] += r.cpu_demand;
            sto[m] += foot;
            self.host[j] = Some(m);
            self.a.y[m][j] = true;
            self.place(j + 1, cpu, sto);
            self.a.y[m][j] = false;
            self.host[j] = None;
            cpu[m] -= r.cpu_demand;
            sto[m] -= foot;
        }
    }
}

/// Exhaustive optimum over every admission subset, placement and per-cell
/// resource choice, with frequencies from [`extract_frequencies`]. Among
/// allocations within 1e-12 of the best objective, the one with the
/// lexicographically smallest `(y, x)` is returned, where `y` is flattened
/// host-major and `x` service-major as 0/1 vectors.
///
/// Only instances with at most [`MAX_PLACEMENT_SLOTS`] host-service pairs and
/// [`MAX_CELL_CANDIDATES`] eligible resources per scope cell are accepted.
pub fn enumerate_optimum(s: &Scenario, req: &[ServiceRequest]) -> Result<(Allocation, f64)> {
    let slots = s.n_hosts() * req.len();
    if slots > MAX_PLACEMENT_SLOTS {
        return Err(Error::TooLarge(format!(
            "{slots} host-service pairs (limit {MAX_PLACEMENT_SLOTS})"
        )));
    }
    for r in req {
        for &k in &r.scope {
            let n = s.resources_in(r.data_type, k).len();
            if n > MAX_CELL_CANDIDATES {
                return Err(Error::TooLarge(format!(
                    "service {} has {n} candidate resources in cell {k} (limit {MAX_CELL_CANDIDATES})",
                    r.id
                )));
            }
        }
    }
    let mut search = Search {
        s,
        req,
        host: vec![None; req.len()],
        a: Allocation::empty(s.n_resources(), s.n_hosts(), req.len()),
        best: None,
    };
    let mut cpu = vec![0.0; s.n_hosts()];
    let mut sto = vec![0.0; s.n_hosts()];
    search.place(0, &mut cpu, &mut sto);
    let (a, j, _) = search.best.expect("the empty allocation is always feasible");
    Ok((a, j))
}
