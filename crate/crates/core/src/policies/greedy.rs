use std::time::Instant;

use rand::seq::SliceRandom;

use super::state::{HostScope, PolicyState};
use super::{classify_reject, finish, PolicyReport, RejectCause};
use crate::scenario::{Scenario, ServiceRequest};

/// Shared loop of the benchmark policies: services in the given order, the
/// greedy resource pick per cell, then the first host of `hosts` that fits.
fn place_in_order<'a>(
    name: &str,
    mut state: PolicyState<'a>,
    order: &[usize],
    hosts: impl Fn(&PolicyState<'a>, usize, &[usize]) -> Vec<usize>,
    start: Instant,
) -> PolicyReport {
    let mut causes: Vec<Option<RejectCause>> = vec![None; state.req.len()];
    for &j in order {
        let mut placed = false;
        if let Some(d) = state.greedy_cover(j, false) {
            let mut tests = 0;
            for m in hosts(&state, j, &d.chosen) {
                tests += 1;
                if state.host_fits(m, j, &d) {
                    state.commit(m, j, &d);
                    placed = true;
                    break;
                }
            }
            state.ops.note_host_tests(tests);
        }
        if !placed {
            causes[j] = Some(classify_reject(&state, j).expect("service is not placed"));
        }
        state.tested[j] = true;
    }
    finish(name, state, causes, start)
}

fn shuffled(n: usize, state: &mut PolicyState) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut state.rng);
    order
}

/// Greedy first-fit: services in seeded random order; each cell takes its
/// lowest-id resource within the uplink capacity; the service is tried only
/// on the host collecting most of its streams (lowest id on ties).
pub fn greedy_first_fit(s: &Scenario, req: &[ServiceRequest], seed: u64) -> PolicyReport {
    let start = Instant::now();
    let mut state = PolicyState::new(s, req, seed, HostScope::MaxCoverage);
    let order = shuffled(req.len(), &mut state);
    place_in_order("gff", state, &order, |st, _, chosen| st.rank_hosts(chosen).into_iter().take(1).collect(), start)
}

/// Greedy best-fit: as first-fit, but hosts are tried in descending order of
/// the share of streams they collect until one fits. The service order uses
/// the same seed as first-fit, so paired runs see the same sequence.
pub fn greedy_best_fit(s: &Scenario, req: &[ServiceRequest], seed: u64) -> PolicyReport {
    let start = Instant::now();
    let mut state = PolicyState::new(s, req, seed, HostScope::All);
    let order = shuffled(req.len(), &mut state);
    place_in_order("gbf", state, &order, |st, _, chosen| st.rank_hosts(chosen), start)
}

/// Data-stream placement: services by ascending requested traffic
/// `frequency * payload * |scope|` (lowest id on ties), resources picked as
/// in the greedy policies, and each service on the fitting host with the
/// least added host-to-host traffic.
pub fn dsp_place(s: &Scenario, req: &[ServiceRequest]) -> PolicyReport {
    let start = Instant::now();
    let state = PolicyState::new(s, req, 0, HostScope::All);
    let traffic = |j: usize| req[j].frequency * s.data_types[req[j].data_type].payload * req[j].scope.len() as f64;
    let mut order: Vec<usize> = (0..req.len()).collect();
    order.sort_by(|&a, &b| traffic(a).total_cmp(&traffic(b)).then(a.cmp(&b)));
    let by_usage = |st: &PolicyState, j: usize, chosen: &[usize]| {
        let mut hosts: Vec<(usize, f64)> = (0..s.n_hosts())
            .map(|m| (m, st.backhaul_delta(chosen, m, j).values().sum::<f64>()))
            .collect();
        hosts.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        hosts.into_iter().map(|(m, _)| m).collect()
    };
    place_in_order("dsp", state, &order, by_usage, start)
}
