//! Allocation policies: the relaxation-guided rounding heuristic (LR), the
//! greedy first-fit and best-fit benchmarks, the stream-processing inspired
//! DSP placement, an exact policy on top of branch-and-bound, and the
//! reject-cause classifier shared by all of them.

mod greedy;
mod lr;
mod state;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use greedy::{dsp_place, greedy_best_fit, greedy_first_fit};
pub use lr::{allocate_sensors, lr_round, RelaxedValues};
pub use state::{classify_reject, HostScope, PolicyState};

use crate::exact::{branch_and_bound_with, BnbOptions, BnbStatus};
use crate::lpcore::{relax, solve_program, LpOptions};
use crate::model::{build_milp, compute_flows, objective, Allocation, Objective};
use crate::scenario::{Scenario, ServiceRequest};

/// Default cut-off on relaxed values below which LR ignores an assignment.
pub const DEFAULT_MU: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RejectCause {
    Cpu,
    Storage,
    Fronthaul,
    Backhaul,
}

impl RejectCause {
    pub const ALL: [RejectCause; 4] = [RejectCause::Cpu, RejectCause::Storage, RejectCause::Fronthaul, RejectCause::Backhaul];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "cause", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Deployed,
    Rejected(RejectCause),
}

/// Work counters: host placement tests and resource activation tests, in
/// total and the largest number spent on a single service.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub host_tests: usize,
    pub resource_tests: usize,
    pub max_host_tests: usize,
    pub max_resource_tests: usize,
}

impl OpCounters {
    pub(crate) fn note_host_tests(&mut self, n: usize) {
        self.host_tests += n;
        self.max_host_tests = self.max_host_tests.max(n);
    }

    pub(crate) fn note_resource_tests(&mut self, n: usize) {
        self.resource_tests += n;
        self.max_resource_tests = self.max_resource_tests.max(n);
    }
}

/// Search summary of the exact policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactSummary {
    pub status: BnbStatus,
    pub best_bound: f64,
    pub gap: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub policy: String,
    pub allocation: Allocation,
    pub outcomes: Vec<Outcome>,
    pub objective: Objective,
    pub runtime_s: f64,
    pub ops: OpCounters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactSummary>,
}

impl PolicyReport {
    pub fn deployed(&self) -> usize {
        self.outcomes.iter().filter(|o| **o == Outcome::Deployed).count()
    }

    pub fn rejects(&self, cause: RejectCause) -> usize {
        self.outcomes.iter().filter(|o| **o == Outcome::Rejected(cause)).count()
    }
}

/// Builds the report of a finished run. Services without a recorded cause
/// are classified against the final state.
pub(crate) fn finish(policy: &str, state: PolicyState, causes: Vec<Option<RejectCause>>, start: Instant) -> PolicyReport {
    let runtime_s = start.elapsed().as_secs_f64();
    let outcomes = (0..state.req.len())
        .map(|j| {
            if state.alloc.is_placed(j) {
                Outcome::Deployed
            } else {
                let c = causes[j].unwrap_or_else(|| classify_reject(&state, j).expect("service is not placed"));
                Outcome::Rejected(c)
            }
        })
        .collect();
    PolicyReport {
        policy: policy.to_string(),
        objective: objective(state.s, state.req, &state.alloc, &compute_flows(state.s, state.req, &state.alloc)),
        allocation: state.alloc,
        outcomes,
        runtime_s,
        ops: state.ops,
        exact: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Lr,
    Gff,
    Gbf,
    Dsp,
    Exact,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [PolicyKind::Lr, PolicyKind::Gff, PolicyKind::Gbf, PolicyKind::Dsp, PolicyKind::Exact];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Lr => "lr",
            PolicyKind::Gff => "gff",
            PolicyKind::Gbf => "gbf",
            PolicyKind::Dsp => "dsp",
            PolicyKind::Exact => "exact",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyParams {
    pub mu: f64,
    pub seed: u64,
    /// Wall-clock budget of the exact policy's search.
    pub exact_budget: Duration,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            mu: DEFAULT_MU,
            seed: 0,
            exact_budget: Duration::from_secs(60),
        }
    }
}

/// LR from scratch: solves the relaxation, then rounds. The reported runtime
/// covers both steps.
pub fn run_lr(s: &Scenario, req: &[ServiceRequest], mu: f64, seed: u64) -> PolicyReport {
    let start = Instant::now();
    let relaxed = solve_program(&relax(&build_milp(s, req)).lp, &LpOptions::default());
    let mut rep = lr_round(s, req, &relaxed, mu, seed);
    rep.runtime_s = start.elapsed().as_secs_f64();
    rep
}

/// Branch-and-bound seeded with the LR allocation. Rejects are classified
/// against the final allocation.
pub fn run_exact(s: &Scenario, req: &[ServiceRequest], mu: f64, seed: u64, budget: Duration) -> PolicyReport {
    let start = Instant::now();
    let model = build_milp(s, req);
    let relaxed = solve_program(&relax(&model).lp, &LpOptions::default());
    let warm = lr_round(s, req, &relaxed, mu, seed);
    let left = budget.saturating_sub(start.elapsed());
    let bnb = branch_and_bound_with(
        &model,
        &BnbOptions {
            time_budget: Some(left),
            warm_start: Some(warm.allocation),
            ..BnbOptions::default()
        },
    );
    let state = PolicyState::from_allocation(s, req, bnb.incumbent, HostScope::All);
    let mut rep = finish("exact", state, vec![None; req.len()], start);
    rep.exact = Some(ExactSummary {
        status: bnb.status,
        best_bound: bnb.best_bound,
        gap: bnb.gap,
        nodes: bnb.nodes_explored,
    });
    rep
}

pub fn run_policy(kind: PolicyKind, s: &Scenario, req: &[ServiceRequest], p: &PolicyParams) -> PolicyReport {
    match kind {
        PolicyKind::Lr => run_lr(s, req, p.mu, p.seed),
        PolicyKind::Gff => greedy_first_fit(s, req, p.seed),
        PolicyKind::Gbf => greedy_best_fit(s, req, p.seed),
        PolicyKind::Dsp => dsp_place(s, req),
        PolicyKind::Exact => run_exact(s, req, p.mu, p.seed, p.exact_budget),
    }
}
