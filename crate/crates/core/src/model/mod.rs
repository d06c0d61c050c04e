//! Allocations, flow accounting, constraint checking, the objective, and the
//! linearized mixed-integer program.

mod feasibility;
mod flows;
mod lp_export;
mod milp;
mod objective;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use feasibility::{check_feasibility, extract_frequencies, Violation, ViolationKind, DEFAULT_TOL};
pub use flows::{compute_flows, compute_flows_with, BackhaulMode, FlowLedger};
pub use lp_export::{export_lp, write_lp};
pub use milp::{build_milp, Constraint, LinearProgram, MilpModel, Sense, VarKind, Variable, VariableRole};
pub use objective::{objective, Objective};

/// Decision triple: resource-to-service assignment `x`, service placement
/// `y` and per-resource sampling rates `f` (Hz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// `x[j]` holds the resources whose data feeds service `j`.
    pub x: Vec<BTreeSet<usize>>,
    /// `y[m][j]` is true when service `j` runs on host `m`.
    pub y: Vec<Vec<bool>>,
    pub f: Vec<f64>,
}

impl Allocation {
    pub fn empty(n_resources: usize, n_hosts: usize, n_services: usize) -> Self {
        Allocation {
            x: vec![BTreeSet::new(); n_services],
            y: vec![vec![false; n_services]; n_hosts],
            f: vec![0.0; n_resources],
        }
    }

    pub fn n_services(&self) -> usize {
        self.x.len()
    }

    /// First host running `j`, if any.
    pub fn host_of(&self, j: usize) -> Option<usize> {
        self.y.iter().position(|row| row[j])
    }

    pub fn is_placed(&self, j: usize) -> bool {
        self.y.iter().any(|row| row[j])
    }

    /// Number of (host, service) placements, i.e. J_r.
    pub fn placed_count(&self) -> usize {
        self.y.iter().map(|row| row.iter().filter(|v| **v).count()).sum()
    }
}
