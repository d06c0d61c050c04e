//! Joint service placement, sensing-resource activation and data routing for
//! IoT service providers running on a multi-access edge computing (MEC) slice.
//!
//! The crate is organised bottom-up:
//!
//! * [`scenario`] - the immutable world model (cells, terminals, base stations,
//!   MEC hosts, slice capacities), randomized generators and the JSON file format.
//! * [`model`] - allocations, flow accounting, constraint checking, the
//!   objective and the mixed-integer linear program with its LP-format export.
//! * [`lpcore`] - a bounded-variable primal simplex for the linear relaxation.
//! * [`exact`] - branch-and-bound over the binaries plus an enumeration oracle.
//! * [`policies`] - the relaxation-guided rounding heuristic and three
//!   benchmark policies, with the reject-cause classifier.
//! * [`harness`] - experiment sweeps, CSV reporting and the command line.
//!
//! All quantities use one unit system: bits, bits/second, Hz and cycles/second.
//! See [`scenario::units`] for the conversion constants.

pub mod error;
pub mod exact;
pub mod harness;
pub mod lpcore;
pub mod model;
pub mod policies;
pub mod scenario;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
