//! Exact optimum of the allocation program: LP-bounded branch-and-bound over
//! the placement and assignment binaries, and an exhaustive enumeration
//! oracle for tiny instances.

mod bnb;
mod enumerate;

pub use bnb::{branch_and_bound, branch_and_bound_with, BnbOptions, BnbReport, BnbStatus};
pub use enumerate::{enumerate_optimum, MAX_CELL_CANDIDATES, MAX_PLACEMENT_SLOTS};
