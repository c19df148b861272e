//! Exact algorithms for just-in-time flow-shop scheduling, `Fm || Σ_{E} w_j`.
//!
//! Each job must complete on the last machine exactly at its due date or be
//! rejected; the goal is a feasible JIT set of maximum total weight.
//!
//! * [`model`]: instances, schedules, ASAP timing and exact verification.
//! * [`solver_xp`]: enumeration over at most one job per due date, for any
//!   `m >= 2`.
//! * [`solver_fpt`]: `O(n 2^k)` greedy solvers for two machines where `k`
//!   counts job types.
//! * [`oracle`]: brute-force scheduling and kSUM deciders used as ground
//!   truth.
//! * [`reductions`]: kSUM to scheduling constructions with their decision
//!   thresholds and witness schedules.

pub mod error;
pub mod model;
pub mod oracle;
pub mod reductions;
pub mod solver_fpt;
pub mod solver_xp;

pub use error::{Error, ErrorKind, Result};
pub use model::{
    asap_times, build_witness, edd_order, validate_instance, verify_schedule, Instance, Job,
    JobId, Schedule, SolveResult, SolveStats, Time, Verification, Violation, Weight,
};
pub use oracle::{solve_exhaustive, solve_ksum, KSumInstance};
pub use solver_fpt::{classify, solve_fpt_dp1, solve_fpt_dw, TypeMode};
pub use solver_xp::{due_classes, solve_xp};
