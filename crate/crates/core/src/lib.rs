//! Rao and Gilbert-Varshamov bounds for mixed-level orthogonal arrays.
//!
//! Both bounds are weighted counts of up/down paths: walk the `n` letters of
//! a row, an up-step inside block `i` multiplies the weight by `s_i - 1`, and
//! only paths with at most `T` up-steps are kept. The crate evaluates them
//!
//! * exactly, by composition sums, a lattice recursion and brute-force
//!   enumeration ([`exact`]);
//! * asymptotically, through the growth rate of a concave program
//!   ([`asymptotics`]);
//! * by importance sampling with the program's optimal per-block tilt
//!   ([`simulate`]).

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod exact;
pub mod model;
pub mod numeric;
pub mod simulate;

pub use asymptotics::{
    entropy, ld_estimate, optimal_tilt, prelimit_grid, solve_lambda, value_function, LdEstimate,
    TiltProfile,
};
pub use error::{Error, Result};
pub use exact::{brute_force_oracle, direct_bound, direct_op_count, dp_bound, dp_bound_log, BigCount};
pub use model::{ArraySpec, BoundKind, BoundTarget, GvVariant, ScaledParams};
pub use simulate::{is_estimate, optimality_diagnostic, weight_of_endpoint, IsConfig, IsResult};
