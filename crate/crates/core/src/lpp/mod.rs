//! Semi-discrete Brownian last-passage percolation on a grid.
//!
//! A path from `(z, k)` to `(x, l)` runs along line `k` from `z` to a
//! breakpoint `z_1`, jumps to line `k + 1`, and so on; its weight is the sum
//! of the line increments it collects. Breakpoints are restricted to grid
//! points. The variational field `L_ν(x, n)` maximises `ν(z)` plus the
//! passage time from `(z, 1)` to `(x, n)`; its rightmost maximiser is the
//! exit point `Z_ν(x, n)`.

mod field;
pub mod lemmas;
mod passage;
mod shape;
mod sweep;

pub use field::{
    couple, exit_points, markov_consistency, variational_field, CoupledFields, LppField,
};
pub use passage::{brute_lpp, lpp_point, passage_to, BRUTE_LIMIT};
pub use shape::{point_to_point, scaling_samples, shape_estimate, ShapeEstimate};
pub use sweep::{LevelRow, LevelSweep};
