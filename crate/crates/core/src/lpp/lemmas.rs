//! Exact grid inequalities relating coupled variational fields. Each check
//! counts the pairs it examined and the ones that fail by more than `tol`.

use super::passage::lpp_point;
use super::sweep::LevelRow;
use crate::error::Result;
use crate::path::Environment;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub checked: usize,
    pub violations: usize,
    /// Largest amount by which an inequality failed (0 when none did).
    pub worst_excess: f64,
}

impl Tally {
    pub fn merge(&mut self, other: Tally) {
        self.checked += other.checked;
        self.violations += other.violations;
        self.worst_excess = self.worst_excess.max(other.worst_excess);
    }

    fn record(&mut self, excess: f64) {
        self.checked += 1;
        if excess > 0.0 {
            self.violations += 1;
            self.worst_excess = self.worst_excess.max(excess);
        }
    }
}

/// Local comparison on one level: for every `x < y` with
/// `Z_1(y) <= Z_2(x)`, requires `L_1(x, y) <= L_2(x, y) + tol`.
pub fn local_comparison<T: Real>(first: LevelRow<'_, T>, second: LevelRow<'_, T>, tol: T) -> Tally {
    let mut tally = Tally::default();
    let m = first.values.len();
    for x in 0..m {
        for y in x + 1..m {
            if first.exits[y] <= second.exits[x] {
                let excess = first.increment(x, y) - second.increment(x, y) - tol;
                tally.record(excess.as_f64());
            }
        }
    }
    tally
}

/// Increment ordering: for every `x < y`, `f(y) − f(x) <= g(y) − g(x) + tol`.
/// Used both for the hypothesis on two profiles and for the conclusion on
/// the fields they generate.
pub fn increment_order<T: Real>(lower: &[T], upper: &[T], tol: T) -> Tally {
    let mut tally = Tally::default();
    let m = lower.len().min(upper.len());
    for x in 0..m {
        for y in x + 1..m {
            let excess = (lower[y] - lower[x]) - (upper[y] - upper[x]) - tol;
            tally.record(excess.as_f64());
        }
    }
    tally
}

/// Exit points must be non-decreasing along a level.
pub fn exit_monotonicity(exits: &[usize]) -> Tally {
    let mut tally = Tally::default();
    for w in exits.windows(2) {
        tally.record(if w[1] < w[0] {
            (w[0] - w[1]) as f64
        } else {
            0.0
        });
    }
    tally
}

/// Slack `L(from, to) − L(from, via) − L(via, to)`, which superadditivity
/// makes non-negative for any `via` between the endpoints.
pub fn superadditivity_slack<T: Real>(
    env: &Environment<T>,
    from: (usize, usize),
    via: (usize, usize),
    to: (usize, usize),
) -> Result<T> {
    Ok(lpp_point(env, from, to)? - lpp_point(env, from, via)? - lpp_point(env, via, to)?)
}

/// Sandwich bound on the gap between a profile's evolution and the
/// stationary one, over the window `[x, x_end]` of one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformControl<T> {
    /// `Z_−(x_end) <= Z_ν(x)` and `Z_ν(x_end) <= Z_+(x)`.
    pub event: bool,
    /// `max_{x <= j <= x_end} |M_ν(x, j) − M_1(x, j)|`.
    pub sup_diff: T,
    /// `M_+(x, x_end) − M_−(x, x_end)`.
    pub bound: T,
}

impl<T: Real> UniformControl<T> {
    /// The bound must hold whenever the exit-point event does.
    pub fn holds(&self, tol: T) -> bool {
        !self.event || self.sup_diff <= self.bound + tol
    }
}

/// Evaluates [`UniformControl`] for rows of four coupled fields: a general
/// profile `nu`, the drift-1 Brownian profile `one`, and the drift `1 ± δ`
/// profiles `plus` and `minus` sharing `one`'s Brownian motion.
pub fn uniform_control<T: Real>(
    nu: LevelRow<'_, T>,
    one: LevelRow<'_, T>,
    plus: LevelRow<'_, T>,
    minus: LevelRow<'_, T>,
    x: usize,
    x_end: usize,
) -> UniformControl<T> {
    let event = minus.exits[x_end] <= nu.exits[x] && nu.exits[x_end] <= plus.exits[x];
    let sup_diff = (x..=x_end)
        .map(|j| (nu.increment(x, j) - one.increment(x, j)).abs())
        .fold(T::zero(), T::max);
    let bound = plus.increment(x, x_end) - minus.increment(x, x_end);
    UniformControl {
        event,
        sup_diff,
        bound,
    }
}
