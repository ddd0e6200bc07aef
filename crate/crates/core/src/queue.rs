//! Single-node Brownian queue, its departure process and tandem composition.
//!
//! Suprema over `z <= x` are taken over the grid points of `[window_start, x]`.
//! The queue is therefore empty at the window start; cells whose last empty
//! time falls within one step of the window start are reported as boundary
//! hits so callers can tell truncated values from genuine ones.

use crate::error::{Error, Result};
use crate::path::{Environment, SampledPath};
use crate::scalar::Real;

/// `q = 0` detection threshold used when reading last-empty times.
pub const ZERO_TOLERANCE: f64 = 1e-9;

/// Queue-length path together with, per grid point, the last time the queue
/// was empty (the rightmost maximiser of `z ↦ a(z,x) − s(z,x)`).
#[derive(Debug, Clone, PartialEq)]
pub struct QueueLength<T> {
    path: SampledPath<T>,
    last_empty: Vec<usize>,
    window_start: usize,
}

impl<T: Real> QueueLength<T> {
    pub fn path(&self) -> &SampledPath<T> {
        &self.path
    }

    pub fn into_path(self) -> SampledPath<T> {
        self.path
    }

    /// Index of the last empty time at or before `j`.
    pub fn last_empty(&self, j: usize) -> usize {
        self.last_empty[j]
    }

    pub fn window_start(&self) -> usize {
        self.window_start
    }

    /// Number of points `j >= from` whose maximiser sits within one step of
    /// the window start (only points more than one step inside the window
    /// count).
    pub fn boundary_hits(&self, from: usize) -> usize {
        let edge = self.window_start + 1;
        (from.max(edge + 1)..self.last_empty.len())
            .filter(|&j| self.last_empty[j] <= edge)
            .count()
    }

    pub fn truncated_from(&self, from: usize) -> bool {
        self.boundary_hits(from) > 0
    }
}

/// `q(x) = max_{z ∈ [window_start, x]} { a(z,x) − s(z,x) }`.
///
/// Points left of `window_start` have an empty window apart from `z = x` and
/// get `q = 0`.
pub fn queue_length<T: Real>(
    a: &SampledPath<T>,
    s: &SampledPath<T>,
    window_start: usize,
) -> Result<QueueLength<T>> {
    a.same_grid(s)?;
    let m = a.grid().len();
    if window_start >= m {
        return Err(Error::EmptyWindow {
            start: window_start,
            end: m - 1,
        });
    }
    let net: Vec<T> = a
        .values()
        .iter()
        .zip(s.values())
        .map(|(&a, &s)| a - s)
        .collect();
    let mut q = vec![T::zero(); m];
    let mut last_empty: Vec<usize> = (0..m).collect();

    // a(z,x) − s(z,x) = net(x) − net(z): track the running minimum of net,
    // preferring the latest minimiser.
    let mut min = net[window_start];
    let mut arg = window_start;
    for j in window_start..m {
        if net[j] <= min {
            min = net[j];
            arg = j;
        }
        q[j] = net[j] - min;
        last_empty[j] = arg;
    }
    Ok(QueueLength {
        path: SampledPath::new(*a.grid(), q)?,
        last_empty,
        window_start,
    })
}

/// Departure process `d` with `d(0) = 0` and `d(x,y) = a(x,y) − q(x,y)`.
pub fn departure<T: Real>(a: &SampledPath<T>, q: &SampledPath<T>) -> Result<SampledPath<T>> {
    a.same_grid(q)?;
    let a0 = a.at_origin();
    let q0 = q.at_origin();
    let values = a
        .values()
        .iter()
        .zip(q.values())
        .map(|(&a, &q)| (a - a0) - (q - q0))
        .collect();
    SampledPath::new(*a.grid(), values)
}

/// Service process `s(x) = μx − B(x)`.
pub fn service<T: Real>(line: &SampledPath<T>, mu: T) -> SampledPath<T> {
    let grid = *line.grid();
    let values = line
        .values()
        .iter()
        .enumerate()
        .map(|(j, &b)| mu * grid.point(j) - b)
        .collect();
    SampledPath::new(grid, values).expect("same grid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueueNodeResult<T> {
    pub queue: QueueLength<T>,
    pub departure: SampledPath<T>,
}

/// One node: queue length and departures for arrival `a` and service `s`.
pub fn queue_node<T: Real>(
    a: &SampledPath<T>,
    s: &SampledPath<T>,
    window_start: usize,
) -> Result<QueueNodeResult<T>> {
    let queue = queue_length(a, s, window_start)?;
    let departure = departure(a, queue.path())?;
    Ok(QueueNodeResult { queue, departure })
}

/// Arrival process fed through `n` Brownian queues in series.
#[derive(Debug, Clone, PartialEq)]
pub struct TandemState<T> {
    arrival: SampledPath<T>,
    mu: T,
    services: Vec<SampledPath<T>>,
    nodes: Vec<QueueNodeResult<T>>,
}

impl<T: Real> TandemState<T> {
    pub fn arrival(&self) -> &SampledPath<T> {
        &self.arrival
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn levels(&self) -> usize {
        self.nodes.len()
    }

    /// Node `k`, 1-based.
    pub fn node(&self, k: usize) -> &QueueNodeResult<T> {
        &self.nodes[k - 1]
    }

    pub fn queue(&self, k: usize) -> &SampledPath<T> {
        self.nodes[k - 1].queue.path()
    }

    /// `d^(k)`; `d^(0)` is the arrival.
    pub fn departure(&self, k: usize) -> &SampledPath<T> {
        if k == 0 {
            &self.arrival
        } else {
            &self.nodes[k - 1].departure
        }
    }

    pub fn service(&self, k: usize) -> &SampledPath<T> {
        &self.services[k - 1]
    }

    /// Boundary hits summed over all nodes, counted from index `from`.
    pub fn boundary_hits(&self, from: usize) -> usize {
        self.nodes.iter().map(|n| n.queue.boundary_hits(from)).sum()
    }
}

/// Runs `n` nodes with services `s^(k)(x) = μx − B^(k)(x)` from `env`.
pub fn run_tandem<T: Real>(
    a: &SampledPath<T>,
    env: &Environment<T>,
    mu: T,
    n: usize,
    window_start: usize,
) -> Result<TandemState<T>> {
    if !(mu > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "service drift mu must be positive, got {mu}"
        )));
    }
    if n > env.levels() {
        return Err(Error::InvalidParameter(format!(
            "{n} nodes requested, environment has {} lines",
            env.levels()
        )));
    }
    if a.grid() != env.grid() {
        return Err(Error::GridMismatch);
    }
    let mut services = Vec::with_capacity(n);
    let mut nodes: Vec<QueueNodeResult<T>> = Vec::with_capacity(n);
    for k in 1..=n {
        let s = service(env.line(k), mu);
        let input = nodes.last().map_or(a, |node| &node.departure);
        let node = queue_node(input, &s, window_start)?;
        services.push(s);
        nodes.push(node);
    }
    Ok(TandemState {
        arrival: a.clone(),
        mu,
        services,
        nodes,
    })
}

/// Iterated last-empty times `[I_{n−1}, …, I_0]` from grid index `x`.
///
/// `I_{n−1}` is the last index `<= x` where `q^(n)` vanishes (within
/// [`ZERO_TOLERANCE`]); each `I_{k−1}` is the last zero of `q^(k)` at or
/// before `I_k`. The final entry is the queueing-side exit point. Reaching
/// the window start, where the queue is empty by construction, is a
/// truncation error.
pub fn iterated_empty_times<T: Real>(
    state: &TandemState<T>,
    x: usize,
    n: usize,
) -> Result<Vec<usize>> {
    if n == 0 || n > state.levels() {
        return Err(Error::InvalidParameter(format!(
            "level {n} outside 1..={}",
            state.levels()
        )));
    }
    state.arrival.grid().check_index(x)?;
    let tol = T::lit(ZERO_TOLERANCE);
    let mut times = Vec::with_capacity(n);
    let mut t = x;
    for k in (1..=n).rev() {
        let node = state.node(k);
        let start = node.queue.window_start();
        let q = node.queue.path().values();
        let found = (start..=t).rev().find(|&j| q[j] <= tol);
        match found {
            Some(j) if j > start => t = j,
            _ => {
                return Err(Error::Truncation(format!(
                    "queue {k} has no empty time in the window before index {t}"
                )))
            }
        }
        times.push(t);
    }
    Ok(times)
}
