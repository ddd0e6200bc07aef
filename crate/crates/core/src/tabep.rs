//! Totally asymmetric Brownian exclusion: particle trajectories built by
//! one-sided reflection off the particle on the left.

use crate::error::{Error, Result};
use crate::path::{Environment, SampledPath};
use crate::scalar::Real;

/// Reflected trajectory plus, per grid point, the maximising `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reflection<T> {
    pub path: SampledPath<T>,
    pub argmax: Vec<usize>,
    pub window_start: usize,
}

impl<T: Real> Reflection<T> {
    /// Points `j >= from`, more than one step inside the window, whose
    /// maximiser sits within one step of the window start.
    pub fn boundary_hits(&self, from: usize) -> usize {
        let edge = self.window_start + 1;
        (from.max(edge + 1)..self.argmax.len())
            .filter(|&j| self.argmax[j] <= edge)
            .count()
    }
}

/// `X(x) = max_{y ∈ [window_start, x]} { X_prev(y) + B(x) − B(y) }`.
/// Left of the window `X = X_prev`.
pub fn reflect<T: Real>(
    prev: &SampledPath<T>,
    b: &SampledPath<T>,
    window_start: usize,
) -> Result<Reflection<T>> {
    prev.same_grid(b)?;
    let m = prev.grid().len();
    if window_start >= m {
        return Err(Error::EmptyWindow {
            start: window_start,
            end: m - 1,
        });
    }
    let xp = prev.values();
    let bv = b.values();
    let mut out = xp.to_vec();
    let mut argmax: Vec<usize> = (0..m).collect();
    let mut best = xp[window_start] - bv[window_start];
    let mut arg = window_start;
    for j in window_start..m {
        let cand = xp[j] - bv[j];
        if cand >= best {
            best = cand;
            arg = j;
        }
        out[j] = (best + bv[j]).max(xp[j]);
        argmax[j] = arg;
    }
    Ok(Reflection {
        path: SampledPath::new(*prev.grid(), out)?,
        argmax,
        window_start,
    })
}

/// Leftmost particle `X^(0)`, its drift and the reflected trajectories
/// `X^(1..=n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem<T> {
    mu: T,
    window_start: usize,
    trajectories: Vec<SampledPath<T>>,
    argmax: Vec<Vec<usize>>,
}

impl<T: Real> ParticleSystem<T> {
    pub fn mu(&self) -> T {
        self.mu
    }

    /// Number of reflected particles.
    pub fn levels(&self) -> usize {
        self.trajectories.len() - 1
    }

    /// `X^(k)`, with `X^(0)` the leftmost particle.
    pub fn particle(&self, k: usize) -> &SampledPath<T> {
        &self.trajectories[k]
    }

    pub fn window_start(&self) -> usize {
        self.window_start
    }

    /// Grid points where `X^(k−1) > X^(k)`, summed over levels.
    pub fn ordering_violations(&self) -> usize {
        self.trajectories
            .windows(2)
            .map(|w| {
                w[0].values()
                    .iter()
                    .zip(w[1].values())
                    .filter(|(a, b)| a > b)
                    .count()
            })
            .sum()
    }

    /// Recomputes `X^(k)` from the stored `X^(k−1)` and line `k` only.
    pub fn rebuild_level(&self, env: &Environment<T>, k: usize) -> Result<SampledPath<T>> {
        if k == 0 || k > self.levels() {
            return Err(Error::InvalidParameter(format!(
                "level {k} outside 1..={}",
                self.levels()
            )));
        }
        Ok(reflect(&self.trajectories[k - 1], env.line(k), self.window_start)?.path)
    }

    /// Boundary hits over every level, counted from index `from`.
    pub fn boundary_hits(&self, from: usize) -> usize {
        let edge = self.window_start + 1;
        self.argmax
            .iter()
            .map(|a| {
                (from.max(edge + 1)..a.len())
                    .filter(|&j| a[j] <= edge)
                    .count()
            })
            .sum()
    }

    /// `X^(k)(x) − X^(k)(0) − μx` at every grid point.
    pub fn centered(&self, k: usize) -> SampledPath<T> {
        let p = &self.trajectories[k];
        let g = *p.grid();
        let x0 = p.at_origin();
        let values = p
            .values()
            .iter()
            .enumerate()
            .map(|(j, &v)| v - x0 - self.mu * g.point(j))
            .collect();
        SampledPath::new(g, values).expect("same grid")
    }
}

/// Applies `n` reflections with lines `B^(1..=n)` of `env`.
pub fn run_tabep<T: Real>(
    x0: &SampledPath<T>,
    mu: T,
    env: &Environment<T>,
    n: usize,
    window_start: usize,
) -> Result<ParticleSystem<T>> {
    if x0.grid() != env.grid() {
        return Err(Error::GridMismatch);
    }
    if n > env.levels() {
        return Err(Error::InvalidParameter(format!(
            "{n} particles requested, environment has {} lines",
            env.levels()
        )));
    }
    if window_start >= x0.grid().len() {
        return Err(Error::EmptyWindow {
            start: window_start,
            end: x0.grid().len() - 1,
        });
    }
    let mut trajectories = Vec::with_capacity(n + 1);
    let mut argmax = Vec::with_capacity(n);
    trajectories.push(x0.clone());
    for k in 1..=n {
        let r = reflect(&trajectories[k - 1], env.line(k), window_start)?;
        trajectories.push(r.path);
        argmax.push(r.argmax);
    }
    Ok(ParticleSystem {
        mu,
        window_start,
        trajectories,
        argmax,
    })
}
