//! Uniform grids, sampled continuous paths and the random inputs built on
//! them: two-sided Brownian motions, environments of independent lines and
//! initial profiles.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seed;

/// Uniform grid `z_j = (j - zero) * step`, `j = 0..len`, which always
/// contains the origin as the point with index `zero`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    step: T,
    zero: usize,
    len: usize,
}

impl<T: Real> Grid<T> {
    /// Grid starting at `z_min` (a non-positive multiple of `step`) with
    /// `len` points. The origin must be among them.
    pub fn new(z_min: T, step: T, len: usize) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "step must be positive, got {step}"
            )));
        }
        if len < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {len}"
            )));
        }
        let ratio = (-z_min / step).as_f64();
        let zero = ratio.round();
        if zero < 0.0 || (ratio - zero).abs() > 1e-6 * ratio.abs().max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "z_min = {z_min} is not a non-positive multiple of step {step}"
            )));
        }
        let zero = zero as usize;
        if zero >= len {
            return Err(Error::InvalidGrid(format!(
                "origin not covered: z_min = {z_min}, {len} points"
            )));
        }
        Ok(Grid { step, zero, len })
    }

    /// Smallest grid with the given step covering `[left, right]`, where
    /// `left <= 0 <= right`. Endpoints within a millionth of a step of a
    /// grid point are not widened.
    pub fn covering(left: T, right: T, step: T) -> Result<Self> {
        if !(step > T::zero()) {
            return Err(Error::InvalidGrid(format!(
                "step must be positive, got {step}"
            )));
        }
        if left > T::zero() || right < T::zero() {
            return Err(Error::InvalidGrid(format!(
                "window [{left}, {right}] must contain 0"
            )));
        }
        let below = ((-left / step).as_f64() - 1e-6).ceil().max(0.0) as usize;
        let above = ((right / step).as_f64() - 1e-6).ceil().max(0.0) as usize;
        Ok(Grid {
            step,
            zero: below,
            len: (below + above + 1).max(2),
        })
    }

    #[inline]
    pub fn step(&self) -> T {
        self.step
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Index of the origin.
    #[inline]
    pub fn zero_index(&self) -> usize {
        self.zero
    }

    #[inline]
    pub fn point(&self, j: usize) -> T {
        T::lit(j as f64 - self.zero as f64) * self.step
    }

    pub fn first(&self) -> T {
        self.point(0)
    }

    pub fn last(&self) -> T {
        self.point(self.len - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len).map(move |j| self.point(j))
    }

    /// Index of the grid point equal to `x`.
    pub fn index_of(&self, x: T) -> Result<usize> {
        let r = (x / self.step).as_f64() + self.zero as f64;
        let j = r.round();
        let tol = 1e-3 + 64.0 * T::epsilon().as_f64() * r.abs();
        if !r.is_finite() || (r - j).abs() > tol || j < 0.0 || j as usize >= self.len {
            return Err(Error::OffGrid(x.as_f64()));
        }
        Ok(j as usize)
    }

    pub fn check_index(&self, j: usize) -> Result<usize> {
        if j < self.len {
            Ok(j)
        } else {
            Err(Error::IndexOutOfRange {
                index: j,
                len: self.len,
            })
        }
    }

    /// Same grid in another scalar type.
    pub fn cast<U: Real>(&self) -> Grid<U> {
        Grid {
            step: U::lit(self.step.as_f64()),
            zero: self.zero,
            len: self.len,
        }
    }
}

/// A real path known at the points of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> SampledPath<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(SampledPath { grid, values })
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> T) -> Self {
        let values = grid.points().map(f).collect();
        SampledPath { grid, values }
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        SampledPath {
            grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    /// `x ↦ slope * x`.
    pub fn linear(grid: Grid<T>, slope: T) -> Self {
        Self::from_fn(grid, |x| slope * x)
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn value(&self, j: usize) -> T {
        self.values[j]
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Value at the grid point `x`.
    pub fn at(&self, x: T) -> Result<T> {
        Ok(self.values[self.grid.index_of(x)?])
    }

    /// `f(x, y) = f(y) - f(x)` for grid points `x`, `y`.
    pub fn increment(&self, x: T, y: T) -> Result<T> {
        let i = self.grid.index_of(x)?;
        let j = self.grid.index_of(y)?;
        Ok(self.increment_idx(i, j))
    }

    #[inline]
    pub fn increment_idx(&self, i: usize, j: usize) -> T {
        self.values[j] - self.values[i]
    }

    /// Value at the origin.
    pub fn at_origin(&self) -> T {
        self.values[self.grid.zero]
    }

    pub fn is_anchored(&self) -> bool {
        self.at_origin() == T::zero()
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Pointwise `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(SampledPath {
            grid: self.grid,
            values,
        })
    }

    /// Shifts the path so that it vanishes at the origin.
    pub fn anchored(mut self) -> Self {
        let v0 = self.at_origin();
        self.values.iter_mut().for_each(|v| *v = *v - v0);
        self
    }

    pub fn cast<U: Real>(&self) -> SampledPath<U> {
        SampledPath {
            grid: self.grid.cast(),
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

/// Two-sided standard Brownian motion on `grid`, pinned at the origin.
///
/// Increments over each grid cell are i.i.d. `Normal(0, step)`. The cells to
/// the right of the origin use stream `derive(seed, 0)`, the cells to the
/// left `derive(seed, 1)`; both are accumulated outward from 0.
pub fn sample_bm<T: Real>(grid: Grid<T>, seed: u64) -> SampledPath<T> {
    let sd = grid.step().as_f64().sqrt();
    let mut values = vec![T::zero(); grid.len()];
    let zero = grid.zero_index();

    let mut right = seed::rng(seed::derive(seed, 0));
    let mut acc = 0.0f64;
    for v in values[zero + 1..].iter_mut() {
        let z: f64 = right.sample(StandardNormal);
        acc += sd * z;
        *v = T::lit(acc);
    }

    let mut left = seed::rng(seed::derive(seed, 1));
    acc = 0.0;
    for v in values[..zero].iter_mut().rev() {
        let z: f64 = left.sample(StandardNormal);
        acc += sd * z;
        *v = T::lit(acc);
    }
    SampledPath { grid, values }
}

/// Space-time randomness: independent Brownian lines `B^(1), ..., B^(n)` on
/// a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment<T> {
    grid: Grid<T>,
    lines: Vec<SampledPath<T>>,
    master_seed: Option<u64>,
}

impl<T: Real> Environment<T> {
    /// Seed of line `k` (1-based) under `master`.
    pub fn line_seed(master: u64, k: usize) -> u64 {
        seed::derive(master, k as u64)
    }

    pub fn sample(grid: Grid<T>, levels: usize, master_seed: u64) -> Self {
        let lines = (1..=levels)
            .map(|k| sample_bm(grid, Self::line_seed(master_seed, k)))
            .collect();
        Environment {
            grid,
            lines,
            master_seed: Some(master_seed),
        }
    }

    /// Environment from explicit lines (all on `grid`, all anchored).
    pub fn from_lines(grid: Grid<T>, lines: Vec<SampledPath<T>>) -> Result<Self> {
        for (k, line) in lines.iter().enumerate() {
            if *line.grid() != grid {
                return Err(Error::GridMismatch);
            }
            if !line.is_anchored() {
                return Err(Error::InvalidParameter(format!(
                    "line {} is not anchored at 0",
                    k + 1
                )));
            }
        }
        Ok(Environment {
            grid,
            lines,
            master_seed: None,
        })
    }

    /// All-zero environment with `levels` lines.
    pub fn noiseless(grid: Grid<T>, levels: usize) -> Self {
        Environment {
            grid,
            lines: vec![SampledPath::zeros(grid); levels],
            master_seed: None,
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.lines.len()
    }

    /// Line `k`, 1-based.
    #[inline]
    pub fn line(&self, k: usize) -> &SampledPath<T> {
        &self.lines[k - 1]
    }

    pub fn lines(&self) -> &[SampledPath<T>] {
        &self.lines
    }

    pub fn master_seed(&self) -> Option<u64> {
        self.master_seed
    }
}

/// How an initial profile is generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    /// `ν(x) = μx`.
    Linear,
    /// `ν(x) = μx + B(x)` with `B` an independent two-sided Brownian motion.
    BrownianWithDrift,
    /// `ν(x) = μx − a(x)` with the random-phase arrival
    /// `a(x) = (A/2)(sin(ωx + φ) − sin φ)`, `φ ~ Uniform[0, 2π)`.
    /// `|a| ≤ A` and `a(0) = 0`.
    SinusoidArrival { amplitude: f64, frequency: f64 },
    /// Zero arrival; the profile is `μx`.
    FlatArrival,
    /// `ν(0) = 0` and `ν = −∞` elsewhere: turns the variational problem into
    /// point-to-point passage from the origin.
    Pinned,
    /// Supplied by the caller.
    Custom,
}

impl ProfileKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::Linear => "linear",
            ProfileKind::BrownianWithDrift => "brownian_with_drift",
            ProfileKind::SinusoidArrival { .. } => "sinusoid_arrival",
            ProfileKind::FlatArrival => "flat_arrival",
            ProfileKind::Pinned => "pinned",
            ProfileKind::Custom => "custom",
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileKind::SinusoidArrival {
                amplitude,
                frequency,
            } => {
                write!(f, "sinusoid_arrival(A={amplitude},w={frequency})")
            }
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    /// Parses the generator names; sinusoids get `A = 0.5`, `ω = 1`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ProfileKind::Linear),
            "brownian_with_drift" => Ok(ProfileKind::BrownianWithDrift),
            "sinusoid_arrival" => Ok(ProfileKind::SinusoidArrival {
                amplitude: 0.5,
                frequency: 1.0,
            }),
            "flat_arrival" => Ok(ProfileKind::FlatArrival),
            other => Err(Error::InvalidParameter(format!(
                "unknown profile kind: {other}"
            ))),
        }
    }
}

/// Initial profile `ν` with `ν(0) = 0` and declared drift `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    path: SampledPath<T>,
    mu: T,
    kind: ProfileKind,
}

impl<T: Real> Profile<T> {
    /// Wraps a caller-supplied path.
    pub fn from_path(path: SampledPath<T>, mu: T) -> Result<Self> {
        check_drift(mu)?;
        if !path.is_anchored() {
            return Err(Error::InvalidParameter(
                "profile must vanish at the origin".into(),
            ));
        }
        Ok(Profile {
            path,
            mu,
            kind: ProfileKind::Custom,
        })
    }

    /// Point mass at the origin (see [`ProfileKind::Pinned`]).
    pub fn pinned(grid: Grid<T>) -> Self {
        let mut values = vec![T::neg_infinity(); grid.len()];
        values[grid.zero_index()] = T::zero();
        Profile {
            path: SampledPath { grid, values },
            mu: T::one(),
            kind: ProfileKind::Pinned,
        }
    }

    #[inline]
    pub fn path(&self) -> &SampledPath<T> {
        &self.path
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        self.path.grid()
    }

    #[inline]
    pub fn mu(&self) -> T {
        self.mu
    }

    #[inline]
    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// Queueing dual `a(x) = μx − ν(x)`.
    pub fn arrival(&self) -> SampledPath<T> {
        let grid = *self.grid();
        let values = self
            .path
            .values
            .iter()
            .enumerate()
            .map(|(j, &v)| self.mu * grid.point(j) - v)
            .collect();
        SampledPath { grid, values }
    }

    /// Profile whose arrival dual is `a`: `ν(x) = μx − a(x)`.
    pub fn from_arrival(arrival: &SampledPath<T>, mu: T) -> Result<Self> {
        check_drift(mu)?;
        let grid = *arrival.grid();
        let values = arrival
            .values
            .iter()
            .enumerate()
            .map(|(j, &a)| mu * grid.point(j) - a)
            .collect();
        Profile::from_path(SampledPath { grid, values }, mu)
    }
}

fn check_drift<T: Real>(mu: T) -> Result<()> {
    if mu > T::zero() && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "drift mu must be positive, got {mu}"
        )))
    }
}

/// Builds an initial profile of the given kind with drift `mu`.
pub fn make_profile<T: Real>(
    kind: ProfileKind,
    mu: T,
    grid: Grid<T>,
    seed: u64,
) -> Result<Profile<T>> {
    check_drift(mu)?;
    let path = match kind {
        ProfileKind::Linear | ProfileKind::FlatArrival => SampledPath::linear(grid, mu),
        ProfileKind::BrownianWithDrift => {
            SampledPath::linear(grid, mu).add(&sample_bm(grid, seed))?
        }
        ProfileKind::SinusoidArrival {
            amplitude,
            frequency,
        } => {
            if !(amplitude >= 0.0) || !frequency.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "sinusoid needs amplitude >= 0 and finite frequency, got A={amplitude}, w={frequency}"
                )));
            }
            let phase: f64 = seed::rng(seed).random_range(0.0..TAU);
            let half = 0.5 * amplitude;
            let base = phase.sin();
            let m = mu.as_f64();
            SampledPath::from_fn(grid, |x| {
                let x = x.as_f64();
                T::lit(m * x - half * ((frequency * x + phase).sin() - base))
            })
        }
        ProfileKind::Pinned => return Ok(Profile::pinned(grid)),
        ProfileKind::Custom => {
            return Err(Error::InvalidParameter(
                "custom profiles are built with Profile::from_path".into(),
            ))
        }
    };
    Ok(Profile { path, mu, kind })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid() -> Grid<f64> {
        Grid::covering(-1.0, 1.0, 0.01).unwrap()
    }

    #[test]
    fn grid_contains_origin_exactly() {
        let g = Grid::covering(-2.5, 3.0, 0.25).unwrap();
        assert_eq!(g.point(g.zero_index()), 0.0);
        assert_eq!(g.first(), -2.5);
        assert_eq!(g.last(), 3.0);
        assert_eq!(g.index_of(1.25).unwrap(), g.zero_index() + 5);
        assert!(g.index_of(0.1).is_err());
        assert!(Grid::new(-0.15, 0.1, 10).is_err());
        assert!(Grid::new(0.5, 0.1, 10).is_err());
        assert!(Grid::<f64>::new(0.0, -0.1, 10).is_err());
        assert!(Grid::new(0.0, 0.1, 1).is_err());
    }

    #[test]
    fn bm_is_anchored_and_deterministic() {
        let g = unit_grid();
        for seed in 0..20 {
            let b = sample_bm(g, seed);
            assert_eq!(b.at(0.0).unwrap(), 0.0);
            assert_eq!(b, sample_bm(g, seed));
        }
        assert_ne!(sample_bm(g, 1), sample_bm(g, 2));
    }

    #[test]
    fn f32_paths_round_the_f64_noise() {
        let g = unit_grid();
        let b64 = sample_bm(g, 9);
        let b32 = sample_bm(g.cast::<f32>(), 9);
        for (a, b) in b64.values().iter().zip(b32.values()) {
            assert!((*a as f32 - b).abs() < 1e-6);
        }
    }

    #[test]
    fn increments_telescope() {
        let b = sample_bm(unit_grid(), 4);
        assert_eq!(b.increment(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(b.increment(0.0, 0.7).unwrap(), b.at(0.7).unwrap());
        let lhs = b.increment(-0.5, 0.1).unwrap() + b.increment(0.1, 0.9).unwrap();
        assert!((lhs - b.increment(-0.5, 0.9).unwrap()).abs() < 1e-14);
        assert!(matches!(b.increment(0.0, 0.005), Err(Error::OffGrid(_))));
    }

    #[test]
    fn profile_menu() {
        let g = Grid::<f64>::covering(-10.0, 10.0, 0.05).unwrap();
        let lin = make_profile(ProfileKind::Linear, 1.0, g, 0).unwrap();
        for (j, &v) in lin.path().values().iter().enumerate() {
            assert_eq!(v, g.point(j));
        }
        let sin = make_profile(
            ProfileKind::SinusoidArrival {
                amplitude: 0.5,
                frequency: 1.0,
            },
            1.0,
            g,
            3,
        )
        .unwrap();
        assert_eq!(sin.path().at_origin(), 0.0);
        for (j, &v) in sin.path().values().iter().enumerate() {
            assert!((v - g.point(j)).abs() <= 0.5 + 1e-12);
        }
        let bm = make_profile(ProfileKind::BrownianWithDrift, 2.0, g, 3).unwrap();
        assert_eq!(bm.path().at_origin(), 0.0);
        let a = bm.arrival();
        assert_eq!(a.at_origin(), 0.0);
        assert_eq!(Profile::from_arrival(&a, 2.0).unwrap().path(), bm.path());
        assert!(make_profile(ProfileKind::Linear, 0.0, g, 0).is_err());
        assert!(make_profile(ProfileKind::Linear, -1.0, g, 0).is_err());
    }

    #[test]
    fn profile_kind_names_round_trip() {
        for name in [
            "linear",
            "brownian_with_drift",
            "sinusoid_arrival",
            "flat_arrival",
        ] {
            assert_eq!(name.parse::<ProfileKind>().unwrap().name(), name);
        }
        assert!("pinned".parse::<ProfileKind>().is_err());
    }
}
