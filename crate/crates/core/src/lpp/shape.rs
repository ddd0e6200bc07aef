use rayon::prelude::*;

use super::sweep::LevelSweep;
use crate::error::{Error, Result};
use crate::path::{sample_bm, Environment, Grid, Profile};
use crate::seed;
use crate::stats::summary::mean_ci;

/// Point-to-point passage time `L((0, 1), (x_end, levels))` on a grid of
/// step `h` over `[0, x_end]`, with lines drawn from `env_seed`.
pub fn point_to_point(x_end: f64, levels: usize, h: f64, env_seed: u64) -> Result<f64> {
    if levels == 0 {
        return Err(Error::InvalidParameter("need at least one level".into()));
    }
    let grid = Grid::covering(0.0, x_end, h)?;
    let mut sweep = LevelSweep::new(&Profile::pinned(grid));
    for k in 1..=levels {
        sweep.advance(&sample_bm(grid, Environment::<f64>::line_seed(env_seed, k)));
    }
    Ok(sweep.values()[grid.len() - 1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeEstimate {
    pub n: usize,
    pub h: f64,
    /// `L((0,1),(n,n)) / n` per replication.
    pub samples: Vec<f64>,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Monte Carlo mean of `L((0,1),(n,n)) / n` with a 95% normal interval.
pub fn shape_estimate(n: usize, h: f64, reps: usize, seed: u64) -> Result<ShapeEstimate> {
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()));
    }
    let samples = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let env_seed = seed::derive(seed::derive(seed, rep), seed::TAG_ENV);
            point_to_point(n as f64, n, h, env_seed).map(|l| l / n as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, ci_lo, ci_hi) = mean_ci(&samples);
    Ok(ShapeEstimate {
        n,
        h,
        samples,
        mean,
        ci_lo,
        ci_hi,
    })
}

/// Samples for the Brownian scaling identity with factor 4:
/// `L((0,1),(4n,n))` on step `h` and `2 L((0,1),(n,n))` on step `h/4`.
/// Mapping `x ↦ x/4` sends the first grid onto the second, so the two
/// samples share one law exactly, grid effects included.
pub fn scaling_samples(n: usize, h: f64, reps: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let run = |tag: u64, x_end: f64, step: f64, factor: f64| {
        (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                let env_seed =
                    seed::derive(seed::derive(seed::derive(seed, tag), rep), seed::TAG_ENV);
                point_to_point(x_end, n, step, env_seed).map(|l| factor * l)
            })
            .collect::<Result<Vec<_>>>()
    };
    let wide = run(0, 4.0 * n as f64, h, 1.0)?;
    let scaled = run(1, n as f64, h / 4.0, 2.0)?;
    Ok((wide, scaled))
}
