use std::io::Write;
use std::sync::Arc;

use super::passage::passage_to;
use super::sweep::{LevelRow, LevelSweep};
use crate::error::{Error, Result};
use crate::path::{Environment, Profile};
use crate::scalar::Real;

/// The table `L_ν(z_j, k)` for `k = 0..=n` (level 0 is `ν`) together with
/// the rightmost exit point of every cell.
#[derive(Debug, Clone)]
pub struct LppField<T> {
    profile: Profile<T>,
    env: Arc<Environment<T>>,
    levels: usize,
    width: usize,
    values: Vec<T>,
    exits: Vec<usize>,
}

impl<T: Real> LppField<T> {
    pub fn profile(&self) -> &Profile<T> {
        &self.profile
    }

    pub fn env(&self) -> &Arc<Environment<T>> {
        &self.env
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn row(&self, k: usize) -> LevelRow<'_, T> {
        let r = k * self.width..(k + 1) * self.width;
        LevelRow {
            values: &self.values[r.clone()],
            exits: &self.exits[r],
        }
    }

    /// `L_ν(z_j, k)`.
    #[inline]
    pub fn value(&self, k: usize, j: usize) -> T {
        self.values[k * self.width + j]
    }

    /// Grid index of `Z_ν(z_j, k)`.
    #[inline]
    pub fn exit(&self, k: usize, j: usize) -> usize {
        self.exits[k * self.width + j]
    }

    /// `Z_ν(z_j, k)` as a coordinate.
    pub fn exit_point(&self, k: usize, j: usize) -> T {
        self.env.grid().point(self.exit(k, j))
    }

    /// `M^(k)_ν(z_j) = L_ν(z_j, k) − L_ν(0, k)`.
    pub fn profile_at(&self, k: usize, j: usize) -> T {
        self.value(k, j) - self.value(k, self.env.grid().zero_index())
    }

    /// Exit point on the first grid index: the supremum may be truncated.
    pub fn boundary_flag(&self, k: usize, j: usize) -> bool {
        self.exit(k, j) == 0
    }

    /// Dumps the tables as CSV, one row per cell in level-major order:
    /// `level,index,z,value,exit_index,exit,boundary`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "level,index,z,value,exit_index,exit,boundary")?;
        let grid = self.env.grid();
        for k in 0..=self.levels {
            for j in 0..self.width {
                writeln!(
                    out,
                    "{k},{j},{},{},{},{},{}",
                    grid.point(j),
                    self.value(k, j),
                    self.exit(k, j),
                    self.exit_point(k, j),
                    u8::from(self.boundary_flag(k, j))
                )?;
            }
        }
        Ok(())
    }
}

/// Evaluates `L_ν(·, k)` for `k = 1..=n` on the environment's grid.
pub fn variational_field<T: Real>(
    profile: &Profile<T>,
    env: &Arc<Environment<T>>,
    n: usize,
) -> Result<LppField<T>> {
    if profile.grid() != env.grid() {
        return Err(Error::GridMismatch);
    }
    if n > env.levels() {
        return Err(Error::InvalidParameter(format!(
            "{n} levels requested, environment has {}",
            env.levels()
        )));
    }
    let width = env.grid().len();
    let mut values = Vec::with_capacity(width * (n + 1));
    let mut exits = Vec::with_capacity(width * (n + 1));
    let mut sweep = LevelSweep::new(profile);
    values.extend_from_slice(sweep.values());
    exits.extend_from_slice(sweep.exits());
    for k in 1..=n {
        sweep.advance(env.line(k));
        values.extend_from_slice(sweep.values());
        exits.extend_from_slice(sweep.exits());
    }
    Ok(LppField {
        profile: profile.clone(),
        env: Arc::clone(env),
        levels: n,
        width,
        values,
        exits,
    })
}

/// Exit points `Z_ν(z_j, k)` as coordinates, levels `1..=n`.
pub fn exit_points<T: Real>(field: &LppField<T>) -> Vec<Vec<T>> {
    (1..=field.levels)
        .map(|k| (0..field.width).map(|j| field.exit_point(k, j)).collect())
        .collect()
}

/// Two fields driven by one environment.
#[derive(Debug, Clone)]
pub struct CoupledFields<T> {
    pub first: LppField<T>,
    pub second: LppField<T>,
}

impl<T: Real> CoupledFields<T> {
    pub fn shares_environment(&self) -> bool {
        Arc::ptr_eq(&self.first.env, &self.second.env)
    }
}

/// Basic coupling: both profiles evolve against the same lines.
pub fn couple<T: Real>(
    p1: &Profile<T>,
    p2: &Profile<T>,
    env: &Arc<Environment<T>>,
    n: usize,
) -> Result<CoupledFields<T>> {
    Ok(CoupledFields {
        first: variational_field(p1, env, n)?,
        second: variational_field(p2, env, n)?,
    })
}

/// Largest deviation, over the probe indices, between `L_ν(x, n) − L_ν(0, k)`
/// read off the field and its recomputation
/// `max_z { M^(k)_ν(z) + L((z, k+1), (x, n)) }` with the passage times
/// evaluated backwards from each probe. `n` is the field's top level.
pub fn markov_consistency<T: Real>(field: &LppField<T>, k: usize, probes: &[usize]) -> Result<T> {
    let n = field.levels;
    if k >= n {
        return Err(Error::InvalidParameter(format!(
            "intermediate level {k} must be below {n}"
        )));
    }
    let zero = field.env.grid().zero_index();
    let mut worst = T::zero();
    for &x in probes {
        field.env.grid().check_index(x)?;
        let passage = passage_to(&field.env, k + 1, x, n)?;
        let recomputed = passage
            .iter()
            .enumerate()
            .map(|(z, &p)| field.profile_at(k, z) + p)
            .fold(T::neg_infinity(), T::max);
        let direct = field.value(n, x) - field.value(k, zero);
        worst = worst.max((recomputed - direct).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{make_profile, Grid, ProfileKind};

    #[test]
    fn noiseless_field_follows_the_profile() {
        let g = Grid::covering(-2.0, 2.0, 0.1).unwrap();
        let env = Arc::new(Environment::noiseless(g, 5));
        let p = make_profile(ProfileKind::Linear, 1.5, g, 0).unwrap();
        let f = variational_field(&p, &env, 5).unwrap();
        for k in 1..=5 {
            for j in 0..g.len() {
                assert_eq!(f.value(k, j), 1.5 * g.point(j));
                assert_eq!(f.exit(k, j), j);
                assert_eq!(f.profile_at(k, j), 1.5 * g.point(j));
            }
        }
        assert_eq!(markov_consistency(&f, 2, &[0, 10, 40]).unwrap(), 0.0);
    }

    #[test]
    fn first_level_exit_is_rightmost_scan_maximiser() {
        let g = Grid::covering(-3.0, 3.0, 0.05).unwrap();
        let env = Arc::new(Environment::sample(g, 1, 3));
        let p = make_profile(ProfileKind::BrownianWithDrift, 1.0, g, 4).unwrap();
        let f = variational_field(&p, &env, 1).unwrap();
        let nu = p.path();
        let b = env.line(1);
        for j in 0..g.len() {
            let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
            for z in 0..=j {
                let v = nu.value(z) + b.increment_idx(z, j);
                if v >= best {
                    best = v;
                    arg = z;
                }
            }
            assert!((f.value(1, j) - best).abs() < 1e-12);
            assert_eq!(f.exit(1, j), arg);
        }
    }

    #[test]
    fn identical_profiles_give_identical_fields() {
        let g = Grid::covering(-2.0, 2.0, 0.1).unwrap();
        let env = Arc::new(Environment::sample(g, 4, 3));
        let p = make_profile(ProfileKind::BrownianWithDrift, 1.0, g, 4).unwrap();
        let c = couple(&p, &p, &env, 4).unwrap();
        assert!(c.shares_environment());
        assert_eq!(c.first.values, c.second.values);
        assert_eq!(c.first.exits, c.second.exits);
    }

    #[test]
    fn csv_dump_has_one_row_per_cell() {
        let g = Grid::covering(-0.5, 0.5, 0.1).unwrap();
        let env = Arc::new(Environment::sample(g, 2, 3));
        let p = make_profile(ProfileKind::Linear, 1.0, g, 0).unwrap();
        let f = variational_field(&p, &env, 2).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 3 * g.len());
        assert!(text.starts_with("level,index,z,value,exit_index,exit,boundary\n"));
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let g = Grid::covering(-1.0, 1.0, 0.1).unwrap();
        let other = Grid::covering(-1.0, 1.0, 0.05).unwrap();
        let env = Arc::new(Environment::sample(g, 2, 3));
        let p = make_profile(ProfileKind::Linear, 1.0, other, 0).unwrap();
        assert!(matches!(
            variational_field(&p, &env, 2),
            Err(Error::GridMismatch)
        ));
        let p = make_profile(ProfileKind::Linear, 1.0, g, 0).unwrap();
        assert!(variational_field(&p, &env, 3).is_err());
        let f = variational_field(&p, &env, 2).unwrap();
        assert!(markov_consistency(&f, 2, &[3]).is_err());
    }
}
