//! Monte Carlo experiments. Replication `r` draws every random stream below
//! `derive(seed, r)`; replications run in parallel and are aggregated in
//! index order, so results do not depend on the number of threads.

use rayon::prelude::*;

use super::ks::{gamma_cdf, ks_test, ks_two_sample_test, normal_cdf, KsReport};
use super::summary::{mean_ci, median, quantile, wilson};
use crate::discrete::{exp_lpp, lindley, tasep_coupled, tasep_poisson, WeightTable};
use crate::error::{Error, Result};
use crate::lpp::LevelSweep;
use crate::path::{make_profile, sample_bm, Environment, Grid, Profile, ProfileKind, SampledPath};
use crate::queue::run_tandem;
use crate::seed::{self, TAG_ARRIVAL, TAG_ENV, TAG_PROFILE, TAG_PROFILE_ALT};

fn steps_for(length: f64, h: f64, what: &str) -> Result<usize> {
    let steps = (length / h).round();
    if steps < 1.0 || (steps * h - length).abs() > 1e-9 * length.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "{what} = {length} is not a multiple of h = {h}"
        )));
    }
    Ok(steps as usize)
}

fn check_levels(levels: &[usize]) -> Result<usize> {
    if levels.is_empty() || levels[0] == 0 || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "levels must be positive and strictly increasing".into(),
        ));
    }
    Ok(*levels.last().unwrap())
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()));
    }
    Ok(())
}

/// Streams `levels` lines of a fresh environment through every sweep,
/// calling `visit(k, sweeps)` after each level.
fn drive<F>(
    sweeps: &mut [LevelSweep<f64>],
    grid: Grid<f64>,
    levels: usize,
    env_seed: u64,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, &[LevelSweep<f64>]) -> Result<()>,
{
    for k in 1..=levels {
        let line = sample_bm(grid, Environment::<f64>::line_seed(env_seed, k));
        for s in sweeps.iter_mut() {
            s.advance(&line);
        }
        visit(k, sweeps)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BurkeParams {
    pub mu: f64,
    pub h: f64,
    pub burn_in: f64,
    pub increments: usize,
    pub delta: f64,
    /// Queues in series; 0 tests the arrival process itself.
    pub stages: usize,
    pub arrival: ProfileKind,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for BurkeParams {
    fn default() -> Self {
        BurkeParams {
            mu: 1.0,
            h: 0.01,
            burn_in: 20.0,
            increments: 2000,
            delta: 1.0,
            stages: 1,
            arrival: ProfileKind::BrownianWithDrift,
            alpha: 0.01,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BurkeOutcome {
    pub report: KsReport,
    pub boundary_hits: usize,
    pub invalidated: bool,
}

/// Disjoint departure increments over `[iΔ, (i+1)Δ]`, `i < m`, divided by
/// `√Δ` and tested against `Normal(0, 1)`. The queues start empty at
/// `−burn_in`; any last-empty time pinned to that edge inside the measured
/// range invalidates the test.
pub fn burke_test(p: &BurkeParams) -> Result<BurkeOutcome> {
    if !(p.mu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mu must be positive, got {}",
            p.mu
        )));
    }
    if p.stages > 0 && p.burn_in < 20.0 / p.mu {
        return Err(Error::InvalidParameter(format!(
            "burn-in {} is shorter than 20/mu",
            p.burn_in
        )));
    }
    check_reps(p.increments)?;
    let per = steps_for(p.delta, p.h, "delta")?;
    let grid = Grid::covering(-p.burn_in, p.increments as f64 * p.delta, p.h)?;
    let profile = make_profile(p.arrival, p.mu, grid, seed::derive(p.seed, TAG_ARRIVAL))?;
    let arrival = profile.arrival();
    let env = Environment::sample(grid, p.stages, seed::derive(p.seed, TAG_ENV));
    let state;
    let (out, hits): (&SampledPath<f64>, usize) = if p.stages == 0 {
        (&arrival, 0)
    } else {
        state = run_tandem(&arrival, &env, p.mu, p.stages, 0)?;
        (
            state.departure(p.stages),
            state.boundary_hits(grid.zero_index()),
        )
    };
    let zero = grid.zero_index();
    let scale = p.delta.sqrt();
    let sample: Vec<f64> = (0..p.increments)
        .map(|i| out.increment_idx(zero + i * per, zero + (i + 1) * per) / scale)
        .collect();
    let report = ks_test(&sample, normal_cdf(0.0, 1.0), "normal(0,1)", p.alpha)?;
    Ok(BurkeOutcome {
        report,
        boundary_hits: hits,
        invalidated: hits > 0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractParams {
    pub kind: ProfileKind,
    pub mu: f64,
    pub c: f64,
    pub epsilon: f64,
    pub levels: Vec<usize>,
    pub reps: usize,
    pub h: f64,
    /// Left end of the window; derived from the largest level when absent.
    pub window_left: Option<f64>,
    /// Use the stationary profile for both fields.
    pub self_coupled: bool,
    pub seed: u64,
}

impl Default for AttractParams {
    fn default() -> Self {
        AttractParams {
            kind: ProfileKind::Linear,
            mu: 1.0,
            c: 1.0,
            epsilon: 0.1,
            levels: vec![4, 16, 64],
            reps: 200,
            h: 0.05,
            window_left: None,
            self_coupled: false,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub n: usize,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Replications entering the estimate.
    pub reps: usize,
    pub flagged: usize,
}

/// Estimated `P(sup_{x ∈ [0,C]} |M_ν(n, n+x) − M_μ(n, n+x)| > ε)` per level.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCurve {
    pub epsilon: f64,
    pub c: f64,
    pub rows: Vec<CurveRow>,
}

impl ConvergenceCurve {
    /// Each estimate is at most the upper confidence bound of the previous
    /// level.
    pub fn non_increasing_within_ci(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].estimate <= w[0].ci_hi)
    }

    pub fn invalidated(&self) -> bool {
        self.rows.iter().any(|r| r.reps == 0)
    }
}

fn default_left(n_max: usize, mu: f64, slowest: f64) -> f64 {
    let n = n_max as f64;
    -(n / (slowest * slowest) - n / (mu * mu)).max(0.0) - 8.0 * n.powf(2.0 / 3.0) / slowest - 20.0
}

/// Couples `ν` of the chosen kind with the stationary profile
/// `μx + B(x)` on one environment and estimates the probability that the
/// two increment profiles still differ by more than `ε` on `[n, n+C]`.
pub fn attractiveness_experiment(p: &AttractParams) -> Result<ConvergenceCurve> {
    let n_max = check_levels(&p.levels)?;
    check_reps(p.reps)?;
    if !(p.c > 0.0) || !(p.epsilon > 0.0) {
        return Err(Error::InvalidParameter(
            "C and epsilon must be positive".into(),
        ));
    }
    let x_scale = 1.0 / (p.mu * p.mu);
    let left = p
        .window_left
        .unwrap_or_else(|| default_left(n_max, p.mu, p.mu));
    let grid = Grid::covering(left, n_max as f64 * x_scale + p.c, p.h)?;
    let span = steps_for(p.c, p.h, "C")?;
    let starts = p
        .levels
        .iter()
        .map(|&n| grid.index_of(n as f64 * x_scale))
        .collect::<Result<Vec<_>>>()?;

    // per replication and level: (flagged, exceeded)
    let outcomes = (0..p.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let rs = seed::derive(p.seed, rep);
            let stationary = make_profile(
                ProfileKind::BrownianWithDrift,
                p.mu,
                grid,
                seed::derive(rs, TAG_PROFILE_ALT),
            )?;
            let nu = if p.self_coupled {
                stationary.clone()
            } else {
                make_profile(p.kind, p.mu, grid, seed::derive(rs, TAG_PROFILE))?
            };
            let mut sweeps = [LevelSweep::new(&nu), LevelSweep::new(&stationary)];
            let mut out = Vec::with_capacity(p.levels.len());
            let mut next = 0;
            drive(
                &mut sweeps,
                grid,
                n_max,
                seed::derive(rs, TAG_ENV),
                |k, s| {
                    if k == p.levels[next] {
                        let j0 = starts[next];
                        let (a, b) = (s[0].row(), s[1].row());
                        let flagged =
                            (j0..=j0 + span).any(|j| a.at_boundary(j) || b.at_boundary(j));
                        let sup = (j0..=j0 + span)
                            .map(|j| (a.increment(j0, j) - b.increment(j0, j)).abs())
                            .fold(0.0, f64::max);
                        out.push((flagged, sup > p.epsilon));
                        next += 1;
                    }
                    Ok(())
                },
            )?;
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = p
        .levels
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let flagged = outcomes.iter().filter(|o| o[i].0).count();
            let hits = outcomes.iter().filter(|o| !o[i].0 && o[i].1).count();
            let used = p.reps - flagged;
            let (estimate, ci_lo, ci_hi) = if used == 0 {
                (f64::NAN, 0.0, 1.0)
            } else {
                wilson(hits, used)
            };
            CurveRow {
                n,
                estimate,
                ci_lo,
                ci_hi,
                reps: used,
                flagged,
            }
        })
        .collect();
    Ok(ConvergenceCurve {
        epsilon: p.epsilon,
        c: p.c,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitParams {
    pub kind: ProfileKind,
    pub mu: f64,
    pub c: f64,
    pub levels: Vec<usize>,
    pub reps: usize,
    pub deltas: Vec<f64>,
    pub h: f64,
    pub window_left: Option<f64>,
    pub seed: u64,
}

impl Default for ExitParams {
    fn default() -> Self {
        ExitParams {
            kind: ProfileKind::BrownianWithDrift,
            mu: 1.0,
            c: 1.0,
            levels: vec![16, 64, 256],
            reps: 100,
            deltas: vec![0.25, 0.5],
            h: 0.1,
            window_left: None,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitRow {
    pub n: usize,
    pub median_ratio: f64,
    pub upper_quartile_ratio: f64,
    /// `(δ, frequency)` of `Z_{μ−δ}(n+C, n) <= Z_ν(n, n)` and
    /// `Z_ν(n+C, n) <= Z_{μ+δ}(n, n)` holding together.
    pub joint_event: Vec<(f64, f64)>,
    pub reps: usize,
    pub flagged: usize,
}

/// Exit points of `ν` against those of `(μ ± δ)x + B(x)`, all fields sharing
/// one environment and the `μ ± δ` profiles sharing one `B`.
pub fn exit_experiment(p: &ExitParams) -> Result<Vec<ExitRow>> {
    let n_max = check_levels(&p.levels)?;
    check_reps(p.reps)?;
    if p.deltas.iter().any(|&d| !(d > 0.0 && d < p.mu)) {
        return Err(Error::InvalidParameter(
            "each delta must lie in (0, mu)".into(),
        ));
    }
    let x_scale = 1.0 / (p.mu * p.mu);
    let slowest = p.deltas.iter().fold(p.mu, |m, &d| m.min(p.mu - d));
    let left = p
        .window_left
        .unwrap_or_else(|| default_left(n_max, p.mu, slowest));
    let grid = Grid::covering(left, n_max as f64 * x_scale + p.c, p.h)?;
    let span = steps_for(p.c, p.h, "C")?;
    let starts = p
        .levels
        .iter()
        .map(|&n| grid.index_of(n as f64 * x_scale))
        .collect::<Result<Vec<_>>>()?;

    // per replication and level: (flagged, |Z_ν(n,n)|/n, joint event per δ)
    let outcomes = (0..p.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let rs = seed::derive(p.seed, rep);
            let nu = make_profile(p.kind, p.mu, grid, seed::derive(rs, TAG_PROFILE))?;
            let shared = sample_bm(grid, seed::derive(rs, TAG_PROFILE_ALT));
            let mut sweeps = vec![LevelSweep::new(&nu)];
            for &d in &p.deltas {
                for drift in [p.mu - d, p.mu + d] {
                    let path = SampledPath::linear(grid, drift).add(&shared)?;
                    sweeps.push(LevelSweep::new(&Profile::from_path(path, drift)?));
                }
            }
            let mut out = Vec::with_capacity(p.levels.len());
            let mut next = 0;
            drive(
                &mut sweeps,
                grid,
                n_max,
                seed::derive(rs, TAG_ENV),
                |k, s| {
                    if k == p.levels[next] {
                        let (j0, j1) = (starts[next], starts[next] + span);
                        let ex = |f: usize, j: usize| s[f].exits()[j];
                        let mut flagged = ex(0, j0) == 0 || ex(0, j1) == 0;
                        let mut joint = Vec::with_capacity(p.deltas.len());
                        for i in 0..p.deltas.len() {
                            let (minus, plus) = (1 + 2 * i, 2 + 2 * i);
                            flagged |= ex(minus, j1) == 0 || ex(plus, j0) == 0;
                            joint.push(ex(minus, j1) <= ex(0, j0) && ex(0, j1) <= ex(plus, j0));
                        }
                        let ratio = grid.point(ex(0, j0)).abs() / k as f64;
                        out.push((flagged, ratio, joint));
                        next += 1;
                    }
                    Ok(())
                },
            )?;
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(p.levels
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let kept: Vec<_> = outcomes.iter().map(|o| &o[i]).filter(|o| !o.0).collect();
            let ratios: Vec<f64> = kept.iter().map(|o| o.1).collect();
            let used = kept.len();
            let freq = |d: usize| {
                if used == 0 {
                    f64::NAN
                } else {
                    kept.iter().filter(|o| o.2[d]).count() as f64 / used as f64
                }
            };
            ExitRow {
                n,
                median_ratio: if used == 0 { f64::NAN } else { median(&ratios) },
                upper_quartile_ratio: if used == 0 {
                    f64::NAN
                } else {
                    quantile(&ratios, 0.75)
                },
                joint_event: p
                    .deltas
                    .iter()
                    .enumerate()
                    .map(|(d, &delta)| (delta, freq(d)))
                    .collect(),
                reps: used,
                flagged: p.reps - used,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerticalParams {
    pub lambda: f64,
    pub n: usize,
    pub reps: usize,
    pub h: f64,
    pub window_left: Option<f64>,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for VerticalParams {
    fn default() -> Self {
        VerticalParams {
            lambda: 1.0,
            n: 20,
            reps: 2000,
            h: 5e-5,
            window_left: None,
            alpha: 0.01,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerticalOutcome {
    pub report: KsReport,
    pub samples: Vec<f64>,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub flagged: usize,
    pub invalidated: bool,
}

/// `L_λ(0, n) − L_λ(0, 0)` from `ν(x) = λx + B(x)`, tested against the
/// Gamma law with shape `n` and rate `λ`. Replications whose exit point
/// touches the window edge are dropped and counted; more than 1% of them
/// invalidates the run.
pub fn gamma_vertical_test(p: &VerticalParams) -> Result<VerticalOutcome> {
    if p.n == 0 || !(p.lambda > 0.0) {
        return Err(Error::InvalidParameter("need n >= 1 and lambda > 0".into()));
    }
    check_reps(p.reps)?;
    let nf = p.n as f64;
    let left = p
        .window_left
        .unwrap_or(-(nf / (p.lambda * p.lambda) + 2.5 * nf.powf(2.0 / 3.0) / p.lambda + 6.0));
    let grid = Grid::covering(left, 0.0, p.h)?;
    let zero = grid.zero_index();
    let draws = (0..p.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let rs = seed::derive(p.seed, rep);
            let nu = make_profile(
                ProfileKind::BrownianWithDrift,
                p.lambda,
                grid,
                seed::derive(rs, TAG_PROFILE),
            )?;
            let mut sweep = [LevelSweep::new(&nu)];
            drive(&mut sweep, grid, p.n, seed::derive(rs, TAG_ENV), |_, _| {
                Ok(())
            })?;
            let [s] = sweep;
            Ok((
                s.row().at_boundary(zero),
                s.values()[zero] - nu.path().value(zero),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<f64> = draws.iter().filter(|d| !d.0).map(|d| d.1).collect();
    let flagged = p.reps - samples.len();
    if samples.is_empty() {
        return Err(Error::Invalidated(
            "every replication hit the window edge".into(),
        ));
    }
    let report = ks_test(
        &samples,
        gamma_cdf(nf, p.lambda),
        format!("gamma({}, {})", p.n, p.lambda),
        p.alpha,
    )?;
    let (mean, ci_lo, ci_hi) = mean_ci(&samples);
    Ok(VerticalOutcome {
        report,
        samples,
        mean,
        ci_lo,
        ci_hi,
        flagged,
        invalidated: flagged * 100 > p.reps,
    })
}

/// Two-sample KS comparisons of the swap times of particle `k` with hole
/// `k` for `k = 1, 2`: direct Poisson-clock simulation against the
/// event-driven process fed by `Exp(1)` tables.
#[derive(Debug, Clone, PartialEq)]
pub struct TasepAgreement {
    pub reports: Vec<(usize, KsReport)>,
    /// Poisson runs where a tracked swap had not happened by the horizon.
    pub censored: usize,
}

pub fn tasep_agreement(reps: usize, horizon: f64, alpha: f64, seed: u64) -> Result<TasepAgreement> {
    check_reps(reps)?;
    const PAIRS: [usize; 2] = [1, 2];
    let direct = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let traj = tasep_poisson(seed::derive(seed::derive(seed, 0), rep), 2, horizon);
            PAIRS.map(|k| traj.swap_time(k, k))
        })
        .collect::<Vec<_>>();
    let coupled = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let w = WeightTable::<f64>::exp1(2, 2, seed::derive(seed::derive(seed, 1), rep));
            let (_, d) = tasep_coupled(&w)?;
            Ok(PAIRS.map(|k| d.get(k, k)))
        })
        .collect::<Result<Vec<_>>>()?;
    let censored = direct
        .iter()
        .filter(|t| t.iter().any(Option::is_none))
        .count();
    let reports = PAIRS
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let a: Vec<f64> = direct.iter().filter_map(|t| t[i]).collect();
            let b: Vec<f64> = coupled.iter().map(|t| t[i]).collect();
            Ok((
                k,
                ks_two_sample_test(&a, &b, format!("swap({k},{k})"), alpha)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TasepAgreement { reports, censored })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEquivalence {
    pub users: usize,
    pub servers: usize,
    pub max_abs_diff: f64,
    pub bitwise: bool,
}

/// Largest discrepancy between queue departures, lattice passage times and
/// swap times on one `Exp(1)` table.
pub fn discrete_equivalence(
    users: usize,
    servers: usize,
    seed: u64,
) -> Result<DiscreteEquivalence> {
    let w = WeightTable::<f64>::exp1(users, servers, seed);
    let d = lindley(&w);
    let l = exp_lpp(&w);
    let (traj, t) = tasep_coupled(&w)?;
    traj.audit()?;
    let max_abs_diff = d
        .max_abs_diff(&l)
        .max(d.max_abs_diff(&t))
        .max(l.max_abs_diff(&t));
    Ok(DiscreteEquivalence {
        users,
        servers,
        max_abs_diff,
        bitwise: d.bitwise_eq(&l) && d.bitwise_eq(&t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_coupling_never_exceeds() {
        let p = AttractParams {
            self_coupled: true,
            reps: 4,
            levels: vec![2, 4],
            ..Default::default()
        };
        let curve = attractiveness_experiment(&p).unwrap();
        assert_eq!(curve.rows.len(), 2);
        for r in &curve.rows {
            assert_eq!(r.estimate, 0.0);
        }
    }

    #[test]
    fn parameter_validation() {
        let p = AttractParams {
            levels: vec![4, 4],
            ..Default::default()
        };
        assert!(attractiveness_experiment(&p).is_err());
        let p = BurkeParams {
            burn_in: 5.0,
            ..Default::default()
        };
        assert!(burke_test(&p).is_err());
        let p = BurkeParams {
            delta: 0.015,
            ..Default::default()
        };
        assert!(burke_test(&p).is_err());
        let p = ExitParams {
            deltas: vec![1.5],
            ..Default::default()
        };
        assert!(exit_experiment(&p).is_err());
    }

    #[test]
    fn single_level_vertical_is_exponential() {
        let p = VerticalParams {
            n: 1,
            reps: 300,
            h: 1e-3,
            ..Default::default()
        };
        let out = gamma_vertical_test(&p).unwrap();
        assert!(out.report.accept, "{}", out.report);
        assert_eq!(out.flagged, 0);
    }

    #[test]
    fn small_tables_agree() {
        let e = discrete_equivalence(20, 15, 3).unwrap();
        assert!(e.bitwise);
        assert_eq!(e.max_abs_diff, 0.0);
    }
}
