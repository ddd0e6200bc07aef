//! Experiment dispatch and CSV output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::config::{ExperimentConfig, ExperimentKind, Plan};
use crate::error::{Error, Result};
use crate::lpp::{scaling_samples, shape_estimate};
use crate::seed;
use crate::stats::ks::ks_two_sample_test;
use crate::stats::{
    attractiveness_experiment, burke_test, discrete_equivalence, exit_experiment,
    gamma_vertical_test, tasep_agreement,
};

/// Rows of one run. Everything except `elapsed` is a function of the
/// configuration alone.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub plan: Plan,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub warnings: Vec<String>,
    pub invalidated: bool,
    pub elapsed: Duration,
}

impl ExperimentResult {
    /// `#` metadata line, header, then one line per row.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "# tandem-lab experiment={} seed={} plan={:?}",
            self.experiment, self.seed, self.plan
        )
        .unwrap();
        writeln!(s, "{}", self.header.join(",")).unwrap();
        for row in &self.rows {
            writeln!(s, "{}", row.join(",")).unwrap();
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Configured output path, or `<experiment>.csv`.
pub fn output_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.experiment)))
}

fn cells<const N: usize>(values: [String; N]) -> Vec<String> {
    values.into()
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Runs the configured experiment on the current rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    let plan = cfg.plan()?;
    let name = cfg.experiment.name().to_string();
    let mut warnings = Vec::new();
    let mut invalidated = false;
    let (head, rows) = match &plan {
        Plan::Burke(p) => {
            let out = burke_test(p)?;
            if out.invalidated {
                invalidated = true;
                warnings.push(format!(
                    "{} queue maximisers pinned to the window edge",
                    out.boundary_hits
                ));
            }
            let r = &out.report;
            (
                header(&[
                    "experiment",
                    "stages",
                    "statistic",
                    "p_value",
                    "accept",
                    "reps",
                    "flags",
                ]),
                vec![cells([
                    name,
                    p.stages.to_string(),
                    r.statistic.to_string(),
                    r.p_value.to_string(),
                    r.accept.to_string(),
                    r.sample_size.to_string(),
                    out.boundary_hits.to_string(),
                ])],
            )
        }
        Plan::Shape(p) => {
            let est = shape_estimate(p.n, p.h, p.reps, p.seed)?;
            let (wide, scaled) =
                scaling_samples(p.scaling_n, p.h, p.scaling_reps, seed::derive(p.seed, 1))?;
            let ks = ks_two_sample_test(&wide, &scaled, "scaled passage time", p.alpha)?;
            (
                header(&[
                    "experiment",
                    "n",
                    "h",
                    "reps",
                    "mean",
                    "ci_lo",
                    "ci_hi",
                    "scaling_n",
                    "scaling_statistic",
                    "scaling_p_value",
                    "scaling_accept",
                ]),
                vec![cells([
                    name,
                    p.n.to_string(),
                    p.h.to_string(),
                    p.reps.to_string(),
                    est.mean.to_string(),
                    est.ci_lo.to_string(),
                    est.ci_hi.to_string(),
                    p.scaling_n.to_string(),
                    ks.statistic.to_string(),
                    ks.p_value.to_string(),
                    ks.accept.to_string(),
                ])],
            )
        }
        Plan::Attract(p) => {
            let curve = attractiveness_experiment(p)?;
            if curve.invalidated() {
                invalidated = true;
                warnings.push("every replication was boundary-flagged at some level".into());
            }
            let rows = curve
                .rows
                .iter()
                .map(|r| {
                    if r.flagged > 0 {
                        warnings.push(format!(
                            "n = {}: {} boundary-flagged replications",
                            r.n, r.flagged
                        ));
                    }
                    cells([
                        name.clone(),
                        r.n.to_string(),
                        r.estimate.to_string(),
                        r.ci_lo.to_string(),
                        r.ci_hi.to_string(),
                        r.reps.to_string(),
                        r.flagged.to_string(),
                    ])
                })
                .collect();
            (
                header(&[
                    "experiment",
                    "n",
                    "estimate",
                    "ci_lo",
                    "ci_hi",
                    "reps",
                    "flags",
                ]),
                rows,
            )
        }
        Plan::Exits(p) => {
            let table = exit_experiment(p)?;
            let mut head = header(&["experiment", "n", "median_ratio", "upper_quartile_ratio"]);
            head.extend(p.deltas.iter().map(|d| format!("joint_delta_{d}")));
            head.extend(header(&["reps", "flags"]));
            let rows = table
                .iter()
                .map(|r| {
                    if r.reps == 0 {
                        invalidated = true;
                    }
                    let mut row = vec![
                        name.clone(),
                        r.n.to_string(),
                        r.median_ratio.to_string(),
                        r.upper_quartile_ratio.to_string(),
                    ];
                    row.extend(r.joint_event.iter().map(|(_, f)| f.to_string()));
                    row.extend([r.reps.to_string(), r.flagged.to_string()]);
                    row
                })
                .collect();
            if invalidated {
                warnings.push("every replication was boundary-flagged at some level".into());
            }
            (head, rows)
        }
        Plan::Vertical(p) => {
            let out = gamma_vertical_test(p)?;
            if out.invalidated {
                invalidated = true;
                warnings.push(format!(
                    "{} of {} replications hit the window edge",
                    out.flagged, p.reps
                ));
            }
            let r = &out.report;
            (
                header(&[
                    "experiment",
                    "n",
                    "lambda",
                    "statistic",
                    "p_value",
                    "accept",
                    "mean",
                    "ci_lo",
                    "ci_hi",
                    "reps",
                    "flags",
                ]),
                vec![cells([
                    name,
                    p.n.to_string(),
                    p.lambda.to_string(),
                    r.statistic.to_string(),
                    r.p_value.to_string(),
                    r.accept.to_string(),
                    out.mean.to_string(),
                    out.ci_lo.to_string(),
                    out.ci_hi.to_string(),
                    r.sample_size.to_string(),
                    out.flagged.to_string(),
                ])],
            )
        }
        Plan::DiscreteEquiv {
            users,
            servers,
            seed,
        } => {
            let e = discrete_equivalence(*users, *servers, *seed)?;
            (
                header(&["quantity", "value"]),
                vec![
                    cells(["users".into(), e.users.to_string()]),
                    cells(["servers".into(), e.servers.to_string()]),
                    cells(["max_abs_diff".into(), e.max_abs_diff.to_string()]),
                    cells(["bitwise_equal".into(), e.bitwise.to_string()]),
                ],
            )
        }
        Plan::Tasep {
            reps,
            horizon,
            alpha,
            seed,
        } => {
            let a = tasep_agreement(*reps, *horizon, *alpha, *seed)?;
            if a.censored > 0 {
                warnings.push(format!(
                    "{} direct runs ended before the tracked swaps",
                    a.censored
                ));
            }
            let rows = a
                .reports
                .iter()
                .map(|(k, r)| {
                    cells([
                        name.clone(),
                        format!("{k}-{k}"),
                        r.statistic.to_string(),
                        r.p_value.to_string(),
                        r.accept.to_string(),
                        r.sample_size.to_string(),
                        a.censored.to_string(),
                    ])
                })
                .collect();
            (
                header(&[
                    "experiment",
                    "pair",
                    "statistic",
                    "p_value",
                    "accept",
                    "reps",
                    "flags",
                ]),
                rows,
            )
        }
    };
    Ok(ExperimentResult {
        experiment: cfg.experiment,
        seed: cfg.seed,
        plan,
        header: head,
        rows,
        warnings,
        invalidated,
        elapsed: start.elapsed(),
    })
}

/// Runs on a dedicated pool of `threads` workers.
pub fn run_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| {
            Error::InvalidParameter(format!("cannot start {threads} worker threads: {e}"))
        })?;
    pool.install(|| run_experiment(cfg))
}
