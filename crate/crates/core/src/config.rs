//! Flat `key = value` experiment configuration.
//!
//! One pair per line; `#` starts a comment; blank lines are ignored. Lists
//! are comma separated. Omitted keys take per-experiment defaults.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::path::ProfileKind;
use crate::stats::{AttractParams, BurkeParams, ExitParams, VerticalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Burke,
    Shape,
    Attract,
    Exits,
    Vertical,
    DiscreteEquiv,
    Tasep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Burke => "burke",
            ExperimentKind::Shape => "shape",
            ExperimentKind::Attract => "attract",
            ExperimentKind::Exits => "exits",
            ExperimentKind::Vertical => "vertical",
            ExperimentKind::DiscreteEquiv => "discrete-equiv",
            ExperimentKind::Tasep => "tasep",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "burke" => ExperimentKind::Burke,
            "shape" => ExperimentKind::Shape,
            "attract" => ExperimentKind::Attract,
            "exits" => ExperimentKind::Exits,
            "vertical" => ExperimentKind::Vertical,
            "discrete-equiv" => ExperimentKind::DiscreteEquiv,
            "tasep" => ExperimentKind::Tasep,
            other => return Err(Error::config(format!("unknown experiment: {other}"))),
        })
    }
}

/// Parsed configuration. `None` fields fall back to the experiment's
/// defaults when the run plan is built.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub h: Option<f64>,
    pub window_left: Option<f64>,
    pub mu: Option<f64>,
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
    pub levels: Option<Vec<usize>>,
    pub reps: Option<usize>,
    pub out: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub stages: Option<usize>,
    pub profile: Option<ProfileKind>,
    pub amplitude: Option<f64>,
    pub frequency: Option<f64>,
    pub deltas: Option<Vec<f64>>,
    pub users: Option<usize>,
    pub servers: Option<usize>,
    pub horizon: Option<f64>,
    pub scaling_n: Option<usize>,
    pub scaling_reps: Option<usize>,
    pub self_coupled: Option<bool>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            seed: 1,
            h: None,
            window_left: None,
            mu: None,
            c: None,
            epsilon: None,
            levels: None,
            reps: None,
            out: None,
            alpha: None,
            lambda: None,
            n: None,
            delta: None,
            stages: None,
            profile: None,
            amplitude: None,
            frequency: None,
            deltas: None,
            users: None,
            servers: None,
            horizon: None,
            scaling_n: None,
            scaling_reps: None,
            self_coupled: None,
        }
    }

    /// Checks the constraints that do not depend on the experiment.
    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::config("h must be positive"));
            }
        }
        if self.reps == Some(0) || self.scaling_reps == Some(0) {
            return Err(Error::config("reps must be at least 1"));
        }
        if let Some(levels) = &self.levels {
            if levels.is_empty() || levels[0] == 0 || levels.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config(
                    "levels must be positive and strictly increasing",
                ));
            }
        }
        for (name, v) in [
            ("mu", self.mu),
            ("c", self.c),
            ("epsilon", self.epsilon),
            ("lambda", self.lambda),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::config(format!("{name} must be positive")));
                }
            }
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::config("alpha must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    /// Profile kind with any amplitude or frequency override applied.
    fn profile_or(&self, default: ProfileKind) -> ProfileKind {
        match self.profile.unwrap_or(default) {
            ProfileKind::SinusoidArrival {
                amplitude,
                frequency,
            } => ProfileKind::SinusoidArrival {
                amplitude: self.amplitude.unwrap_or(amplitude),
                frequency: self.frequency.unwrap_or(frequency),
            },
            other => other,
        }
    }

    /// Resolves defaults into a concrete run plan.
    pub fn plan(&self) -> Result<Plan> {
        self.validate()?;
        let seed = self.seed;
        Ok(match self.experiment {
            ExperimentKind::Burke => {
                let d = BurkeParams::default();
                Plan::Burke(BurkeParams {
                    mu: self.mu.unwrap_or(d.mu),
                    h: self.h.unwrap_or(d.h),
                    burn_in: self.window_left.map(|l| -l).unwrap_or(d.burn_in),
                    increments: self.reps.unwrap_or(d.increments),
                    delta: self.delta.unwrap_or(d.delta),
                    stages: self.stages.unwrap_or(d.stages),
                    arrival: self.profile_or(d.arrival),
                    alpha: self.alpha.unwrap_or(d.alpha),
                    seed,
                })
            }
            ExperimentKind::Shape => Plan::Shape(ShapePlan {
                n: self.n.unwrap_or(100),
                h: self.h.unwrap_or(0.05),
                reps: self.reps.unwrap_or(50),
                scaling_n: self.scaling_n.unwrap_or(20),
                scaling_reps: self.scaling_reps.unwrap_or(500),
                alpha: self.alpha.unwrap_or(0.01),
                seed,
            }),
            ExperimentKind::Attract => {
                let d = AttractParams::default();
                Plan::Attract(AttractParams {
                    kind: self.profile_or(d.kind),
                    mu: self.mu.unwrap_or(d.mu),
                    c: self.c.unwrap_or(d.c),
                    epsilon: self.epsilon.unwrap_or(d.epsilon),
                    levels: self.levels.clone().unwrap_or(d.levels),
                    reps: self.reps.unwrap_or(d.reps),
                    h: self.h.unwrap_or(d.h),
                    window_left: self.window_left,
                    self_coupled: self.self_coupled.unwrap_or(d.self_coupled),
                    seed,
                })
            }
            ExperimentKind::Exits => {
                let d = ExitParams::default();
                Plan::Exits(ExitParams {
                    kind: self.profile_or(d.kind),
                    mu: self.mu.unwrap_or(d.mu),
                    c: self.c.unwrap_or(d.c),
                    levels: self.levels.clone().unwrap_or(d.levels),
                    reps: self.reps.unwrap_or(d.reps),
                    deltas: self.deltas.clone().unwrap_or(d.deltas),
                    h: self.h.unwrap_or(d.h),
                    window_left: self.window_left,
                    seed,
                })
            }
            ExperimentKind::Vertical => {
                let d = VerticalParams::default();
                Plan::Vertical(VerticalParams {
                    lambda: self.lambda.unwrap_or(d.lambda),
                    n: self.n.unwrap_or(d.n),
                    reps: self.reps.unwrap_or(d.reps),
                    h: self.h.unwrap_or(d.h),
                    window_left: self.window_left,
                    alpha: self.alpha.unwrap_or(d.alpha),
                    seed,
                })
            }
            ExperimentKind::DiscreteEquiv => Plan::DiscreteEquiv {
                users: self.users.unwrap_or(200),
                servers: self.servers.unwrap_or(200),
                seed,
            },
            ExperimentKind::Tasep => Plan::Tasep {
                reps: self.reps.unwrap_or(2000),
                horizon: self.horizon.unwrap_or(30.0),
                alpha: self.alpha.unwrap_or(0.01),
                seed,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapePlan {
    pub n: usize,
    pub h: f64,
    pub reps: usize,
    pub scaling_n: usize,
    pub scaling_reps: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// Fully resolved experiment parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    Burke(BurkeParams),
    Shape(ShapePlan),
    Attract(AttractParams),
    Exits(ExitParams),
    Vertical(VerticalParams),
    DiscreteEquiv {
        users: usize,
        servers: usize,
        seed: u64,
    },
    Tasep {
        reps: usize,
        horizon: f64,
        alpha: f64,
        seed: u64,
    },
}

fn parse_value<V: FromStr>(line: usize, key: &str, raw: &str, expected: &str) -> Result<V> {
    raw.parse()
        .map_err(|_| Error::config_at(line, format!("expected {expected} for {key}, got '{raw}'")))
}

fn parse_list<V: FromStr>(line: usize, key: &str, raw: &str, expected: &str) -> Result<Vec<V>> {
    raw.split(',')
        .map(|s| parse_value(line, key, s.trim(), expected))
        .collect()
}

/// Parses configuration text. Unknown keys and malformed values are
/// reported with their line number.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut pairs: Vec<(usize, &str, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| {
            Error::config_at(line, format!("expected 'key = value', got '{body}'"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        if pairs.iter().any(|(_, k, _)| *k == key) {
            return Err(Error::config_at(line, format!("duplicate key: {key}")));
        }
        pairs.push((line, key, value));
    }

    let experiment = match pairs.iter().find(|(_, k, _)| *k == "experiment") {
        Some((_, _, v)) => v.parse()?,
        None => return Err(Error::config("missing key: experiment")),
    };
    let mut cfg = ExperimentConfig::new(experiment);
    for (line, key, v) in pairs {
        let num = "a number";
        let int = "a non-negative integer";
        match key {
            "experiment" => {}
            "seed" => cfg.seed = parse_value(line, key, v, int)?,
            "h" => cfg.h = Some(parse_value(line, key, v, num)?),
            "window_left" => cfg.window_left = Some(parse_value(line, key, v, num)?),
            "mu" => cfg.mu = Some(parse_value(line, key, v, num)?),
            "c" => cfg.c = Some(parse_value(line, key, v, num)?),
            "epsilon" => cfg.epsilon = Some(parse_value(line, key, v, num)?),
            "levels" => cfg.levels = Some(parse_list(line, key, v, "a list of integers")?),
            "reps" => cfg.reps = Some(parse_value(line, key, v, int)?),
            "out" => cfg.out = Some(PathBuf::from(v)),
            "alpha" => cfg.alpha = Some(parse_value(line, key, v, num)?),
            "lambda" => cfg.lambda = Some(parse_value(line, key, v, num)?),
            "n" => cfg.n = Some(parse_value(line, key, v, int)?),
            "delta" => cfg.delta = Some(parse_value(line, key, v, num)?),
            "stages" => cfg.stages = Some(parse_value(line, key, v, int)?),
            "profile" => {
                cfg.profile = Some(
                    v.parse()
                        .map_err(|_| Error::config_at(line, format!("unknown profile: {v}")))?,
                )
            }
            "amplitude" => cfg.amplitude = Some(parse_value(line, key, v, num)?),
            "frequency" => cfg.frequency = Some(parse_value(line, key, v, num)?),
            "deltas" => cfg.deltas = Some(parse_list(line, key, v, "a list of numbers")?),
            "users" => cfg.users = Some(parse_value(line, key, v, int)?),
            "servers" => cfg.servers = Some(parse_value(line, key, v, int)?),
            "horizon" => cfg.horizon = Some(parse_value(line, key, v, num)?),
            "scaling_n" => cfg.scaling_n = Some(parse_value(line, key, v, int)?),
            "scaling_reps" => cfg.scaling_reps = Some(parse_value(line, key, v, int)?),
            "self_coupled" => cfg.self_coupled = Some(parse_value(line, key, v, "true or false")?),
            other => return Err(Error::config_at(line, format!("unknown key: {other}"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let cfg = parse_config("experiment = burke\nseed = 7").unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Burke);
        assert_eq!(cfg.seed, 7);
        match cfg.plan().unwrap() {
            Plan::Burke(p) => assert_eq!(
                p,
                BurkeParams {
                    seed: 7,
                    ..Default::default()
                }
            ),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_messages() {
        let e = parse_config("experiment = shape\nh = -0.1").unwrap_err();
        assert_eq!(e.to_string(), "h must be positive");
        let e = parse_config("experiment = warp").unwrap_err();
        assert_eq!(e.to_string(), "unknown experiment: warp");
        let e = parse_config("experiment = attract\n\nwarp_factor = 9").unwrap_err();
        assert_eq!(e.to_string(), "line 3: unknown key: warp_factor");
        let e = parse_config("experiment = attract\nreps = many").unwrap_err();
        assert_eq!(
            e.to_string(),
            "line 2: expected a non-negative integer for reps, got 'many'"
        );
        assert!(parse_config("experiment = attract\nlevels = 4, 4").is_err());
        assert!(parse_config("experiment = attract\nreps = 0").is_err());
        assert!(parse_config("seed = 3").is_err());
        assert!(parse_config("experiment = tasep\nseed = 1\nseed = 2").is_err());
    }

    #[test]
    fn comments_lists_and_profiles() {
        let text = "# attract run\nexperiment = attract   # trailing\nlevels = 4, 16,64\nprofile = sinusoid_arrival\namplitude = 2\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.levels, Some(vec![4, 16, 64]));
        match cfg.plan().unwrap() {
            Plan::Attract(p) => {
                assert_eq!(
                    p.kind,
                    ProfileKind::SinusoidArrival {
                        amplitude: 2.0,
                        frequency: 1.0
                    }
                );
                assert_eq!(p.reps, 200);
            }
            other => panic!("{other:?}"),
        }
    }
}
