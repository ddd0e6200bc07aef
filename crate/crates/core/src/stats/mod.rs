//! Statistical machinery and the limit-theorem experiments.

pub mod experiments;
pub mod ks;
pub mod summary;

pub use experiments::{
    attractiveness_experiment, burke_test, discrete_equivalence, exit_experiment,
    gamma_vertical_test, tasep_agreement, AttractParams, BurkeOutcome, BurkeParams,
    ConvergenceCurve, CurveRow, DiscreteEquivalence, ExitParams, ExitRow, TasepAgreement,
    VerticalOutcome, VerticalParams,
};
pub use ks::KsReport;
