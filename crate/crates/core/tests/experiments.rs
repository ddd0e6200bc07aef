use brownian_tandem::path::{make_profile, Environment, Grid, ProfileKind};
use brownian_tandem::seed::derive;
use brownian_tandem::stats::ks::{ks_test, normal_cdf};
use brownian_tandem::stats::{
    burke_test, gamma_vertical_test, tasep_agreement, BurkeParams, VerticalParams,
};
use brownian_tandem::tabep::run_tabep;

#[test]
fn vertical_law_with_faster_drift() {
    let out = gamma_vertical_test(&VerticalParams {
        lambda: 2.0,
        n: 10,
        reps: 500,
        seed: 5,
        ..Default::default()
    })
    .unwrap();
    assert!((out.mean - 5.0).abs() < 0.3, "mean {}", out.mean);
    assert!(out.report.accept, "{}", out.report);
    assert!(!out.invalidated);
}

#[test]
fn poisson_and_coupled_exclusion_agree() {
    let a = tasep_agreement(1500, 30.0, 0.01, 8).unwrap();
    assert_eq!(a.censored, 0);
    for (k, r) in &a.reports {
        assert!(r.accept, "pair {k}: {r}");
    }
}

#[test]
fn doubled_service_rate_with_shorter_increments() {
    let out = burke_test(&BurkeParams {
        mu: 2.0,
        delta: 0.25,
        seed: 12,
        ..Default::default()
    })
    .unwrap();
    assert!(out.report.accept && !out.invalidated, "{}", out.report);
    let out = burke_test(&BurkeParams {
        stages: 3,
        increments: 1000,
        seed: 13,
        ..Default::default()
    })
    .unwrap();
    assert!(out.report.accept && !out.invalidated, "{}", out.report);
}

#[test]
fn reflected_particles_forget_a_periodic_start() {
    // X^(n)(1) − X^(n)(0) − μ over replications, with a sinusoidal X^(0)
    let reps = 300;
    let grid = Grid::covering(-220.0, 2.0, 0.01).unwrap();
    let (zero, one) = (grid.zero_index(), grid.index_of(1.0).unwrap());
    let kind = ProfileKind::SinusoidArrival {
        amplitude: 2.0,
        frequency: 1.0,
    };
    let mut start = Vec::with_capacity(reps);
    let mut late = Vec::with_capacity(reps);
    for rep in 0..reps as u64 {
        let seed = derive(77, rep);
        let x0 = make_profile(kind, 1.0, grid, derive(seed, 0)).unwrap();
        let env = Environment::sample(grid, 64, derive(seed, 1));
        let sys = run_tabep(x0.path(), 1.0, &env, 64, 0).unwrap();
        assert_eq!(sys.boundary_hits(zero), 0);
        start.push(sys.centered(0).value(one));
        late.push(sys.centered(64).value(one));
    }
    assert!(
        ks_test(&late, normal_cdf(0.0, 1.0), "normal", 0.01)
            .unwrap()
            .accept
    );
    assert!(
        !ks_test(&start, normal_cdf(0.0, 1.0), "normal", 0.01)
            .unwrap()
            .accept
    );
}
