use std::sync::Arc;

use brownian_tandem::lpp::{exit_points, variational_field};
use brownian_tandem::path::{make_profile, Environment, Grid, ProfileKind};
use brownian_tandem::queue::{iterated_empty_times, run_tandem};
use brownian_tandem::tabep::run_tabep;

fn setup(
    seed: u64,
    kind: ProfileKind,
    levels: usize,
) -> (Grid<f64>, Arc<Environment<f64>>, brownian_tandem::Profile) {
    let grid = Grid::covering(-30.0, 10.0, 0.02).unwrap();
    let env = Arc::new(Environment::sample(grid, levels, seed));
    let profile = make_profile(kind, 1.0, grid, seed + 1000).unwrap();
    (grid, env, profile)
}

const KINDS: [ProfileKind; 3] = [
    ProfileKind::BrownianWithDrift,
    ProfileKind::Linear,
    ProfileKind::SinusoidArrival {
        amplitude: 1.5,
        frequency: 2.0,
    },
];

#[test]
fn first_queue_is_first_level_minus_profile() {
    for (i, kind) in KINDS.into_iter().enumerate() {
        let (grid, env, p) = setup(10 + i as u64, kind, 1);
        let field = variational_field(&p, &env, 1).unwrap();
        let tandem = run_tandem(&p.arrival(), &env, 1.0, 1, 0).unwrap();
        for j in 0..grid.len() {
            let q = field.value(1, j) - p.path().value(j);
            assert!((q - tandem.queue(1).value(j)).abs() < 1e-9, "{kind} at {j}");
        }
    }
}

#[test]
fn departures_are_drift_minus_profile_increments() {
    for (i, kind) in KINDS.into_iter().enumerate() {
        let (grid, env, p) = setup(20 + i as u64, kind, 8);
        let field = variational_field(&p, &env, 8).unwrap();
        let tandem = run_tandem(&p.arrival(), &env, 1.0, 8, 0).unwrap();
        for k in 1..=8 {
            for j in 0..grid.len() {
                let d = grid.point(j) - field.profile_at(k, j);
                assert!(
                    (d - tandem.departure(k).value(j)).abs() < 1e-9,
                    "{kind} level {k} at {j}"
                );
            }
        }
    }
}

#[test]
fn particles_are_the_variational_field() {
    let (grid, env, p) = setup(31, ProfileKind::BrownianWithDrift, 10);
    let field = variational_field(&p, &env, 10).unwrap();
    let sys = run_tabep(p.path(), 1.0, &env, 10, 0).unwrap();
    for k in 0..=10 {
        for j in 0..grid.len() {
            assert!((sys.particle(k).value(j) - field.value(k, j)).abs() < 1e-9);
        }
    }
}

#[test]
fn iterated_empty_times_find_the_exit_point() {
    let mut compared = 0;
    for seed in 0..20 {
        let (grid, env, p) = setup(40 + seed, ProfileKind::BrownianWithDrift, 6);
        let field = variational_field(&p, &env, 6).unwrap();
        let tandem = run_tandem(&p.arrival(), &env, 1.0, 6, 0).unwrap();
        let exits = exit_points(&field);
        for n in [1, 3, 6] {
            for x in [grid.zero_index(), grid.len() - 1] {
                let times = iterated_empty_times(&tandem, x, n).unwrap();
                let i0 = grid.point(*times.last().unwrap());
                assert!(
                    (i0 - exits[n - 1][x]).abs() <= grid.step() + 1e-12,
                    "seed {seed} n {n}: {i0} vs {}",
                    exits[n - 1][x]
                );
                compared += 1;
            }
        }
    }
    assert_eq!(compared, 120);
}

#[test]
fn single_precision_tracks_double_precision() {
    let (grid, env, p) = setup(51, ProfileKind::BrownianWithDrift, 5);
    let env32 = Arc::new(
        Environment::from_lines(
            grid.cast::<f32>(),
            env.lines().iter().map(|l| l.cast()).collect(),
        )
        .unwrap(),
    );
    let p32 = brownian_tandem::path::Profile::from_path(p.path().cast(), 1.0f32).unwrap();
    let f64_field = variational_field(&p, &env, 5).unwrap();
    let f32_field = variational_field(&p32, &env32, 5).unwrap();
    for j in (0..grid.len()).step_by(37) {
        assert!((f64_field.value(5, j) - f32_field.value(5, j) as f64).abs() < 1e-3);
    }
}
