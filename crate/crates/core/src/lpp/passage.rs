use crate::error::{Error, Result};
use crate::path::Environment;
use crate::scalar::Real;

/// Largest number of breakpoint sequences [`brute_lpp`] will enumerate.
pub const BRUTE_LIMIT: u128 = 1_000_000;

fn check_span<T: Real>(
    env: &Environment<T>,
    from: (usize, usize),
    to: (usize, usize),
) -> Result<()> {
    let ((z, k), (x, l)) = (from, to);
    if z > x || k > l {
        return Err(Error::Domain(format!(
            "({z}, {k}) is not below-left of ({x}, {l})"
        )));
    }
    if k == 0 || l > env.levels() {
        return Err(Error::Domain(format!(
            "levels {k}..={l} outside 1..={}",
            env.levels()
        )));
    }
    env.grid().check_index(x)?;
    Ok(())
}

/// Last-passage time `L((z, k), (x, l))` between grid points, by the row
/// recursion `G(i, j) = max(G(i, j−1) + ΔB^(i)_j, G(i−1, j))`.
pub fn lpp_point<T: Real>(
    env: &Environment<T>,
    from: (usize, usize),
    to: (usize, usize),
) -> Result<T> {
    check_span(env, from, to)?;
    let ((z, k), (x, l)) = (from, to);
    let first = env.line(k).values();
    let mut row: Vec<T> = first[z..=x].iter().map(|&v| v - first[z]).collect();
    for level in k + 1..=l {
        let b = &env.line(level).values()[z..=x];
        for i in 1..row.len() {
            row[i] = (row[i - 1] + (b[i] - b[i - 1])).max(row[i]);
        }
    }
    Ok(row[row.len() - 1])
}

/// `L((z_i, k), (x, n))` for every grid index `i <= x`, computed backwards
/// from the target.
pub fn passage_to<T: Real>(env: &Environment<T>, k: usize, x: usize, n: usize) -> Result<Vec<T>> {
    check_span(env, (0, k), (x, n))?;
    let top = env.line(n).values();
    let mut r: Vec<T> = (0..=x).map(|i| top[x] - top[i]).collect();
    for level in (k..n).rev() {
        let b = env.line(level).values();
        for i in (0..x).rev() {
            r[i] = (r[i + 1] + (b[i + 1] - b[i])).max(r[i]);
        }
    }
    Ok(r)
}

fn multichoose(points: u128, picks: u128) -> u128 {
    // C(points + picks − 1, picks), saturating
    let n = points + picks - 1;
    let mut c: u128 = 1;
    for i in 0..picks {
        c = c.saturating_mul(n - i) / (i + 1);
        if c > BRUTE_LIMIT * 1000 {
            return u128::MAX;
        }
    }
    c
}

/// Exhaustive maximum of the path weight over every nondecreasing sequence
/// of grid breakpoints. Refuses instances with more than [`BRUTE_LIMIT`]
/// sequences.
pub fn brute_lpp<T: Real>(
    env: &Environment<T>,
    from: (usize, usize),
    to: (usize, usize),
) -> Result<T> {
    check_span(env, from, to)?;
    let ((z, k), (x, l)) = (from, to);
    let count = multichoose((x - z + 1) as u128, (l - k) as u128);
    if count > BRUTE_LIMIT {
        return Err(Error::TooLarge {
            count,
            limit: BRUTE_LIMIT,
        });
    }

    fn best<T: Real>(
        env: &Environment<T>,
        line: usize,
        last: usize,
        start: usize,
        x: usize,
        acc: T,
    ) -> T {
        let b = env.line(line);
        if line == last {
            return acc + b.increment_idx(start, x);
        }
        (start..=x)
            .map(|next| {
                best(
                    env,
                    line + 1,
                    last,
                    next,
                    x,
                    acc + b.increment_idx(start, next),
                )
            })
            .fold(T::neg_infinity(), T::max)
    }
    Ok(best(env, k, l, z, x, T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{Grid, SampledPath};

    fn two_point_env(b1: f64, b2: f64) -> Environment<f64> {
        let g = Grid::new(0.0, 1.0, 2).unwrap();
        let l1 = SampledPath::new(g, vec![0.0, b1]).unwrap();
        let l2 = SampledPath::new(g, vec![0.0, b2]).unwrap();
        Environment::from_lines(g, vec![l1, l2]).unwrap()
    }

    #[test]
    fn two_line_breakpoint_choice() {
        // breakpoint at z = 1 collects 0.3; at z = 0 it collects −0.2
        let env = two_point_env(0.3, -0.2);
        assert_eq!(lpp_point(&env, (0, 1), (1, 2)).unwrap(), 0.3);
        assert_eq!(brute_lpp(&env, (0, 1), (1, 2)).unwrap(), 0.3);
        let env = two_point_env(-0.4, 0.1);
        assert_eq!(lpp_point(&env, (0, 1), (1, 2)).unwrap(), 0.1);
    }

    #[test]
    fn single_line_is_the_increment() {
        let g = Grid::covering(-1.0, 1.0, 0.1).unwrap();
        let env = Environment::sample(g, 3, 4);
        let b = env.line(2);
        assert_eq!(
            lpp_point(&env, (3, 2), (17, 2)).unwrap(),
            b.increment_idx(3, 17)
        );
        assert_eq!(
            brute_lpp(&env, (3, 2), (17, 2)).unwrap(),
            b.increment_idx(3, 17)
        );
    }

    #[test]
    fn three_sequences_with_one_interior_point() {
        let g = Grid::new(0.0, 0.5, 3).unwrap();
        let l1 = SampledPath::new(g, vec![0.0, 0.4, 0.1]).unwrap();
        let l2 = SampledPath::new(g, vec![0.0, -0.3, 0.5]).unwrap();
        let env = Environment::from_lines(g, vec![l1, l2]).unwrap();
        // breakpoint at 0, 0.5 or 1
        let expect = [0.5, 0.4 + 0.8, 0.1].into_iter().fold(f64::MIN, f64::max);
        assert!((brute_lpp(&env, (0, 1), (2, 2)).unwrap() - expect).abs() < 1e-15);
        assert!((lpp_point(&env, (0, 1), (2, 2)).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn backward_passage_agrees_with_forward() {
        let g = Grid::<f64>::covering(-0.5, 0.5, 0.1).unwrap();
        let env = Environment::sample(g, 4, 8);
        let back = passage_to(&env, 2, 9, 4).unwrap();
        for (i, &v) in back.iter().enumerate() {
            assert!((v - lpp_point(&env, (i, 2), (9, 4)).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn domain_and_size_errors() {
        let g = Grid::covering(-5.0, 5.0, 0.01).unwrap();
        let env = Environment::sample(g, 6, 1);
        assert!(matches!(
            lpp_point(&env, (10, 1), (5, 2)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            lpp_point(&env, (1, 3), (5, 2)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            lpp_point(&env, (1, 1), (5, 7)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            brute_lpp(&env, (0, 1), (900, 6)),
            Err(Error::TooLarge { .. })
        ));
    }
}
