//! Markovian tandem queues, exponential last-passage percolation and TASEP.
//!
//! All three are driven by one table of service times `X(n, k)` (user `n`,
//! server `k`). Indices are 1-based throughout; `D(n, 0) = D(0, k) = 0`.
//!
//! Label convention for the exclusion process: particle `k` starts at site
//! `k − 1` and hole `n` at site `−n`. Particle `k` exchanges places with
//! hole `n` exactly at time `D(n, k)`.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::io::Write;

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seed;

/// Service times `X(n, k) >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable<T> {
    users: usize,
    servers: usize,
    data: Vec<T>,
}

impl<T: Real> WeightTable<T> {
    /// i.i.d. `Exp(1)` entries.
    pub fn exp1(users: usize, servers: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let data = (0..users * servers)
            .map(|_| T::lit(rng.sample::<f64, _>(Exp1)))
            .collect();
        WeightTable {
            users,
            servers,
            data,
        }
    }

    pub fn constant(users: usize, servers: usize, value: T) -> Self {
        WeightTable {
            users,
            servers,
            data: vec![value; users * servers],
        }
    }

    /// Row `n − 1` holds `X(n, 1..=K)`.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let users = rows.len();
        let servers = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != servers) {
            return Err(Error::InvalidParameter("ragged weight table".into()));
        }
        let data: Vec<T> = rows.into_iter().flatten().collect();
        if data.iter().any(|&x| !(x >= T::zero())) {
            return Err(Error::InvalidParameter(
                "weights must be non-negative".into(),
            ));
        }
        Ok(WeightTable {
            users,
            servers,
            data,
        })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn servers(&self) -> usize {
        self.servers
    }

    #[inline]
    pub fn get(&self, n: usize, k: usize) -> T {
        self.data[(n - 1) * self.servers + (k - 1)]
    }
}

/// `D(n, k)` for `1 <= n <= N`, `1 <= k <= K`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepartureMatrix<T> {
    users: usize,
    servers: usize,
    data: Vec<T>,
}

impl<T: Real> DepartureMatrix<T> {
    fn zeros(users: usize, servers: usize) -> Self {
        DepartureMatrix {
            users,
            servers,
            data: vec![T::zero(); users * servers],
        }
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn servers(&self) -> usize {
        self.servers
    }

    /// `D(n, k)`, zero when either index is 0.
    #[inline]
    pub fn get(&self, n: usize, k: usize) -> T {
        if n == 0 || k == 0 {
            T::zero()
        } else {
            self.data[(n - 1) * self.servers + (k - 1)]
        }
    }

    #[inline]
    fn set(&mut self, n: usize, k: usize, v: T) {
        self.data[(n - 1) * self.servers + (k - 1)] = v;
    }

    /// Users present at server `l` at time `t`: those that left server
    /// `l − 1` (all users have "left" server 0 at time 0) but not server `l`.
    pub fn users_in_server(&self, l: usize, t: T) -> usize {
        (1..=self.users)
            .filter(|&n| self.get(n, l - 1) <= t && t < self.get(n, l))
            .count()
    }

    /// Non-decreasing in each index.
    pub fn is_monotone(&self) -> bool {
        (1..=self.users).all(|n| {
            (1..=self.servers).all(|k| {
                self.get(n, k) >= self.get(n - 1, k) && self.get(n, k) >= self.get(n, k - 1)
            })
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.users == other.users
            && self.servers == other.servers
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.as_f64().to_bits() == b.as_f64().to_bits())
    }
}

/// Tandem departure times `D(n, k) = X(n, k) + max(D(n, k−1), D(n−1, k))`,
/// filled user by user.
pub fn lindley<T: Real>(weights: &WeightTable<T>) -> DepartureMatrix<T> {
    let mut d: DepartureMatrix<T> = DepartureMatrix::zeros(weights.users, weights.servers);
    for n in 1..=weights.users {
        for k in 1..=weights.servers {
            let v = weights.get(n, k) + d.get(n, k - 1).max(d.get(n - 1, k));
            d.set(n, k, v);
        }
    }
    d
}

/// Last-passage times over up-right lattice paths, filled by anti-diagonals
/// with the Bellman step `L(n, k) = W(n, k) + max(L(n, k−1), L(n−1, k))`.
pub fn exp_lpp<T: Real>(weights: &WeightTable<T>) -> DepartureMatrix<T> {
    let (nn, kk) = (weights.users, weights.servers);
    let mut l: DepartureMatrix<T> = DepartureMatrix::zeros(nn, kk);
    for diag in 2..=nn + kk {
        let lo = diag.saturating_sub(kk).max(1);
        let hi = (diag - 1).min(nn);
        for n in lo..=hi {
            let k = diag - n;
            let v = weights.get(n, k) + l.get(n, k - 1).max(l.get(n - 1, k));
            l.set(n, k, v);
        }
    }
    l
}

/// Largest number of lattice paths [`brute_exp_lpp`] will enumerate.
pub const BRUTE_PATH_LIMIT: u128 = 1_000_000;

/// Maximum path weight over every up-right path from `(1, 1)` to `(n, k)`.
pub fn brute_exp_lpp<T: Real>(weights: &WeightTable<T>, n: usize, k: usize) -> Result<T> {
    if n == 0 || k == 0 || n > weights.users || k > weights.servers {
        return Err(Error::Domain(format!("({n}, {k}) outside the table")));
    }
    let mut count: u128 = 1;
    for i in 0..(k - 1) as u128 {
        count = count * ((n + k - 2) as u128 - i) / (i + 1);
        if count > BRUTE_PATH_LIMIT {
            return Err(Error::TooLarge {
                count,
                limit: BRUTE_PATH_LIMIT,
            });
        }
    }

    fn walk<T: Real>(w: &WeightTable<T>, n: usize, k: usize, tn: usize, tk: usize, acc: T) -> T {
        let acc = acc + w.get(n, k);
        if n == tn && k == tk {
            return acc;
        }
        let mut best = T::neg_infinity();
        if n < tn {
            best = best.max(walk(w, n + 1, k, tn, tk, acc));
        }
        if k < tk {
            best = best.max(walk(w, n, k + 1, tn, tk, acc));
        }
        best
    }
    Ok(walk(weights, 1, 1, n, k, T::zero()))
}

/// One particle–hole exchange: particle `particle` jumps left onto
/// `position`, hole `hole` moves to `position + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapEvent<T> {
    pub time: T,
    pub particle: usize,
    pub hole: usize,
    pub position: i64,
}

/// Event log of an exclusion process started from particles on
/// `0..particles` and holes on the negative sites.
#[derive(Debug, Clone, PartialEq)]
pub struct TasepTrajectory<T> {
    particles: usize,
    events: Vec<SwapEvent<T>>,
}

impl<T: Real> TasepTrajectory<T> {
    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn events(&self) -> &[SwapEvent<T>] {
        &self.events
    }

    /// Time particle `particle` exchanged with hole `hole`, if it did.
    pub fn swap_time(&self, particle: usize, hole: usize) -> Option<T> {
        self.events
            .iter()
            .find(|e| e.particle == particle && e.hole == hole)
            .map(|e| e.time)
    }

    /// Positions of particles `1..=particles` at time `t` (events at `t`
    /// included).
    pub fn positions_at(&self, t: T) -> Vec<i64> {
        let mut pos: Vec<i64> = (0..self.particles as i64).collect();
        for e in self.events.iter().take_while(|e| e.time <= t) {
            pos[e.particle - 1] = e.position;
        }
        pos
    }

    /// Replays the log from the initial configuration and checks that every
    /// event moves a particle onto the adjacent empty site holding the named
    /// hole, in non-decreasing time, and that particle order is kept.
    pub fn audit(&self) -> Result<()> {
        let mut pos: Vec<i64> = (0..self.particles as i64).collect();
        let mut holes: HashMap<i64, usize> = HashMap::new();
        let hole_at = |holes: &HashMap<i64, usize>, site: i64| {
            holes
                .get(&site)
                .copied()
                .or((site < 0).then_some((-site) as usize))
        };
        let mut last = T::neg_infinity();
        for (i, e) in self.events.iter().enumerate() {
            if e.time < last {
                return Err(Error::Consistency(format!("event {i} out of time order")));
            }
            last = e.time;
            let k = e.particle;
            if k == 0 || k > self.particles {
                return Err(Error::Consistency(format!(
                    "event {i}: unknown particle {k}"
                )));
            }
            let from = pos[k - 1];
            if e.position != from - 1 {
                return Err(Error::Consistency(format!(
                    "event {i}: particle {k} at {from} cannot reach {}",
                    e.position
                )));
            }
            if k > 1 && pos[k - 2] == e.position {
                return Err(Error::Consistency(format!(
                    "event {i}: site {} occupied by particle {}",
                    e.position,
                    k - 1
                )));
            }
            if hole_at(&holes, e.position) != Some(e.hole) {
                return Err(Error::Consistency(format!(
                    "event {i}: hole {} is not at site {}",
                    e.hole, e.position
                )));
            }
            holes.remove(&e.position);
            holes.insert(from, e.hole);
            pos[k - 1] = e.position;
            if pos.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Consistency(format!(
                    "event {i}: particle order broken"
                )));
            }
        }
        Ok(())
    }

    /// `time,particle,hole,position` rows after a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "time,particle,hole,position")?;
        for e in &self.events {
            writeln!(out, "{},{},{},{}", e.time, e.particle, e.hole, e.position)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Pending<T> {
    time: T,
    hole: usize,
    particle: usize,
}

impl<T: Real> PartialEq for Pending<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Pending<T> {}

impl<T: Real> PartialOrd for Pending<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Pending<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // equal times only arise with zero weights; the anti-diagonal index
        // then orders a swap after the swaps that made it possible
        self.time
            .partial_cmp(&other.time)
            .expect("finite event times")
            .then((self.hole + self.particle).cmp(&(other.hole + other.particle)))
            .then(self.hole.cmp(&other.hole))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Site {
    Particle(usize),
    Hole(usize),
}

/// Event-driven exclusion process with one exponential clock per
/// particle–hole pair: when particle `k` and hole `n` become neighbours at
/// time `t`, their exchange fires at `t + X(n, k)`. Also returns the swap
/// times as a departure matrix.
pub fn tasep_coupled<T: Real>(
    weights: &WeightTable<T>,
) -> Result<(TasepTrajectory<T>, DepartureMatrix<T>)> {
    let (nn, kk) = (weights.users, weights.servers);
    let mut swaps = DepartureMatrix::zeros(nn, kk);
    let mut events = Vec::with_capacity(nn * kk);
    if nn == 0 || kk == 0 {
        return Ok((
            TasepTrajectory {
                particles: kk,
                events,
            },
            swaps,
        ));
    }
    // sites −N..=K−1 stored at offset N
    let offset = nn as i64;
    let idx = |site: i64| (site + offset) as usize;
    let mut sites: Vec<Site> = (-offset..kk as i64)
        .map(|s| {
            if s < 0 {
                Site::Hole((-s) as usize)
            } else {
                Site::Particle(s as usize + 1)
            }
        })
        .collect();
    let mut particle_pos: Vec<i64> = (0..kk as i64).collect();

    let mut queue = BinaryHeap::new();
    queue.push(Reverse(Pending {
        time: weights.get(1, 1),
        hole: 1,
        particle: 1,
    }));
    while let Some(Reverse(Pending {
        time,
        hole,
        particle,
    })) = queue.pop()
    {
        let p = particle_pos[particle - 1];
        if sites[idx(p - 1)] != Site::Hole(hole) || sites[idx(p)] != Site::Particle(particle) {
            return Err(Error::Consistency(format!(
                "particle {particle} and hole {hole} are not adjacent at t = {time}"
            )));
        }
        sites[idx(p - 1)] = Site::Particle(particle);
        sites[idx(p)] = Site::Hole(hole);
        particle_pos[particle - 1] = p - 1;
        swaps.set(hole, particle, time);
        events.push(SwapEvent {
            time,
            particle,
            hole,
            position: p - 1,
        });

        // the particle meets the next hole on its left
        if hole < nn && p - 2 >= -offset && sites[idx(p - 2)] == Site::Hole(hole + 1) {
            queue.push(Reverse(Pending {
                time: weights.get(hole + 1, particle) + time,
                hole: hole + 1,
                particle,
            }));
        }
        // the hole meets the next particle on its right
        if particle < kk && sites[idx(p + 1)] == Site::Particle(particle + 1) {
            queue.push(Reverse(Pending {
                time: weights.get(hole, particle + 1) + time,
                hole,
                particle: particle + 1,
            }));
        }
    }
    Ok((
        TasepTrajectory {
            particles: kk,
            events,
        },
        swaps,
    ))
}

/// Direct simulation: every particle carries a rate-1 exponential clock,
/// redrawn after each ring; a ring moves the particle one site left when
/// that site is empty and is ignored otherwise. Runs until `horizon`.
pub fn tasep_poisson(seed: u64, particles: usize, horizon: f64) -> TasepTrajectory<f64> {
    let mut rng = seed::rng(seed);
    let mut pos: Vec<i64> = (0..particles as i64).collect();
    let mut holes: HashMap<i64, usize> = HashMap::new();
    let mut events = Vec::new();
    let mut clocks: BinaryHeap<Reverse<Pending<f64>>> = (1..=particles)
        .map(|k| {
            Reverse(Pending {
                time: rng.sample::<f64, _>(Exp1),
                hole: 0,
                particle: k,
            })
        })
        .collect();
    while let Some(Reverse(Pending { time, particle, .. })) = clocks.pop() {
        if time > horizon {
            break;
        }
        let p = pos[particle - 1];
        let target = p - 1;
        let blocked = particle > 1 && pos[particle - 2] == target;
        if !blocked {
            let hole = holes.remove(&target).unwrap_or((-target) as usize);
            holes.insert(p, hole);
            pos[particle - 1] = target;
            events.push(SwapEvent {
                time,
                particle,
                hole,
                position: target,
            });
        }
        let next = time + rng.sample::<f64, _>(Exp1);
        clocks.push(Reverse(Pending {
            time: next,
            hole: 0,
            particle,
        }));
    }
    TasepTrajectory { particles, events }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> WeightTable<f64> {
        WeightTable::from_rows(vec![vec![0.5, 1.0], vec![2.0, 0.25]]).unwrap()
    }

    #[test]
    fn constant_weights_count_antidiagonals() {
        let d = lindley(&WeightTable::constant(7, 5, 1.0));
        for n in 1..=7 {
            for k in 1..=5 {
                assert_eq!(d.get(n, k), (n + k - 1) as f64);
            }
        }
        let w = WeightTable::constant(1, 1, 0.7);
        assert_eq!(lindley(&w).get(1, 1), 0.7);
        assert_eq!(exp_lpp(&w).get(1, 1), 0.7);
        assert_eq!(brute_exp_lpp(&w, 1, 1).unwrap(), 0.7);
    }

    #[test]
    fn two_by_two_example() {
        let w = small();
        assert_eq!(lindley(&w).get(2, 2), 2.75);
        assert_eq!(exp_lpp(&w).get(2, 2), 2.75);
        assert_eq!(brute_exp_lpp(&w, 2, 2).unwrap(), 2.75);
        assert_eq!(tasep_coupled(&w).unwrap().1.get(2, 2), 2.75);
    }

    #[test]
    fn constant_weight_swap_schedule() {
        let (traj, _) = tasep_coupled(&WeightTable::constant(3, 3, 1.0)).unwrap();
        assert_eq!(traj.swap_time(1, 1), Some(1.0));
        assert_eq!(traj.swap_time(2, 1), Some(2.0));
        assert_eq!(traj.swap_time(1, 2), Some(2.0));
        assert_eq!(traj.events().len(), 9);
        traj.audit().unwrap();
    }

    #[test]
    fn zero_weights_keep_causal_order() {
        let w = WeightTable::constant(4, 4, 0.0);
        let (traj, d) = tasep_coupled(&w).unwrap();
        traj.audit().unwrap();
        assert!(d.bitwise_eq(&lindley(&w)));
    }

    #[test]
    fn random_tables_agree_three_ways() {
        for seed in 0..10 {
            let w = WeightTable::<f64>::exp1(13, 9, seed);
            let d = lindley(&w);
            assert!(d.bitwise_eq(&exp_lpp(&w)));
            let (traj, t) = tasep_coupled(&w).unwrap();
            assert!(d.bitwise_eq(&t));
            assert!(d.is_monotone());
            traj.audit().unwrap();
        }
    }

    #[test]
    fn audit_catches_a_forged_jump() {
        let (mut traj, _) = tasep_coupled(&WeightTable::<f64>::exp1(3, 3, 1)).unwrap();
        traj.events[0].hole = 2;
        assert!(traj.audit().is_err());
        let (mut traj, _) = tasep_coupled(&WeightTable::<f64>::exp1(3, 3, 1)).unwrap();
        traj.events.swap(0, 1);
        assert!(traj.audit().is_err());
    }

    #[test]
    fn brute_refuses_large_tables() {
        let w = WeightTable::<f64>::exp1(30, 30, 0);
        assert!(matches!(
            brute_exp_lpp(&w, 30, 30),
            Err(Error::TooLarge { .. })
        ));
        assert!(brute_exp_lpp(&w, 31, 1).is_err());
    }

    #[test]
    fn poisson_simulator_basics() {
        assert!(tasep_poisson(1, 0, 10.0).events().is_empty());
        let traj = tasep_poisson(3, 5, 20.0);
        traj.audit().unwrap();
        let mut csv = Vec::new();
        traj.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv)
            .unwrap()
            .starts_with("time,particle,hole,position\n"));
    }
}
