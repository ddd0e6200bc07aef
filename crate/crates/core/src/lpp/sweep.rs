use crate::path::{Profile, SampledPath};
use crate::scalar::Real;

/// Borrowed view of one level of a variational field.
#[derive(Debug, Clone, Copy)]
pub struct LevelRow<'a, T> {
    pub values: &'a [T],
    /// Grid index of the rightmost exit point of each cell.
    pub exits: &'a [usize],
}

impl<T: Real> LevelRow<'_, T> {
    /// `M(i, j) = L(j) − L(i)`.
    #[inline]
    pub fn increment(&self, i: usize, j: usize) -> T {
        self.values[j] - self.values[i]
    }

    /// Exit point at the first grid index: the maximiser may lie outside the
    /// window.
    #[inline]
    pub fn at_boundary(&self, j: usize) -> bool {
        self.exits[j] == 0
    }
}

/// Level-by-level evaluation of the variational field, keeping one row.
///
/// Level 0 is the profile itself with every cell its own exit point. Each
/// call to [`advance`](Self::advance) applies
/// `L(j, k) = max(L(j−1, k) + ΔB^(k)_j, L(j, k−1))`, carrying the exit of
/// the chosen predecessor; on an exact tie the larger exit wins.
#[derive(Debug, Clone)]
pub struct LevelSweep<T> {
    level: usize,
    values: Vec<T>,
    exits: Vec<usize>,
}

impl<T: Real> LevelSweep<T> {
    pub fn new(profile: &Profile<T>) -> Self {
        let values = profile.path().values().to_vec();
        let exits = (0..values.len()).collect();
        LevelSweep {
            level: 0,
            values,
            exits,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn row(&self) -> LevelRow<'_, T> {
        LevelRow {
            values: &self.values,
            exits: &self.exits,
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn exits(&self) -> &[usize] {
        &self.exits
    }

    /// Moves to the next level using `line` (must share the profile grid).
    pub fn advance(&mut self, line: &SampledPath<T>) {
        let b = line.values();
        assert_eq!(b.len(), self.values.len(), "line and sweep grids differ");
        // cell 0 can only be entered from below
        for j in 1..b.len() {
            let along = self.values[j - 1] + (b[j] - b[j - 1]);
            let up = self.values[j];
            if along > up {
                self.values[j] = along;
                self.exits[j] = self.exits[j - 1];
            } else if along == up {
                self.exits[j] = self.exits[j].max(self.exits[j - 1]);
            }
        }
        self.level += 1;
    }
}
