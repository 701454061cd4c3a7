//! Tabular one-step Q-learning, the classical comparison learner.

use rand::Rng;

use crate::env::{Cell, GridConfig, Move};
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_GAMMA: f64 = 0.9;

/// Action values for every (cell, action) pair, initialized to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    dims: (i32, i32, i32),
    n_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(grid: &GridConfig, n_actions: usize) -> Self {
        Self {
            dims: grid.dims,
            n_actions,
            values: vec![0.0; grid.cell_count() * n_actions],
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn offset(&self, cell: Cell) -> Result<usize> {
        let (sx, sy, sz) = self.dims;
        if !(0..sx).contains(&cell.x) || !(0..sy).contains(&cell.y) || !(0..sz).contains(&cell.z) {
            return Err(Error::invalid(format!("cell {cell} outside the table")));
        }
        Ok((((cell.x * sy + cell.y) * sz + cell.z) as usize) * self.n_actions)
    }

    pub fn row(&self, cell: Cell) -> Result<&[f64]> {
        let o = self.offset(cell)?;
        Ok(&self.values[o..o + self.n_actions])
    }

    pub fn get(&self, cell: Cell, action: usize) -> Result<f64> {
        self.row(cell)?
            .get(action)
            .copied()
            .ok_or_else(|| Error::invalid(format!("action {action} out of range")))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Highest-valued action, lowest index on ties.
    pub fn greedy(&self, cell: Cell) -> Result<usize> {
        let row = self.row(cell)?;
        let mut best = 0;
        for (a, v) in row.iter().enumerate() {
            if *v > row[best] {
                best = a;
            }
        }
        Ok(best)
    }

    pub fn select<R: Rng + ?Sized>(&self, cell: Cell, epsilon: f64, rng: &mut R) -> Result<(Move, bool)> {
        if rng.gen::<f64>() < epsilon {
            return Ok((Move::from_index(rng.gen_range(0..self.n_actions))?, true));
        }
        Ok((Move::from_index(self.greedy(cell)?)?, false))
    }
}

/// `Q(s,a) += alpha (r + gamma max_a' Q(s',a') - Q(s,a))`; terminal
/// transitions do not bootstrap.
#[allow(clippy::too_many_arguments)]
pub fn baseline_step(
    table: &mut QTable,
    state: Cell,
    action: usize,
    reward: f64,
    next_state: Cell,
    terminal: bool,
    alpha: f64,
    gamma: f64,
) -> Result<()> {
    let future = if terminal {
        0.0
    } else {
        table
            .row(next_state)?
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let q = table.get(state, action)?;
    let o = table.offset(state)?;
    table.values[o + action] = q + alpha * (reward + gamma * future - q);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> QTable {
        QTable::new(&GridConfig::default(), 6)
    }

    #[test]
    fn zero_alpha_is_noop() {
        let mut t = table();
        baseline_step(&mut t, Cell::ORIGIN, 2, 5.0, Cell::new(1, 0, 0), false, 0.0, 0.9).unwrap();
        assert_eq!(t, table());
    }

    #[test]
    fn terminal_update_and_convergence() {
        let mut t = table();
        let s = Cell::new(9, 9, 1);
        let g = Cell::new(9, 9, 2);
        baseline_step(&mut t, s, 4, 8.0, g, true, 0.1, 0.9).unwrap();
        assert!((t.get(s, 4).unwrap() - 0.8).abs() < 1e-15);
        let mut prev = t.get(s, 4).unwrap();
        for _ in 0..200 {
            baseline_step(&mut t, s, 4, 8.0, g, true, 0.1, 0.9).unwrap();
            let q = t.get(s, 4).unwrap();
            assert!(q > prev && q < 8.0);
            prev = q;
        }
        assert!((prev - 8.0).abs() < 1e-6);
    }

    #[test]
    fn unit_alpha_terminal_sets_reward() {
        let mut t = table();
        baseline_step(&mut t, Cell::ORIGIN, 0, -2.0, Cell::ORIGIN, true, 1.0, 0.9).unwrap();
        assert_eq!(t.get(Cell::ORIGIN, 0).unwrap(), -2.0);
    }

    #[test]
    fn greedy_ties_lowest() {
        let mut t = table();
        assert_eq!(t.greedy(Cell::ORIGIN).unwrap(), 0);
        baseline_step(&mut t, Cell::ORIGIN, 3, 1.0, Cell::ORIGIN, true, 1.0, 0.9).unwrap();
        baseline_step(&mut t, Cell::ORIGIN, 5, 1.0, Cell::ORIGIN, true, 1.0, 0.9).unwrap();
        assert_eq!(t.greedy(Cell::ORIGIN).unwrap(), 3);
    }

    #[test]
    fn out_of_range_cells_are_rejected() {
        let t = table();
        assert!(t.row(Cell::new(10, 0, 0)).is_err());
        assert!(t.get(Cell::ORIGIN, 6).is_err());
    }
}
