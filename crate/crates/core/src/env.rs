//! The dynamic 3D grid world: obstacles, movement and the extrinsic reward.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Cell {
    pub const ORIGIN: Cell = Cell { x: 0, y: 0, z: 0 };

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Self { x, y, z }
    }

    pub fn offset(self, (dx, dy, dz): (i32, i32, i32)) -> Self {
        Self::new(self.x + dx, self.y + dy, self.z + dz)
    }

    /// Raw integer coordinates as a real 3-vector.
    pub fn as_vector(self) -> [f64; 3] {
        [f64::from(self.x), f64::from(self.y), f64::from(self.z)]
    }

    pub fn coordinate_sum(self) -> i32 {
        self.x + self.y + self.z
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// The six axis-aligned moves. The discriminant is the action index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
    UpZ = 4,
    DownZ = 5,
}

pub const N_ACTIONS: usize = 6;

impl Move {
    pub const ALL: [Move; N_ACTIONS] = [
        Move::Up,
        Move::Down,
        Move::Left,
        Move::Right,
        Move::UpZ,
        Move::DownZ,
    ];

    pub fn from_index(index: usize) -> Result<Self> {
        Self::ALL
            .get(index)
            .copied()
            .ok_or_else(|| Error::invalid(format!("action index {index} out of range")))
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Unit displacement: up/down move along y, left/right along x.
    pub fn delta(self) -> (i32, i32, i32) {
        match self {
            Move::Up => (0, 1, 0),
            Move::Down => (0, -1, 0),
            Move::Left => (-1, 0, 0),
            Move::Right => (1, 0, 0),
            Move::UpZ => (0, 0, 1),
            Move::DownZ => (0, 0, -1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub dims: (i32, i32, i32),
    pub goal: Cell,
    pub obstacle_fraction: f64,
    pub obstacle_refresh_every: u64,
    pub max_steps: u32,
    pub n_agents: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dims: (10, 10, 3),
            goal: Cell::new(9, 9, 2),
            obstacle_fraction: 0.05,
            obstacle_refresh_every: 100,
            max_steps: 1000,
            n_agents: 2,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        let (sx, sy, sz) = self.dims;
        if sx <= 0 || sy <= 0 || sz <= 0 {
            return Err(Error::config(format!("grid dims must be positive, got {:?}", self.dims)));
        }
        if !self.contains(self.goal) {
            return Err(Error::config(format!("goal {} lies outside the grid", self.goal)));
        }
        if self.goal == Cell::ORIGIN {
            return Err(Error::config("goal must differ from the start cell (0,0,0)"));
        }
        if !(0.0..1.0).contains(&self.obstacle_fraction) {
            return Err(Error::config(format!(
                "obstacle fraction must be in [0, 1), got {}",
                self.obstacle_fraction
            )));
        }
        // start and goal are never obstacles, and at least one more cell stays free
        if self.obstacle_count() + 3 > self.cell_count() {
            return Err(Error::config("obstacle fraction leaves no free path cell"));
        }
        if self.max_steps == 0 {
            return Err(Error::config("max_steps must be positive"));
        }
        if self.n_agents == 0 {
            return Err(Error::config("n_agents must be positive"));
        }
        if self.obstacle_refresh_every == 0 {
            return Err(Error::config("obstacle_refresh_every must be positive"));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        (self.dims.0 * self.dims.1 * self.dims.2) as usize
    }

    pub fn obstacle_count(&self) -> usize {
        (self.obstacle_fraction * self.cell_count() as f64).floor() as usize
    }

    pub fn contains(&self, c: Cell) -> bool {
        (0..self.dims.0).contains(&c.x) && (0..self.dims.1).contains(&c.y) && (0..self.dims.2).contains(&c.z)
    }

    /// Denominator of the progress term: `size_x + size_y + size_z - 3`.
    fn progress_denominator(&self) -> f64 {
        f64::from(self.dims.0 + self.dims.1 + self.dims.2 - 3)
    }

    fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.dims.0).flat_map(move |x| {
            (0..self.dims.1).flat_map(move |y| (0..self.dims.2).map(move |z| Cell::new(x, y, z)))
        })
    }
}

pub fn manhattan_distance(pos: Cell, goal: Cell) -> u32 {
    pos.x.abs_diff(goal.x) + pos.y.abs_diff(goal.y) + pos.z.abs_diff(goal.z)
}

/// +8 at the goal, -2 for bumping into an obstacle, otherwise the
/// progress/distance shaping term floored at -8.
pub fn extrinsic_reward(next_pos: Cell, moved_onto_obstacle: bool, config: &GridConfig) -> f64 {
    if next_pos == config.goal {
        return 8.0;
    }
    if moved_onto_obstacle {
        return -2.0;
    }
    let progress = f64::from(next_pos.coordinate_sum()) / config.progress_denominator();
    let distance = f64::from(manhattan_distance(next_pos, config.goal));
    (-0.001 + 0.08 * progress - 0.01 * distance).max(-8.0)
}

/// Samples `floor(fraction * cells)` distinct obstacle cells, never covering
/// the start, the goal, or any cell in `keep_free`.
///
/// Draws are repeated until the start still connects to the goal; after a
/// bounded number of attempts the last draw is kept.
pub fn sample_obstacles<R: Rng + ?Sized>(
    config: &GridConfig,
    keep_free: &[Cell],
    rng: &mut R,
) -> BTreeSet<Cell> {
    const MAX_ATTEMPTS: usize = 64;

    let count = config.obstacle_count();
    if count == 0 {
        return BTreeSet::new();
    }
    let candidates: Vec<Cell> = config
        .cells()
        .filter(|&c| c != Cell::ORIGIN && c != config.goal && !keep_free.contains(&c))
        .collect();
    let count = count.min(candidates.len());

    let mut chosen = BTreeSet::new();
    for _ in 0..MAX_ATTEMPTS {
        chosen = candidates.choose_multiple(rng, count).copied().collect();
        if goal_reachable(config, &chosen) {
            break;
        }
    }
    chosen
}

fn goal_reachable(config: &GridConfig, obstacles: &BTreeSet<Cell>) -> bool {
    let mut seen = BTreeSet::from([Cell::ORIGIN]);
    let mut queue = VecDeque::from([Cell::ORIGIN]);
    while let Some(c) = queue.pop_front() {
        if c == config.goal {
            return true;
        }
        for m in Move::ALL {
            let n = c.offset(m.delta());
            if config.contains(n) && !obstacles.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub positions: Vec<Cell>,
    pub obstacles: BTreeSet<Cell>,
    /// Per-agent flag set once the agent reaches the goal.
    pub reached: Vec<bool>,
    pub step_count: u32,
    pub episode_index: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next_position: Cell,
    pub extrinsic_reward: f64,
    pub reached_goal: bool,
    pub collided: bool,
}

/// Grid world owning its configuration and current state.
///
/// Agents move one at a time; [`GridWorld::tick`] closes a time step.
#[derive(Debug, Clone)]
pub struct GridWorld {
    config: GridConfig,
    state: EnvState,
}

impl GridWorld {
    pub fn new<R: Rng + ?Sized>(config: GridConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let obstacles = sample_obstacles(&config, &[], rng);
        Ok(Self::with_obstacles(config, obstacles))
    }

    /// Builds a world with an explicit obstacle set. Start and goal cells are
    /// removed from the set if present.
    pub fn with_obstacles(config: GridConfig, mut obstacles: BTreeSet<Cell>) -> Self {
        obstacles.remove(&Cell::ORIGIN);
        obstacles.remove(&config.goal);
        let n = config.n_agents;
        Self {
            state: EnvState {
                positions: vec![Cell::ORIGIN; n],
                obstacles,
                reached: vec![false; n],
                step_count: 0,
                episode_index: 0,
            },
            config,
        }
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn position(&self, agent: usize) -> Cell {
        self.state.positions[agent]
    }

    pub fn distance_to_goal(&self, agent: usize) -> u32 {
        manhattan_distance(self.state.positions[agent], self.config.goal)
    }

    pub fn agent_done(&self, agent: usize) -> bool {
        self.state.reached[agent]
    }

    pub fn is_finished(&self) -> bool {
        self.state.reached.iter().all(|&r| r) || self.state.step_count >= self.config.max_steps
    }

    /// Places an agent directly. Intended for constructing scenarios.
    pub fn place_agent(&mut self, agent: usize, cell: Cell) -> Result<()> {
        if agent >= self.config.n_agents {
            return Err(Error::invalid(format!("agent {agent} out of range")));
        }
        if !self.config.contains(cell) || self.state.obstacles.contains(&cell) {
            return Err(Error::invalid(format!("cannot place agent on {cell}")));
        }
        self.state.positions[agent] = cell;
        self.state.reached[agent] = cell == self.config.goal;
        Ok(())
    }

    pub fn step(&mut self, agent: usize, action: Move) -> Result<StepOutcome> {
        if agent >= self.config.n_agents {
            return Err(Error::invalid(format!("agent {agent} out of range")));
        }
        if self.is_finished() {
            return Err(Error::Protocol("episode already finished".into()));
        }
        if self.state.reached[agent] {
            return Err(Error::Protocol(format!("agent {agent} already reached the goal")));
        }
        let here = self.state.positions[agent];
        let candidate = here.offset(action.delta());

        let outcome = if !self.config.contains(candidate) {
            StepOutcome {
                next_position: here,
                extrinsic_reward: extrinsic_reward(here, false, &self.config),
                reached_goal: false,
                collided: false,
            }
        } else if self.state.obstacles.contains(&candidate) {
            StepOutcome {
                next_position: here,
                extrinsic_reward: extrinsic_reward(here, true, &self.config),
                reached_goal: false,
                collided: true,
            }
        } else {
            let reached_goal = candidate == self.config.goal;
            self.state.positions[agent] = candidate;
            self.state.reached[agent] = reached_goal;
            StepOutcome {
                next_position: candidate,
                extrinsic_reward: extrinsic_reward(candidate, false, &self.config),
                reached_goal,
                collided: false,
            }
        };
        Ok(outcome)
    }

    /// Closes the current time step.
    pub fn tick(&mut self) {
        self.state.step_count += 1;
    }

    /// Starts the next episode: agents return to the origin, the episode
    /// counter advances, and obstacles refresh on the configured cadence.
    pub fn next_episode<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.state.episode_index += 1;
        self.reset_agents();
        self.maybe_refresh_obstacles(rng);
    }

    pub fn reset_agents(&mut self) {
        self.state.positions.fill(Cell::ORIGIN);
        self.state.reached.fill(false);
        self.state.step_count = 0;
    }

    /// Resamples obstacles when the episode index is a positive multiple of
    /// the refresh period. Returns whether a refresh happened.
    pub fn maybe_refresh_obstacles<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let e = self.state.episode_index;
        if e == 0 || e % self.config.obstacle_refresh_every != 0 {
            return false;
        }
        self.state.obstacles = sample_obstacles(&self.config, &self.state.positions, rng);
        true
    }

    pub fn set_episode_index(&mut self, episode_index: u64) {
        self.state.episode_index = episode_index;
    }
}
