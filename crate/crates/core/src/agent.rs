//! A single agent: circuit-based action selection under ε-greedy, intrinsic
//! and cooperative rewards, and the variance-modulated weight update.

use std::collections::VecDeque;

use rand::Rng;

use crate::env::{manhattan_distance, Cell, Move};
use crate::error::{Error, Result};
use crate::memory::{CombinedMemory, Projection, COMBINED_DIM, LONG_DIM, SHORT_DIM};
use crate::quantum::{build_action_state, CircuitAngles, ShotCounts};

/// Bound applied to every trainable weight after an update.
pub const WEIGHT_CLIP: f64 = 5.0;

/// Per-episode multiplicative ε decay.
pub const EPSILON_DECAY: f64 = 0.995;

/// Number of recent rewards kept for the variance/mean statistics.
pub const REWARD_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentWeights {
    pub short_proj: Projection<SHORT_DIM>,
    pub long_proj: Projection<LONG_DIM>,
    /// One row per qubit; `theta_i = action[i] · M`.
    pub action: Vec<[f64; COMBINED_DIM]>,
    pub att_short: [f64; SHORT_DIM],
    pub att_long: [f64; LONG_DIM],
}

impl AgentWeights {
    /// Every entry uniform in `[-0.1, 0.1]`.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let mut u = || rng.gen_range(-0.1..=0.1);
        let short_proj = std::array::from_fn(|_| std::array::from_fn(|_| u()));
        let long_proj = std::array::from_fn(|_| std::array::from_fn(|_| u()));
        let action = (0..n_qubits)
            .map(|_| std::array::from_fn(|_| u()))
            .collect();
        let att_short = std::array::from_fn(|_| u());
        let att_long = std::array::from_fn(|_| u());
        Self {
            short_proj,
            long_proj,
            action,
            att_short,
            att_long,
        }
    }

    pub fn zeros(n_qubits: usize) -> Self {
        Self {
            short_proj: [[0.0; 3]; SHORT_DIM],
            long_proj: [[0.0; 3]; LONG_DIM],
            action: vec![[0.0; COMBINED_DIM]; n_qubits],
            att_short: [0.0; SHORT_DIM],
            att_long: [0.0; LONG_DIM],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.action.len()
    }

    /// `theta = W_a M`, clamped into the admissible angle range.
    pub fn angles(&self, memory: &CombinedMemory) -> CircuitAngles {
        CircuitAngles::new(
            self.action
                .iter()
                .map(|row| row.iter().zip(&memory.values).map(|(w, m)| w * m).sum()),
        )
    }

    pub fn max_abs(&self) -> f64 {
        let flat = self
            .short_proj
            .iter()
            .flatten()
            .chain(self.long_proj.iter().flatten())
            .chain(self.action.iter().flatten())
            .chain(&self.att_short)
            .chain(&self.att_long);
        flat.fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// How the plasticity vector is distributed over the rows of `W_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlasticityMode {
    /// Every row receives the same `ΔW` vector.
    #[default]
    Broadcast,
    /// Row `i` receives `+ΔW` when qubit `i` read 1 in the executed action's
    /// outcome and `-ΔW` when it read 0.
    OutcomeSigned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentParams {
    pub eta: f64,
    pub epsilon: f64,
    pub curiosity: f64,
    /// Upper clip for curiosity during meta-adjustment; at least 1.5.
    pub curiosity_ceiling: f64,
    pub beta: f64,
    pub gamma_penalty: f64,
    pub clip_bound: f64,
    pub shots: u32,
    pub n_qubits: usize,
    pub plasticity: PlasticityMode,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            eta: 0.7,
            epsilon: 1.0,
            curiosity: 0.75,
            curiosity_ceiling: 1.5,
            beta: 0.1,
            gamma_penalty: 0.01,
            clip_bound: WEIGHT_CLIP,
            shots: 16,
            n_qubits: 3,
            plasticity: PlasticityMode::default(),
        }
    }
}

impl AgentParams {
    /// Six moves with three qubits; the two-qubit mode only moves in the plane.
    pub fn n_actions(&self) -> usize {
        action_count(self.n_qubits)
    }
}

pub fn action_count(n_qubits: usize) -> usize {
    if n_qubits == 2 {
        4
    } else {
        crate::env::N_ACTIONS
    }
}

/// Ring buffer of the most recent rewards.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RewardWindow {
    values: VecDeque<f64>,
}

impl RewardWindow {
    pub fn new() -> Self {
        Self {
            values: VecDeque::with_capacity(REWARD_WINDOW),
        }
    }

    pub fn push(&mut self, reward: f64) {
        if self.values.len() == REWARD_WINDOW {
            self.values.pop_front();
        }
        self.values.push_back(reward);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Population variance; 0 for an empty window.
    pub fn variance(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let mu = self.mean();
        self.values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / self.values.len() as f64
    }

    pub fn std(&self) -> f64 {
        self.variance().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionChoice {
    pub action: Move,
    pub explored: bool,
    /// Raw measurement counts when the greedy branch ran.
    pub counts: Option<ShotCounts>,
    /// Circuit outcome index the action corresponds to.
    pub outcome: usize,
}

/// Greedy pick from shot counts: the most frequent outcome that maps to a
/// move, lowest index on ties. Outcomes past the action range are ignored,
/// which is the same as renormalizing over the valid ones. `None` when no
/// shot landed on a valid outcome.
pub fn greedy_action(counts: &ShotCounts, n_actions: usize) -> Option<usize> {
    let valid = &counts.counts()[..n_actions.min(counts.counts().len())];
    let mut best: Option<(usize, u32)> = None;
    for (k, &c) in valid.iter().enumerate() {
        if c > 0 && best.is_none_or(|(_, b)| c > b) {
            best = Some((k, c));
        }
    }
    best.map(|(k, _)| k)
}

/// ε-greedy selection over the measured circuit distribution.
pub fn select_action<R: Rng + ?Sized>(
    weights: &AgentWeights,
    memory: &CombinedMemory,
    params: &AgentParams,
    rng: &mut R,
) -> Result<ActionChoice> {
    let n_actions = params.n_actions();
    if rng.gen::<f64>() < params.epsilon {
        let a = rng.gen_range(0..n_actions);
        return Ok(ActionChoice {
            action: Move::from_index(a)?,
            explored: true,
            counts: None,
            outcome: a,
        });
    }
    if weights.n_qubits() != params.n_qubits {
        return Err(Error::invalid(format!(
            "weights have {} qubit rows but params expect {}",
            weights.n_qubits(),
            params.n_qubits
        )));
    }
    let state = build_action_state(&weights.angles(memory))?;
    let counts = state.measure(params.shots, rng)?;
    let a = match greedy_action(&counts, n_actions) {
        Some(a) => a,
        None => rng.gen_range(0..n_actions),
    };
    Ok(ActionChoice {
        action: Move::from_index(a)?,
        explored: false,
        counts: Some(counts),
        outcome: a,
    })
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x.clamp(-500.0, 500.0)).exp())
}

/// `curiosity * novelty * distance_factor + balance_penalty`, with
/// `novelty = sigmoid(|s|)`, `distance_factor = 8 / (1 + d)` and
/// `balance_penalty = -2 |sr0 - sr1|`.
pub fn intrinsic_reward(
    state: Cell,
    goal: Cell,
    success_rate_0: f64,
    success_rate_1: f64,
    curiosity: f64,
) -> f64 {
    let [x, y, z] = state.as_vector();
    let novelty = sigmoid((x * x + y * y + z * z).sqrt());
    let distance_factor = 8.0 / (1.0 + f64::from(manhattan_distance(state, goal)));
    let balance_penalty = -2.0 * (success_rate_0 - success_rate_1).abs();
    curiosity * novelty * distance_factor + balance_penalty
}

/// `10 * Σ (d_before - d_after)` over the team.
pub fn cooperative_bonus(prev_distances: &[u32], next_distances: &[u32]) -> f64 {
    let reduction: i64 = prev_distances
        .iter()
        .zip(next_distances)
        .map(|(&d, &d2)| i64::from(d) - i64::from(d2))
        .sum();
    10.0 * reduction as f64
}

/// `ΔS = ‖s_t - s_{t-1}‖²` on integer coordinates.
pub fn state_change(prev: Cell, next: Cell) -> f64 {
    let dx = f64::from(next.x - prev.x);
    let dy = f64::from(next.y - prev.y);
    let dz = f64::from(next.z - prev.z);
    dx * dx + dy * dy + dz * dz
}

/// Scalar factor of the update: `η · drive / max(0.5, 1 + βσ²) · exp(-γ ΔS)`.
pub fn plasticity_scale(params: &AgentParams, drive: f64, variance: f64, delta_state: f64) -> f64 {
    let damping = (1.0 + params.beta * variance).max(0.5);
    params.eta * drive / damping * (-params.gamma_penalty * delta_state).exp()
}

/// The plasticity vector `ΔW`, one entry per combined-memory component.
pub fn plasticity_delta(
    params: &AgentParams,
    drive: f64,
    variance: f64,
    delta_state: f64,
    memory: &CombinedMemory,
) -> [f64; COMBINED_DIM] {
    let scale = plasticity_scale(params, drive, variance, delta_state);
    memory.values.map(|m| scale * m)
}

/// Applies `ΔW` to the action weights and clips every entry to the bound.
///
/// `outcome` is the circuit outcome of the executed action and only matters
/// in [`PlasticityMode::OutcomeSigned`].
pub fn plasticity_update(
    weights: &AgentWeights,
    drive: f64,
    variance: f64,
    delta_state: f64,
    memory: &CombinedMemory,
    outcome: usize,
    params: &AgentParams,
) -> AgentWeights {
    let delta = plasticity_delta(params, drive, variance, delta_state, memory);
    let n = weights.n_qubits();
    let bound = params.clip_bound;
    let mut out = weights.clone();
    for (i, row) in out.action.iter_mut().enumerate() {
        let sign = match params.plasticity {
            PlasticityMode::Broadcast => 1.0,
            PlasticityMode::OutcomeSigned => {
                if (outcome >> (n - 1 - i)) & 1 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        for (w, d) in row.iter_mut().zip(&delta) {
            *w = (*w + sign * d).clamp(-bound, bound);
        }
    }
    out
}

/// `max(floor, ε · 0.995)`
pub fn decay_epsilon(epsilon: f64, floor: f64) -> f64 {
    (epsilon * EPSILON_DECAY).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::StateVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn basis_memory(j: usize) -> CombinedMemory {
        let mut m = CombinedMemory::zeros();
        m.values[j] = 1.0;
        m
    }

    #[test]
    fn zero_memory_greedy_picks_action_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = AgentWeights::random(3, &mut rng);
        let params = AgentParams {
            epsilon: 0.0,
            ..AgentParams::default()
        };
        for _ in 0..50 {
            let c = select_action(&w, &CombinedMemory::zeros(), &params, &mut rng).unwrap();
            assert_eq!(c.action.index(), 0);
            assert!(!c.explored);
            assert_eq!(c.counts.unwrap().counts()[0], 16);
        }
    }

    #[test]
    fn greedy_ties_break_low_and_ignore_folded_outcomes() {
        let s = StateVector::uniform(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let counts = s.measure(16, &mut rng).unwrap();
        let a = greedy_action(&counts, 6).unwrap();
        let max = counts.counts()[..6].iter().max().unwrap();
        assert_eq!(counts.counts()[a], *max);
        assert!(counts.counts()[..a].iter().all(|c| c < max));

        // all mass on outcome 7 → nothing valid
        let s = StateVector::basis(3, 7).unwrap();
        let counts = s.measure(16, &mut rng).unwrap();
        assert_eq!(greedy_action(&counts, 6), None);
    }

    #[test]
    fn weights_init_range() {
        let w = AgentWeights::random(3, &mut ChaCha8Rng::seed_from_u64(4));
        assert!(w.max_abs() <= 0.1);
        assert_eq!(w.action.len(), 3);
    }

    #[test]
    fn intrinsic_reward_cases() {
        let goal = Cell::new(9, 9, 2);
        let b = intrinsic_reward(Cell::ORIGIN, goal, 0.3, 0.3, 1.0);
        assert!((b - 0.5 * 8.0 / 21.0).abs() < 1e-15);
        assert!((b - 0.190_476).abs() < 1e-6);

        // at the goal the distance factor is 8
        let b = intrinsic_reward(goal, goal, 0.0, 0.0, 1.0);
        let n = (81.0f64 + 81.0 + 4.0).sqrt();
        assert!((b - 8.0 / (1.0 + (-n).exp())).abs() < 1e-15);

        let with_penalty = intrinsic_reward(Cell::ORIGIN, goal, 0.75, 0.25, 1.0);
        assert!((with_penalty - (0.5 * 8.0 / 21.0 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn cooperative_bonus_cases() {
        assert_eq!(cooperative_bonus(&[10, 12], &[9, 11]), 20.0);
        assert_eq!(cooperative_bonus(&[10, 12], &[10, 12]), 0.0);
        assert_eq!(cooperative_bonus(&[10, 12], &[9, 13]), 0.0);
        assert_eq!(cooperative_bonus(&[3, 3], &[4, 4]), -20.0);
    }

    #[test]
    fn plasticity_neutral_modulators() {
        let params = AgentParams {
            eta: 1.0,
            ..AgentParams::default()
        };
        let w = AgentWeights::zeros(3);
        let out = plasticity_update(&w, 1.0, 0.0, 0.0, &basis_memory(7), 0, &params);
        for row in &out.action {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, if j == 7 { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn plasticity_clips_at_bound() {
        let params = AgentParams {
            eta: 0.5,
            ..AgentParams::default()
        };
        let mut w = AgentWeights::zeros(3);
        w.action[1][2] = 4.9;
        let out = plasticity_update(&w, 1.0, 0.0, 0.0, &basis_memory(2), 0, &params);
        assert_eq!(out.action[1][2], 5.0);
        assert_eq!(out.action[0][2], 0.5);
    }

    #[test]
    fn plasticity_variance_damping() {
        let params = AgentParams {
            eta: 1.0,
            ..AgentParams::default()
        };
        let base = plasticity_scale(&params, 1.0, 0.0, 0.0);
        let damped = plasticity_scale(&params, 1.0, 90.0, 0.0);
        assert!((damped - base / 10.0).abs() < 1e-15);
    }

    #[test]
    fn outcome_signed_rows() {
        let params = AgentParams {
            eta: 1.0,
            plasticity: PlasticityMode::OutcomeSigned,
            ..AgentParams::default()
        };
        let w = AgentWeights::zeros(3);
        // outcome 5 = 0b101: qubits 0 and 2 read 1
        let out = plasticity_update(&w, 1.0, 0.0, 0.0, &basis_memory(0), 5, &params);
        assert_eq!(out.action[0][0], 1.0);
        assert_eq!(out.action[1][0], -1.0);
        assert_eq!(out.action[2][0], 1.0);
    }

    #[test]
    fn epsilon_decay() {
        assert!((decay_epsilon(1.0, 0.2) - 0.995).abs() < 1e-15);
        assert_eq!(decay_epsilon(0.2, 0.2), 0.2);
        // 0.995^321 ≈ 0.20008, 0.995^322 ≈ 0.19908
        let mut e = 1.0;
        for _ in 0..321 {
            e = decay_epsilon(e, 0.2);
        }
        assert!((e - 0.995f64.powi(321)).abs() < 1e-12 && e > 0.2);
        e = decay_epsilon(e, 0.2);
        assert_eq!(e, 0.2);
    }

    #[test]
    fn reward_window_stats() {
        let mut w = RewardWindow::new();
        assert_eq!((w.mean(), w.std()), (0.0, 0.0));
        w.push(-1.0);
        w.push(1.0);
        assert_eq!(w.mean(), 0.0);
        assert_eq!(w.variance(), 1.0);
        for i in 0..250 {
            w.push(i as f64);
        }
        assert_eq!(w.len(), REWARD_WINDOW);
        assert_eq!(w.mean(), 199.5);
    }

    #[test]
    fn state_change_is_squared_norm() {
        assert_eq!(state_change(Cell::ORIGIN, Cell::new(1, 0, 0)), 1.0);
        assert_eq!(state_change(Cell::new(1, 2, 0), Cell::new(0, 0, 2)), 9.0);
    }
}
