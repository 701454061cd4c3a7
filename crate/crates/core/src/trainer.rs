//! Training loop: stage scheduling, per-step orchestration of memories,
//! action selection, environment stepping, reward composition and learning.
//!
//! One time step runs in two phases. First every live agent (agent 0 first)
//! updates its memories, adapts `η`/curiosity, selects an action and moves.
//! Then the team bonus is computed from both agents' distance changes and
//! each agent that moved applies its learning update. The shared memory is
//! updated once at the start of the step from both pre-step states.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::agent::{
    cooperative_bonus, decay_epsilon, intrinsic_reward, plasticity_update, select_action,
    state_change, AgentParams, AgentWeights, RewardWindow,
};
use crate::baseline::{baseline_step, QTable, DEFAULT_ALPHA, DEFAULT_GAMMA};
use crate::config::{Learner, RunConfig};
use crate::env::{Cell, GridWorld, Move};
use crate::error::{Error, Result};
use crate::memory::{attention_gates, combine, MemoryBank, SharedMemory, SharedProjection};
use crate::meta::{adjust, meta_update, MetaTrace, MetaWeights};
use crate::stats::summarize;

// ---------------------------------------------------------------------------
// Stage schedule

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageRow {
    pub eta: f64,
    pub epsilon_min: f64,
    pub alpha_short: f64,
    pub alpha_long: f64,
    pub alpha_shared: f64,
    pub curiosity: f64,
    pub beta: f64,
    pub gamma: f64,
    pub shots: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stage {
    /// Last episode (inclusive) covered by this stage; `None` for the final,
    /// open-ended stage.
    pub last_episode: Option<u64>,
    pub row: StageRow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSchedule {
    stages: Vec<Stage>,
}

const fn row(
    eta: f64,
    epsilon_min: f64,
    alpha_short: f64,
    alpha_long: f64,
    curiosity: f64,
) -> StageRow {
    StageRow {
        eta,
        epsilon_min,
        alpha_short,
        alpha_long,
        alpha_shared: 0.9,
        curiosity,
        beta: 0.1,
        gamma: 0.01,
        shots: 16,
    }
}

impl Default for StageSchedule {
    /// Four stages over episodes 0-1000, 1001-2000, 2001-3000 and 3001+.
    fn default() -> Self {
        Self {
            stages: vec![
                Stage {
                    last_episode: Some(1000),
                    row: row(1.4, 0.9, 0.7, 0.8, 2.0),
                },
                Stage {
                    last_episode: Some(2000),
                    row: row(1.05, 0.6, 0.8, 0.9, 1.5),
                },
                Stage {
                    last_episode: Some(3000),
                    row: row(0.84, 0.3, 0.85, 0.95, 1.0),
                },
                Stage {
                    last_episode: None,
                    row: row(0.7, 0.2, 0.9, 0.98, 1.0),
                },
            ],
        }
    }
}

impl StageSchedule {
    pub fn new(stages: Vec<Stage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::config("stage schedule is empty"));
        }
        let (last, init) = stages.split_last().expect("non-empty");
        if last.last_episode.is_some() {
            return Err(Error::config("the final stage must be open-ended"));
        }
        let mut prev: Option<u64> = None;
        for s in init {
            let end = s
                .last_episode
                .ok_or_else(|| Error::config("only the final stage may be open-ended"))?;
            if prev.is_some_and(|p| end <= p) {
                return Err(Error::config("stage boundaries must increase"));
            }
            prev = Some(end);
        }
        for s in &stages {
            let r = &s.row;
            let unit = |v: f64| (0.0..=1.0).contains(&v);
            if !(unit(r.epsilon_min) && unit(r.alpha_short) && unit(r.alpha_long) && unit(r.alpha_shared))
                || r.shots == 0
                || !(r.eta.is_finite() && r.curiosity.is_finite() && r.beta >= 0.0 && r.gamma >= 0.0)
            {
                return Err(Error::config(format!("invalid stage row {r:?}")));
            }
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn stage_index(&self, episode: u64) -> usize {
        self.stages
            .iter()
            .position(|s| s.last_episode.is_none_or(|end| episode <= end))
            .unwrap_or(self.stages.len() - 1)
    }

    pub fn params(&self, episode: u64) -> &StageRow {
        &self.stages[self.stage_index(episode)].row
    }

    /// Parses a schedule file: one stage per line,
    /// `last_episode,eta,epsilon_min,alpha_s,alpha_l,alpha_shared,curiosity,beta,gamma,shots`,
    /// with `*` as the last episode of the final stage. `#` starts a comment;
    /// a header line beginning with `last_episode` is skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut stages = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with("last_episode") {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = |what: &str| Error::config(format!("schedule line {}: {what}", i + 1));
            if f.len() != 10 {
                return Err(bad("expected 10 comma-separated fields"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad number '{s}'")));
            let last_episode = if f[0] == "*" {
                None
            } else {
                Some(f[0].parse::<u64>().map_err(|_| bad("bad last_episode"))?)
            };
            stages.push(Stage {
                last_episode,
                row: StageRow {
                    eta: num(f[1])?,
                    epsilon_min: num(f[2])?,
                    alpha_short: num(f[3])?,
                    alpha_long: num(f[4])?,
                    alpha_shared: num(f[5])?,
                    curiosity: num(f[6])?,
                    beta: num(f[7])?,
                    gamma: num(f[8])?,
                    shots: f[9].parse().map_err(|_| bad("bad shots"))?,
                },
            });
        }
        Self::new(stages)
    }
}

/// Row of the default schedule in force at `episode`.
pub fn stage_params(episode: u64) -> StageRow {
    *StageSchedule::default().params(episode)
}

// ---------------------------------------------------------------------------
// Records

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentEpisode {
    pub total_reward: f64,
    pub steps: u32,
    pub success: bool,
    pub collisions: u32,
    /// ε in force during the episode.
    pub epsilon: f64,
    /// Learning rate and curiosity at the end of the episode.
    pub eta: f64,
    pub curiosity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    pub agents: Vec<AgentEpisode>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentSummary {
    pub agent: usize,
    pub episodes: usize,
    pub successes: usize,
    /// `None` for a run with no episodes.
    pub success_rate: Option<f64>,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub reward_variance: f64,
    /// Over all episodes; failures count at the step cap.
    pub mean_steps: f64,
    /// Colliding steps divided by steps taken.
    pub collision_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub agents: Vec<AgentSummary>,
    pub simulation_seconds: f64,
}

impl RunSummary {
    pub fn from_records(records: &[EpisodeRecord], n_agents: usize) -> Self {
        Self {
            agents: (0..n_agents).map(|a| summarize(records, a)).collect(),
            simulation_seconds: records.iter().map(|r| r.wall_seconds).sum(),
        }
    }
}

// ---------------------------------------------------------------------------
// Trainer

const STREAM_ENV: u64 = 0;
const STREAM_SHARED_INIT: u64 = 1;
const STREAM_AGENT_INIT: u64 = 100;
const STREAM_AGENT_ACT: u64 = 200;

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone)]
struct AgentRuntime {
    weights: AgentWeights,
    memory: MemoryBank,
    params: AgentParams,
    meta: MetaWeights,
    window: RewardWindow,
    rng: ChaCha8Rng,
    last_trace: Option<MetaTrace>,
    window_mean_at_start: f64,
    successes: u64,
    q_table: Option<QTable>,
}

/// Owns one run's full state and advances it episode by episode.
#[derive(Debug, Clone)]
pub struct Trainer {
    config: RunConfig,
    schedule: StageSchedule,
    env: GridWorld,
    env_rng: ChaCha8Rng,
    shared: SharedMemory,
    shared_weights: SharedProjection,
    agents: Vec<AgentRuntime>,
    episode: u64,
    stage: Option<usize>,
}

struct Pending {
    agent: usize,
    from: Cell,
    outcome: crate::env::StepOutcome,
    action: Move,
    circuit_outcome: usize,
    memory: crate::memory::CombinedMemory,
}

impl Trainer {
    pub fn new(config: RunConfig) -> Result<Self> {
        let schedule = config.load_schedule()?;
        Self::with_schedule(config, schedule)
    }

    pub fn with_schedule(config: RunConfig, schedule: StageSchedule) -> Result<Self> {
        config.validate()?;
        let seed = config.seed;
        let mut env_rng = substream(seed, STREAM_ENV);
        let env = GridWorld::new(config.grid.clone(), &mut env_rng)?;

        let mut init = substream(seed, STREAM_SHARED_INIT);
        let shared_weights: SharedProjection = {
            use rand::Rng;
            std::array::from_fn(|_| std::array::from_fn(|_| init.gen_range(-0.1..=0.1)))
        };

        let agents = (0..config.grid.n_agents)
            .map(|i| {
                let mut init = substream(seed, STREAM_AGENT_INIT + i as u64);
                let weights = AgentWeights::random(config.n_qubits, &mut init);
                let meta = MetaWeights::random(config.meta_hidden, &mut init)?;
                let params = AgentParams {
                    epsilon: config.fixed_epsilon.unwrap_or(1.0),
                    n_qubits: config.n_qubits,
                    plasticity: config.plasticity,
                    ..AgentParams::default()
                };
                let q_table = (config.learner == Learner::Baseline)
                    .then(|| QTable::new(&config.grid, params.n_actions()));
                Ok(AgentRuntime {
                    weights,
                    memory: MemoryBank::default(),
                    params,
                    meta,
                    window: RewardWindow::new(),
                    rng: substream(seed, STREAM_AGENT_ACT + i as u64),
                    last_trace: None,
                    window_mean_at_start: 0.0,
                    successes: 0,
                    q_table,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            config,
            schedule,
            env,
            env_rng,
            shared: SharedMemory::default(),
            shared_weights,
            agents,
            episode: 0,
            stage: None,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn env(&self) -> &GridWorld {
        &self.env
    }

    pub fn env_mut(&mut self) -> &mut GridWorld {
        &mut self.env
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn agent_params(&self, agent: usize) -> &AgentParams {
        &self.agents[agent].params
    }

    pub fn agent_weights(&self, agent: usize) -> &AgentWeights {
        &self.agents[agent].weights
    }

    pub fn agent_weights_mut(&mut self, agent: usize) -> &mut AgentWeights {
        &mut self.agents[agent].weights
    }

    pub fn agent_params_mut(&mut self, agent: usize) -> &mut AgentParams {
        &mut self.agents[agent].params
    }

    pub fn meta_weights_mut(&mut self, agent: usize) -> &mut MetaWeights {
        &mut self.agents[agent].meta
    }

    /// The agent's Q-table when running the baseline learner.
    pub fn q_table(&self, agent: usize) -> Option<&QTable> {
        self.agents[agent].q_table.as_ref()
    }

    pub fn shared_memory(&self) -> &SharedMemory {
        &self.shared
    }

    /// Running success rate of `agent` over the episodes finished so far.
    pub fn success_rate(&self, agent: usize) -> f64 {
        if self.episode == 0 {
            0.0
        } else {
            self.agents[agent].successes as f64 / self.episode as f64
        }
    }

    /// Exchanges the two agents' complete state (weights, memories, rng
    /// streams, statistics) together with the matching column blocks of the
    /// shared projection.
    pub fn swap_agents(&mut self) -> Result<()> {
        if self.agents.len() != 2 {
            return Err(Error::invalid("swap_agents needs exactly two agents"));
        }
        self.agents.swap(0, 1);
        for row in self.shared_weights.iter_mut() {
            let (a, b) = row.split_at_mut(3);
            a.swap_with_slice(b);
        }
        let pos = self.env.state().positions.clone();
        for (i, p) in pos.iter().rev().enumerate() {
            self.env.place_agent(i, *p)?;
        }
        Ok(())
    }

    /// Applies the stage row for the current episode, overwriting `η` and
    /// curiosity when the stage changes.
    fn enter_stage(&mut self) -> StageRow {
        let idx = self.schedule.stage_index(self.episode);
        let row = self.schedule.stages()[idx].row;
        if self.stage != Some(idx) {
            for a in &mut self.agents {
                a.params.eta = row.eta;
                a.params.curiosity = row.curiosity;
                a.params.curiosity_ceiling = row.curiosity.max(1.5);
            }
            self.stage = Some(idx);
        }
        for a in &mut self.agents {
            a.params.beta = row.beta;
            a.params.gamma_penalty = row.gamma;
            a.params.shots = self.config.shots.unwrap_or(row.shots);
        }
        row
    }

    /// Runs one episode from the current environment state and prepares the
    /// next one.
    pub fn run_episode(&mut self) -> Result<EpisodeRecord> {
        let started = Instant::now();
        let row = self.enter_stage();
        let n = self.agents.len();
        let goal = self.env.config().goal;
        let rates: Vec<f64> = (0..n).map(|i| self.success_rate(i)).collect();
        let (sr0, sr1) = (rates[0], rates.get(1).copied().unwrap_or(rates[0]));
        let epsilons: Vec<f64> = self.agents.iter().map(|a| a.params.epsilon).collect();

        let mut totals = vec![0.0; n];
        let mut steps = vec![0u32; n];
        let mut success = vec![false; n];
        let mut collisions = vec![0u32; n];

        while !self.env.is_finished() {
            let positions: Vec<Cell> = self.env.state().positions.clone();
            let states: Vec<[f64; 3]> = positions.iter().map(|c| c.as_vector()).collect();
            self.shared = self.shared.update_with_alpha(
                &states[0],
                &states[1],
                &self.shared_weights,
                row.alpha_shared,
            );
            let before: Vec<u32> = (0..n).map(|i| self.env.distance_to_goal(i)).collect();

            let mut pending = Vec::with_capacity(n);
            for i in 0..n {
                if self.env.agent_done(i) {
                    continue;
                }
                let p = self.act(i, &states[i], &row)?;
                pending.push(p);
            }

            let after: Vec<u32> = (0..n).map(|i| self.env.distance_to_goal(i)).collect();
            let bonus = cooperative_bonus(&before, &after);

            for p in pending {
                let i = p.agent;
                let a = &mut self.agents[i];
                let next = p.outcome.next_position;
                let b = intrinsic_reward(next, goal, sr0, sr1, a.params.curiosity);
                let total = p.outcome.extrinsic_reward + b + bonus;
                let variance = a.window.variance();
                a.window.push(total);
                totals[i] += total;
                steps[i] += 1;
                if p.outcome.collided {
                    collisions[i] += 1;
                }
                if p.outcome.reached_goal {
                    success[i] = true;
                }
                match &mut a.q_table {
                    Some(table) => baseline_step(
                        table,
                        p.from,
                        p.action.index(),
                        total,
                        next,
                        p.outcome.reached_goal,
                        DEFAULT_ALPHA,
                        DEFAULT_GAMMA,
                    )?,
                    None => {
                        a.weights = plasticity_update(
                            &a.weights,
                            total,
                            variance,
                            state_change(p.from, next),
                            &p.memory,
                            p.circuit_outcome,
                            &a.params,
                        );
                    }
                }
            }
            self.env.tick();
        }

        let record = EpisodeRecord {
            episode: self.episode,
            agents: (0..n)
                .map(|i| AgentEpisode {
                    total_reward: totals[i],
                    steps: steps[i],
                    success: success[i],
                    collisions: collisions[i],
                    epsilon: epsilons[i],
                    eta: self.agents[i].params.eta,
                    curiosity: self.agents[i].params.curiosity,
                })
                .collect(),
            wall_seconds: started.elapsed().as_secs_f64(),
        };

        for (i, a) in self.agents.iter_mut().enumerate() {
            if success[i] {
                a.successes += 1;
            }
            a.params.epsilon = match self.config.fixed_epsilon {
                Some(e) => e,
                None => decay_epsilon(a.params.epsilon, row.epsilon_min),
            };
            let mean = a.window.mean();
            if let Some(trace) = a.last_trace.take() {
                a.meta = meta_update(&a.meta, mean - a.window_mean_at_start, &trace);
            }
            a.window_mean_at_start = mean;
        }
        self.episode += 1;
        self.env.next_episode(&mut self.env_rng);
        Ok(record)
    }

    /// Memory update, meta-adjustment, action selection and the move for one agent.
    fn act(&mut self, i: usize, state: &[f64; 3], row: &StageRow) -> Result<Pending> {
        let from = self.env.position(i);
        let a = &mut self.agents[i];
        let (action, circuit_outcome, memory) = match &a.q_table {
            Some(table) => {
                let (m, _) = table.select(from, a.params.epsilon, &mut a.rng)?;
                (m, m.index(), crate::memory::CombinedMemory::zeros())
            }
            None => {
                a.memory.observe(
                    state,
                    &a.weights.short_proj,
                    &a.weights.long_proj,
                    row.alpha_short,
                    row.alpha_long,
                );
                let gates = attention_gates(
                    &a.memory.short_term,
                    &a.memory.long_term,
                    &a.weights.att_short,
                    &a.weights.att_long,
                );
                let memory = combine(&a.memory.short_term, &a.memory.long_term, &self.shared, gates);
                let adj = adjust(
                    a.window.mean(),
                    a.window.std(),
                    &a.meta,
                    a.params.eta,
                    a.params.curiosity,
                    a.params.curiosity_ceiling,
                );
                a.params.eta = adj.eta;
                a.params.curiosity = adj.curiosity;
                a.last_trace = Some(adj.trace);
                let choice = select_action(&a.weights, &memory, &a.params, &mut a.rng)?;
                (choice.action, choice.outcome, memory)
            }
        };
        let outcome = self.env.step(i, action)?;
        Ok(Pending {
            agent: i,
            from,
            outcome,
            action,
            circuit_outcome,
            memory,
        })
    }

    /// Runs the configured number of episodes.
    pub fn run(&mut self) -> Result<Vec<EpisodeRecord>> {
        self.run_with(|_| {})
    }

    /// Like [`Trainer::run`], calling `on_episode` after every episode.
    pub fn run_with(&mut self, mut on_episode: impl FnMut(&EpisodeRecord)) -> Result<Vec<EpisodeRecord>> {
        let mut records = Vec::with_capacity(self.config.episodes as usize);
        while self.episode < self.config.episodes {
            let r = self.run_episode()?;
            on_episode(&r);
            records.push(r);
        }
        Ok(records)
    }
}

/// Builds a trainer, runs every episode and summarizes the result.
pub fn run_experiment(config: &RunConfig) -> Result<(RunSummary, Vec<EpisodeRecord>)> {
    let mut trainer = Trainer::new(config.clone())?;
    let records = trainer.run()?;
    let summary = RunSummary::from_records(&records, config.grid.n_agents);
    Ok((summary, records))
}
