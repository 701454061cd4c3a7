//! Trained agents against a uniformly random control and against tabular
//! Q-learning, with a Mann-Whitney U test per agent.
//!
//! `cargo run --release --example compare_learners -- 500`

use qardns::cli::{compare_records, format_comparison, Comparison};
use qardns::{run_experiment, Learner, RunConfig};

fn main() -> qardns::Result<()> {
    let episodes = std::env::args().nth(1).map_or(Ok(300), |s| s.parse()).expect("episodes must be an integer");
    let base = RunConfig { episodes, seed: 4, ..RunConfig::default() };
    let arms = [
        ("trained", base.clone()),
        ("random", RunConfig { fixed_epsilon: Some(1.0), ..base.clone() }),
        ("q-table", RunConfig { learner: Learner::Baseline, ..base.clone() }),
    ];
    let mut runs = Vec::new();
    for (name, cfg) in arms {
        let (summary, records) = run_experiment(&cfg)?;
        for a in &summary.agents {
            println!(
                "{name:>8} agent {}: success {:.3}  steps {:.1}  reward {:.1}",
                a.agent,
                a.success_rate.unwrap_or(f64::NAN),
                a.mean_steps,
                a.mean_reward
            );
        }
        runs.push((name, records));
    }
    for other in &runs[1..] {
        let c = Comparison {
            label_a: runs[0].0.to_string(),
            label_b: other.0.to_string(),
            agents: compare_records(&runs[0].1, &other.1)?,
        };
        print!("\n{}", format_comparison(&c));
    }
    Ok(())
}
