//! The tabular Q-learning comparison learner on its own: train, then read
//! the greedy policy along the bottom row.

use qardns::baseline::QTable;
use qardns::env::{Cell, Move};
use qardns::trainer::Trainer;
use qardns::{Learner, RunConfig};

fn main() -> qardns::Result<()> {
    let config = RunConfig { episodes: 300, seed: 2, learner: Learner::Baseline, ..RunConfig::default() };
    let mut trainer = Trainer::new(config.clone())?;
    let records = trainer.run()?;
    for chunk in records.chunks(50) {
        let wins = chunk.iter().filter(|r| r.agents[0].success).count();
        let steps: f64 = chunk.iter().map(|r| f64::from(r.agents[0].steps)).sum::<f64>() / chunk.len() as f64;
        println!("episodes {:>3}-{:>3}: {wins:>2}/50 reached, {steps:.0} steps", chunk[0].episode, chunk[chunk.len() - 1].episode);
    }
    let table: &QTable = trainer.q_table(0).expect("baseline learner keeps a table");
    let policy: Vec<String> = (0..10)
        .map(|x| format!("{:?}", Move::from_index(table.greedy(Cell::new(x, 0, 0)).unwrap()).unwrap()))
        .collect();
    println!("greedy moves along y=0,z=0: {}", policy.join(" "));
    Ok(())
}
