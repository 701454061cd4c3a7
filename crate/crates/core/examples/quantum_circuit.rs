//! Build the action circuit for a few angle vectors, compare exact
//! probabilities with 16-shot and 100k-shot estimates, and show which move
//! the greedy rule would take.

use std::f64::consts::PI;

use qardns::agent::greedy_action;
use qardns::env::Move;
use qardns::quantum::{build_action_state, exact_probabilities, CircuitAngles};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qardns::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cases = [
        vec![0.0, 0.0, 0.0],
        vec![PI, 0.0, 0.0],
        vec![PI / 2.0, PI / 2.0, 0.0],
        vec![0.3, 2.6, 1.1],
    ];
    for thetas in cases {
        let angles = CircuitAngles::new(thetas);
        let state = build_action_state(&angles)?;
        let exact = exact_probabilities(&state);
        let few = state.measure(16, &mut rng)?;
        let many = state.measure(100_000, &mut rng)?;
        println!("θ = {:.3?}", angles.thetas());
        for (k, p) in exact.iter().enumerate() {
            println!(
                "  |{k:03b}⟩  exact {p:.4}  100k {:.4}  16-shot {:>2}",
                many.frequencies()[k],
                few.counts()[k]
            );
        }
        match greedy_action(&few, 6) {
            Some(a) => println!("  greedy move: {:?}", Move::from_index(a)?),
            None => println!("  no shot landed on a move; a random move would be taken"),
        }
    }
    Ok(())
}
