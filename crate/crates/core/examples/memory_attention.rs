//! Feed a short trajectory through the dual memory, the shared memory and
//! the attention gates, and print the resulting circuit angles.

use qardns::agent::AgentWeights;
use qardns::memory::{attention_gates, combine, MemoryBank, SharedMemory, SharedProjection};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let weights = AgentWeights::random(3, &mut rng);
    let mut w_shared: SharedProjection = [[0.0; 6]; 8];
    for row in &mut w_shared {
        for w in row {
            *w = rng.gen_range(-0.1..=0.1);
        }
    }

    let mut bank = MemoryBank::default();
    let mut shared = SharedMemory::default();
    let path = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [2.0, 1.0, 0.0], [2.0, 1.0, 1.0]];
    let partner = [2.0, 0.0, 0.0];
    for s in path {
        shared = shared.update(&s, &partner, &w_shared);
        bank.observe(&s, &weights.short_proj, &weights.long_proj, 0.7, 0.8);
        let gates = attention_gates(&bank.short_term, &bank.long_term, &weights.att_short, &weights.att_long);
        let m = combine(&bank.short_term, &bank.long_term, &shared, gates);
        println!(
            "s = {s:?}  w_s {:+.4}  w_l {:+.4}  |M|² {:.5}  θ {:.4?}",
            gates.short,
            gates.long,
            m.norm_sqr(),
            weights.angles(&m).thetas()
        );
    }
}
