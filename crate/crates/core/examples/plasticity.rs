//! One agent's action selection and plasticity in isolation: the same
//! reward drives a smaller update when recent rewards are noisy or the
//! state jumped.

use qardns::agent::{
    plasticity_scale, plasticity_update, select_action, AgentParams, AgentWeights, PlasticityMode, RewardWindow,
};
use qardns::memory::CombinedMemory;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qardns::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let params = AgentParams { epsilon: 0.0, ..AgentParams::default() };
    let mut memory = CombinedMemory::zeros();
    for (j, v) in memory.values.iter_mut().enumerate() {
        *v = 0.05 * (j as f64 - 16.0) / 16.0;
    }

    println!("scale for drive 10:");
    for variance in [0.0, 10.0, 100.0] {
        for delta_s in [0.0, 1.0] {
            println!("  σ² {variance:>5}  ΔS {delta_s}  -> {:.4}", plasticity_scale(&params, 10.0, variance, delta_s));
        }
    }

    let mut window = RewardWindow::new();
    for mode in [PlasticityMode::Broadcast, PlasticityMode::OutcomeSigned] {
        let params = AgentParams { plasticity: mode, ..params.clone() };
        let mut weights = AgentWeights::random(3, &mut rng);
        for step in 0..5 {
            let choice = select_action(&weights, &memory, &params, &mut rng)?;
            let reward = 8.0 - 2.0 * step as f64;
            let variance = window.variance();
            window.push(reward);
            weights = plasticity_update(&weights, reward, variance, 1.0, &memory, choice.outcome, &params);
            println!(
                "{mode:?} step {step}: {:?}  θ {:.3?}  max|W| {:.3}",
                choice.action,
                weights.angles(&memory).thetas(),
                weights.max_abs()
            );
        }
    }
    Ok(())
}
