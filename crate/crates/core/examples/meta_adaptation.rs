//! Drive the meta adapter with a synthetic reward trend and watch the
//! learning rate and curiosity respond.

use qardns::meta::{adjust, meta_update, MetaWeights, DEFAULT_HIDDEN};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qardns::Result<()> {
    let mut meta = MetaWeights::random(DEFAULT_HIDDEN, &mut ChaCha8Rng::seed_from_u64(9))?;
    let (mut eta, mut curiosity) = (1.4, 2.0);
    let mut prev_mu = 0.0;
    for episode in 0..20 {
        // rewards improve for ten episodes, then fall back
        let mu = if episode < 10 { episode as f64 } else { 20.0 - episode as f64 };
        let sigma = 1.0 + 0.1 * episode as f64;
        let a = adjust(mu, sigma, &meta, eta, curiosity, 2.0);
        eta = a.eta;
        curiosity = a.curiosity;
        meta = meta_update(&meta, mu - prev_mu, &a.trace);
        prev_mu = mu;
        println!(
            "ep {episode:>2}  μ {mu:>5.1}  adj {:+.4?}  η {eta:.4}  curiosity {curiosity:.4}",
            a.trace.adjustments
        );
    }
    Ok(())
}
