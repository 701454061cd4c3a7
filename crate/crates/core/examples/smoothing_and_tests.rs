//! Savitzky-Golay smoothing of a noisy curve and rank tests on two samples.

use qardns::stats::{exact_p_value, format_p_value, mann_whitney_u, savgol_coefficients, savitzky_golay};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> qardns::Result<()> {
    println!("5-point quadratic weights ×35: {:.1?}", savgol_coefficients(5, 2)?.iter().map(|c| c * 35.0).collect::<Vec<_>>());

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let clean: Vec<f64> = (0..300).map(|t| 100.0 * (1.0 - (-(t as f64) / 80.0).exp())).collect();
    let noisy: Vec<f64> = clean.iter().map(|c| c + rng.gen_range(-25.0..25.0)).collect();
    let smooth = savitzky_golay(&noisy, 51, 2)?;
    let rms = |xs: &[f64]| (xs.iter().zip(&clean).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    println!("rms error: raw {:.2}, smoothed {:.2}", rms(&noisy), rms(&smooth.values));

    let a = [1.0, 2.0, 3.0, 4.0, 5.0];
    let b = [6.0, 7.0, 8.0, 9.0, 10.0];
    let t = mann_whitney_u(&a, &b)?;
    println!(
        "U {:.1}  z {:.4}  normal p {}  exact p {:.6}  r {:.4}",
        t.u,
        t.z,
        format_p_value(t.p_value),
        exact_p_value(&a, &b)?,
        t.effect_size
    );

    let x: Vec<f64> = (0..400).map(|_| rng.gen_range(0.0..1.0)).collect();
    let y: Vec<f64> = (0..400).map(|_| rng.gen_range(0.3..1.3)).collect();
    let t = mann_whitney_u(&x, &y)?;
    println!("shifted uniforms, n=400 each: p {}  r {:.3}", format_p_value(t.p_value), t.effect_size);
    Ok(())
}
