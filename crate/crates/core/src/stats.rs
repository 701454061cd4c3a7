//! Summary statistics, Savitzky-Golay smoothing and the Mann-Whitney U test.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::trainer::{AgentSummary, EpisodeRecord};

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population variance (divides by N).
pub fn variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mu = mean(values);
    values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / values.len() as f64
}

// ---------------------------------------------------------------------------
// Savitzky-Golay

#[derive(Debug, Clone, PartialEq)]
pub struct Smoothed {
    pub values: Vec<f64>,
    /// False when the series was shorter than the window and came back as-is.
    pub applied: bool,
}

/// Value at offset 0 of the least-squares polynomial of degree `order`
/// through the points `(x_i, y_i)`, expressed as weights on `y`.
///
/// Offsets are scaled by `scale` before forming the normal equations.
fn fit_weights(offsets: &[f64], order: usize, scale: f64) -> Vec<f64> {
    let k = order + 1;
    let xs: Vec<f64> = offsets.iter().map(|x| x / scale).collect();
    // Gram matrix G = AᵀA with A[i][j] = x_i^j
    let mut g = vec![vec![0.0; k]; k];
    for &x in &xs {
        let mut pw = vec![1.0; 2 * k - 1];
        for j in 1..pw.len() {
            pw[j] = pw[j - 1] * x;
        }
        for (r, row) in g.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v += pw[r + c];
            }
        }
    }
    // solve G z = e0; the fitted value at 0 is Σ_i y_i Σ_j z_j x_i^j
    let mut rhs = vec![0.0; k];
    rhs[0] = 1.0;
    let z = solve(g, rhs);
    xs.iter()
        .map(|&x| {
            let mut acc = 0.0;
            let mut p = 1.0;
            for zj in &z {
                acc += zj * p;
                p *= x;
            }
            acc
        })
        .collect()
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Convolution weights for a centred window. They sum to 1.
pub fn savgol_coefficients(window: usize, poly_order: usize) -> Result<Vec<f64>> {
    check_savgol(window, poly_order)?;
    let half = (window / 2) as isize;
    let offsets: Vec<f64> = (-half..=half).map(|i| i as f64).collect();
    Ok(fit_weights(&offsets, poly_order, half.max(1) as f64))
}

fn check_savgol(window: usize, poly_order: usize) -> Result<()> {
    if window % 2 == 0 {
        return Err(Error::invalid(format!("window must be odd, got {window}")));
    }
    if poly_order >= window {
        return Err(Error::invalid(format!(
            "poly_order {poly_order} must be smaller than window {window}"
        )));
    }
    Ok(())
}

/// Smooths a series by local polynomial least squares.
///
/// Interior points use the centred window. Within half a window of either
/// end the fit uses only the points that exist (a shorter, asymmetric
/// window), lowering the degree if that window is too short for it.
pub fn savitzky_golay(series: &[f64], window: usize, poly_order: usize) -> Result<Smoothed> {
    check_savgol(window, poly_order)?;
    let n = series.len();
    if n < window {
        return Ok(Smoothed {
            values: series.to_vec(),
            applied: false,
        });
    }
    let half = window / 2;
    let centred = savgol_coefficients(window, poly_order)?;
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let lo = t.saturating_sub(half);
        let hi = (t + half).min(n - 1);
        let y = &series[lo..=hi];
        let w = if hi - lo + 1 == window {
            centred.clone()
        } else {
            let offsets: Vec<f64> = (lo..=hi).map(|i| i as f64 - t as f64).collect();
            let order = poly_order.min(offsets.len() - 1);
            fit_weights(&offsets, order, half.max(1) as f64)
        };
        out.push(w.iter().zip(y).map(|(a, b)| a * b).sum());
    }
    Ok(Smoothed {
        values: out,
        applied: true,
    })
}

// ---------------------------------------------------------------------------
// Mann-Whitney U

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UTestResult {
    /// U for the first sample: pairs where `a > b`, ties counted as 1/2.
    pub u: f64,
    pub z: f64,
    /// Two-sided p from the normal approximation.
    pub p_value: f64,
    /// `z / sqrt(n1 + n2)`
    pub effect_size: f64,
}

/// Midranks (1-based) of the pooled sample, plus the tie-group sizes.
fn pooled_ranks(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<(f64, usize)> = a.iter().chain(b).copied().zip(0..).collect();
    idx.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut ranks = vec![0.0; idx.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && idx[j + 1].0 == idx[i].0 {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for item in &idx[i..=j] {
            ranks[item.1] = r;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

fn check_samples(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("Mann-Whitney U needs two non-empty samples"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("Mann-Whitney U samples must be finite"));
    }
    Ok(())
}

/// U statistic of `a` against `b` from pooled midranks.
pub fn u_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    check_samples(a, b)?;
    let (ranks, _) = pooled_ranks(a, b);
    let n1 = a.len() as f64;
    let r1: f64 = ranks[..a.len()].iter().sum();
    Ok(r1 - n1 * (n1 + 1.0) / 2.0)
}

/// Two-sided Mann-Whitney U test with midranks for ties, tie-corrected
/// variance and a continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<UTestResult> {
    check_samples(a, b)?;
    let (ranks, ties) = pooled_ranks(a, b);
    let n1 = a.len() as f64;
    let n2 = b.len() as f64;
    let n = n1 + n2;
    let r1: f64 = ranks[..a.len()].iter().sum();
    let u = r1 - n1 * (n1 + 1.0) / 2.0;

    let mu = n1 * n2 / 2.0;
    let tie_term: f64 = ties
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)).max(1.0));
    let diff = u - mu;
    let corrected = if diff.abs() <= 0.5 {
        0.0
    } else {
        diff - 0.5 * diff.signum()
    };
    let z = if var > 0.0 { corrected / var.sqrt() } else { 0.0 };
    let normal = Normal::standard();
    let p_value = (2.0 * (1.0 - normal.cdf(z.abs()))).clamp(0.0, 1.0);
    Ok(UTestResult {
        u,
        z,
        p_value,
        effect_size: z / n.sqrt(),
    })
}

/// Largest pooled size for which [`exact_p_value`] enumerates the null.
pub const EXACT_MAX_TOTAL: usize = 50;

/// Exact two-sided permutation p-value of U, conditional on the observed
/// tie pattern: `P(|U - n1 n2 / 2| >= |u_obs - n1 n2 / 2|)` over all
/// equally likely splits of the pooled sample.
///
/// Counts splits by rank sum with a subset-sum recursion over doubled
/// midranks.
pub fn exact_p_value(a: &[f64], b: &[f64]) -> Result<f64> {
    check_samples(a, b)?;
    let total = a.len() + b.len();
    if total > EXACT_MAX_TOTAL {
        return Err(Error::invalid(format!(
            "exact p-value supports at most {EXACT_MAX_TOTAL} pooled values, got {total}"
        )));
    }
    let (ranks, _) = pooled_ranks(a, b);
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let n1 = a.len();
    let max_sum: usize = doubled.iter().sum();

    // ways[k][s]: number of k-subsets with doubled rank sum s
    let mut ways = vec![vec![0u64; max_sum + 1]; n1 + 1];
    ways[0][0] = 1;
    for &d in &doubled {
        for k in (1..=n1).rev() {
            for s in (d..=max_sum).rev() {
                let add = ways[k - 1][s - d];
                if add != 0 {
                    ways[k][s] += add;
                }
            }
        }
    }

    // doubled U = S - n1 (n1 + 1), doubled mean = n1 n2
    let offset = n1 * (n1 + 1);
    let centre = (n1 * b.len()) as i64;
    let observed: usize = doubled[..n1].iter().sum();
    let dev_obs = (observed as i64 - offset as i64 - centre).abs();
    let mut hit = 0u128;
    let mut all = 0u128;
    for (s, &w) in ways[n1].iter().enumerate() {
        if w == 0 {
            continue;
        }
        all += u128::from(w);
        let dev = (s as i64 - offset as i64 - centre).abs();
        if dev >= dev_obs {
            hit += u128::from(w);
        }
    }
    Ok(hit as f64 / all as f64)
}

/// Renders a p-value for text reports; tiny values are shown as a bound.
pub fn format_p_value(p: f64) -> String {
    if p < 1e-16 {
        "< 1e-16".to_string()
    } else {
        format!("{p:.6e}")
    }
}

// ---------------------------------------------------------------------------
// Run summaries

/// Per-agent summary over a sequence of episode records.
pub fn summarize(records: &[EpisodeRecord], agent: usize) -> AgentSummary {
    let episodes = records.len();
    let rows: Vec<_> = records.iter().filter_map(|r| r.agents.get(agent)).collect();
    let rewards: Vec<f64> = rows.iter().map(|a| a.total_reward).collect();
    let steps: Vec<f64> = rows.iter().map(|a| f64::from(a.steps)).collect();
    let successes = rows.iter().filter(|a| a.success).count();
    let collisions: u64 = rows.iter().map(|a| u64::from(a.collisions)).sum();
    let total_steps: u64 = rows.iter().map(|a| u64::from(a.steps)).sum();
    let var = variance(&rewards);
    AgentSummary {
        agent,
        episodes,
        successes,
        success_rate: (episodes > 0).then(|| successes as f64 / episodes as f64),
        mean_reward: mean(&rewards),
        std_reward: var.sqrt(),
        reward_variance: var,
        mean_steps: mean(&steps),
        collision_rate: if total_steps > 0 {
            collisions as f64 / total_steps as f64
        } else {
            0.0
        },
    }
}
