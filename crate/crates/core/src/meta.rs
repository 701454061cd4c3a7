//! Two-layer adapter nudging the learning rate and curiosity factor from
//! recent reward statistics.
//!
//! `hidden = tanh(clamp(W1 [μ, σ], -10, 10))`, `adjustments = W2 hidden`,
//! then `η += 0.05 a0` and `curiosity += 0.05 a1`, each clipped.
//!
//! The weights learn by ascending `Δμ · Σ_k d_k a_k`, where `Δμ` is the change
//! in the windowed mean reward across an episode and `d_k = ±1` is the sign of
//! the adjustment that was last applied. Improvement reinforces the direction
//! taken; deterioration reverses it.

use rand::Rng;

use crate::error::{Error, Result};

pub const DEFAULT_HIDDEN: usize = 4;
pub const DEFAULT_META_LR: f64 = 0.01;
pub const PRE_ACTIVATION_LIMIT: f64 = 10.0;
pub const ADJUSTMENT_STEP: f64 = 0.05;
pub const ETA_RANGE: (f64, f64) = (0.1, 1.5);
pub const CURIOSITY_FLOOR: f64 = 0.1;
const META_CLIP: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MetaWeights {
    /// `hidden × 2`
    pub w1: Vec<[f64; 2]>,
    /// `2 × hidden`
    pub w2: [Vec<f64>; 2],
    pub learning_rate: f64,
}

impl MetaWeights {
    pub fn random<R: Rng + ?Sized>(hidden: usize, rng: &mut R) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::invalid("meta hidden size must be positive"));
        }
        let w1 = (0..hidden)
            .map(|_| [rng.gen_range(-0.1..=0.1), rng.gen_range(-0.1..=0.1)])
            .collect();
        let w2 = [
            (0..hidden).map(|_| rng.gen_range(-0.1..=0.1)).collect(),
            (0..hidden).map(|_| rng.gen_range(-0.1..=0.1)).collect(),
        ];
        Ok(Self {
            w1,
            w2,
            learning_rate: DEFAULT_META_LR,
        })
    }

    pub fn hidden_size(&self) -> usize {
        self.w1.len()
    }

    /// Forward pass on `[μ, σ]`.
    pub fn forward(&self, inputs: [f64; 2]) -> MetaTrace {
        let h = self.hidden_size();
        let mut pre = Vec::with_capacity(h);
        let mut hidden = Vec::with_capacity(h);
        let mut saturated = Vec::with_capacity(h);
        for row in &self.w1 {
            let raw = row[0] * inputs[0] + row[1] * inputs[1];
            let clamped = raw.clamp(-PRE_ACTIVATION_LIMIT, PRE_ACTIVATION_LIMIT);
            saturated.push(raw != clamped || raw.is_nan());
            let clamped = if clamped.is_nan() { 0.0 } else { clamped };
            pre.push(clamped);
            hidden.push(clamped.tanh());
        }
        let adjustments = [
            dot(&self.w2[0], &hidden),
            dot(&self.w2[1], &hidden),
        ];
        MetaTrace {
            inputs,
            pre,
            hidden,
            saturated,
            adjustments,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Everything the backward pass needs from one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaTrace {
    pub inputs: [f64; 2],
    pub pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub saturated: Vec<bool>,
    pub adjustments: [f64; 2],
}

impl MetaTrace {
    /// Sign of each applied adjustment, with 0 counted as positive.
    pub fn direction(&self) -> [f64; 2] {
        self.adjustments.map(|a| if a < 0.0 { -1.0 } else { 1.0 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaAdjustment {
    pub eta: f64,
    pub curiosity: f64,
    pub trace: MetaTrace,
}

/// One adaptation step for `η` and the curiosity factor.
///
/// `curiosity_ceiling` is 1.5 unless the current stage starts higher.
pub fn adjust(
    mu: f64,
    sigma: f64,
    meta: &MetaWeights,
    eta: f64,
    curiosity: f64,
    curiosity_ceiling: f64,
) -> MetaAdjustment {
    let trace = meta.forward([mu, sigma]);
    let [a0, a1] = trace.adjustments;
    MetaAdjustment {
        eta: (eta + ADJUSTMENT_STEP * a0).clamp(ETA_RANGE.0, ETA_RANGE.1),
        curiosity: (curiosity + ADJUSTMENT_STEP * a1).clamp(CURIOSITY_FLOOR, curiosity_ceiling),
        trace,
    }
}

/// The scalar being ascended, evaluated with `meta` on the traced inputs.
pub fn meta_objective(meta: &MetaWeights, trace: &MetaTrace, delta_mu: f64) -> f64 {
    let d = trace.direction();
    let a = meta.forward(trace.inputs).adjustments;
    delta_mu * (d[0] * a[0] + d[1] * a[1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaGradient {
    pub w1: Vec<[f64; 2]>,
    pub w2: [Vec<f64>; 2],
}

/// Analytic gradient of [`meta_objective`]. Rows whose pre-activation was
/// clamped get zero gradient.
pub fn meta_gradient(meta: &MetaWeights, trace: &MetaTrace, delta_mu: f64) -> MetaGradient {
    let d = trace.direction();
    let h = meta.hidden_size();
    let w2 = [
        trace.hidden.iter().map(|x| delta_mu * d[0] * x).collect(),
        trace.hidden.iter().map(|x| delta_mu * d[1] * x).collect(),
    ];
    let w1 = (0..h)
        .map(|j| {
            if trace.saturated[j] {
                return [0.0, 0.0];
            }
            let back = delta_mu
                * (d[0] * meta.w2[0][j] + d[1] * meta.w2[1][j])
                * (1.0 - trace.hidden[j] * trace.hidden[j]);
            [back * trace.inputs[0], back * trace.inputs[1]]
        })
        .collect();
    MetaGradient { w1, w2 }
}

/// Gradient-ascent step on the meta objective, entries clipped to ±5.
pub fn meta_update(meta: &MetaWeights, delta_mu: f64, trace: &MetaTrace) -> MetaWeights {
    let g = meta_gradient(meta, trace, delta_mu);
    let lr = meta.learning_rate;
    let step = |w: f64, g: f64| (w + lr * g).clamp(-META_CLIP, META_CLIP);
    let mut out = meta.clone();
    for (row, grow) in out.w1.iter_mut().zip(&g.w1) {
        row[0] = step(row[0], grow[0]);
        row[1] = step(row[1], grow[1]);
    }
    for k in 0..2 {
        for (w, gk) in out.w2[k].iter_mut().zip(&g.w2[k]) {
            *w = step(*w, *gk);
        }
    }
    out
}
