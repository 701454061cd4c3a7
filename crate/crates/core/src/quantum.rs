//! Exact statevector simulation of the action-selection circuit.
//!
//! The register starts in |0...0⟩ and each qubit receives one RY rotation.
//! Outcome index `k` is read as a binary number with qubit 0 as the most
//! significant bit, so for three qubits `k = 4*b0 + 2*b1 + b2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Largest register the simulator accepts. The action circuit never needs
/// more than a handful of qubits.
pub const MAX_QUBITS: usize = 16;

/// Rotation angles are clamped to `[-ANGLE_LIMIT, ANGLE_LIMIT]`.
pub const ANGLE_LIMIT: f64 = 8.0 * PI;

const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    n_qubits: usize,
}

impl StateVector {
    /// The computational basis state |0...0⟩.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// The computational basis state |k⟩.
    pub fn basis(n_qubits: usize, k: usize) -> Result<Self> {
        check_width(n_qubits)?;
        let dim = 1usize << n_qubits;
        if k >= dim {
            return Err(Error::invalid(format!(
                "basis index {k} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            n_qubits,
        })
    }

    /// Wraps an explicit amplitude vector. The length must be a power of two
    /// and the vector must already be normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude count {dim} is not a power of two >= 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_width(n_qubits)?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(format!(
                "amplitudes are not normalized (squared norm {norm_sqr})"
            )));
        }
        Ok(Self {
            amplitudes,
            n_qubits,
        })
    }

    /// Uniform superposition over all basis states.
    pub fn uniform(n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        let dim = 1usize << n_qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self {
            amplitudes: vec![a; dim],
            n_qubits,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Returns the state after RY(theta) on `qubit`.
    pub fn apply_ry(&self, qubit: usize, theta: f64) -> Result<Self> {
        let mut out = self.clone();
        out.apply_ry_mut(qubit, theta)?;
        Ok(out)
    }

    /// In-place variant of [`StateVector::apply_ry`].
    pub fn apply_ry_mut(&mut self, qubit: usize, theta: f64) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::invalid(format!(
                "qubit {qubit} out of range for a {}-qubit register",
                self.n_qubits
            )));
        }
        let (s, c) = (theta / 2.0).sin_cos();
        let mask = 1usize << (self.n_qubits - 1 - qubit);
        for i0 in 0..self.amplitudes.len() {
            if i0 & mask != 0 {
                continue;
            }
            let i1 = i0 | mask;
            let a0 = self.amplitudes[i0];
            let a1 = self.amplitudes[i1];
            self.amplitudes[i0] = a0 * c - a1 * s;
            self.amplitudes[i1] = a0 * s + a1 * c;
        }
        Ok(())
    }

    /// Squared amplitude magnitudes, indexed by outcome.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Draws `shots` independent outcomes from [`StateVector::probabilities`].
    pub fn measure<R: Rng + ?Sized>(&self, shots: u32, rng: &mut R) -> Result<ShotCounts> {
        if shots == 0 {
            return Err(Error::invalid("shots must be at least 1"));
        }
        let probs = self.probabilities();
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        // the last outcome with nonzero mass absorbs rounding in the tail
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        let mut counts = vec![0u32; probs.len()];
        for _ in 0..shots {
            let u: f64 = rng.gen::<f64>() * acc;
            let k = cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(last)
                .min(last);
            counts[k] += 1;
        }
        Ok(ShotCounts { counts, shots })
    }
}

/// Exact outcome probabilities of a state.
pub fn exact_probabilities(state: &StateVector) -> Vec<f64> {
    state.probabilities()
}

fn check_width(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::invalid(format!(
            "qubit count must be in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    Ok(())
}

/// Per-qubit rotation angles, clamped into `[-8π, 8π]`.
///
/// NaN maps to 0 so that a degenerate memory vector still yields a valid circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitAngles(Vec<f64>);

impl CircuitAngles {
    pub fn new(thetas: impl IntoIterator<Item = f64>) -> Self {
        Self(
            thetas
                .into_iter()
                .map(|t| {
                    if t.is_nan() {
                        0.0
                    } else {
                        t.clamp(-ANGLE_LIMIT, ANGLE_LIMIT)
                    }
                })
                .collect(),
        )
    }

    pub fn thetas(&self) -> &[f64] {
        &self.0
    }

    pub fn n_qubits(&self) -> usize {
        self.0.len()
    }
}

/// Prepares |0...0⟩ and applies RY(theta_i) to qubit i.
pub fn build_action_state(angles: &CircuitAngles) -> Result<StateVector> {
    let mut state = StateVector::zero(angles.n_qubits())?;
    for (q, &theta) in angles.thetas().iter().enumerate() {
        state.apply_ry_mut(q, theta)?;
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotCounts {
    counts: Vec<u32>,
    shots: u32,
}

impl ShotCounts {
    /// Counts recorded elsewhere; the length must be a power of two and the
    /// total positive.
    pub fn from_counts(counts: Vec<u32>) -> Result<Self> {
        if !counts.len().is_power_of_two() || counts.len() < 2 {
            return Err(Error::invalid(format!(
                "count vector length {} is not 2^n",
                counts.len()
            )));
        }
        let shots = counts
            .iter()
            .try_fold(0u32, |acc, &c| acc.checked_add(c))
            .ok_or_else(|| Error::invalid("shot total overflows"))?;
        if shots == 0 {
            return Err(Error::invalid("at least one shot is required"));
        }
        Ok(Self { counts, shots })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn shots(&self) -> u32 {
        self.shots
    }

    /// Empirical probability `counts(k) / shots` per outcome.
    pub fn frequencies(&self) -> Vec<f64> {
        let s = f64::from(self.shots);
        self.counts.iter().map(|&c| f64::from(c) / s).collect()
    }
}
