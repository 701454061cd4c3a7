//! Short-term, long-term and shared memories, attention gating, and the
//! combined vector that drives the circuit angles.

pub const STATE_DIM: usize = 3;
pub const SHORT_DIM: usize = 8;
pub const LONG_DIM: usize = 16;
pub const SHARED_DIM: usize = 8;
pub const COMBINED_DIM: usize = SHORT_DIM + LONG_DIM + SHARED_DIM;

/// Decay shared by every agent's view of the shared memory.
pub const ALPHA_SHARED: f64 = 0.9;

pub type StateVec = [f64; STATE_DIM];

/// Row-major projection from the raw state into a memory of size `N`.
pub type Projection<const N: usize> = [[f64; STATE_DIM]; N];

/// Projection from both agents' concatenated states into the shared memory.
pub type SharedProjection = [[f64; 2 * STATE_DIM]; SHARED_DIM];

fn project<const N: usize>(w: &Projection<N>, s: &StateVec) -> [f64; N] {
    let mut out = [0.0; N];
    for (o, row) in out.iter_mut().zip(w) {
        *o = row[0] * s[0] + row[1] * s[1] + row[2] * s[2];
    }
    out
}

fn decay<const N: usize>(memory: &[f64; N], injected: &[f64; N], alpha: f64) -> [f64; N] {
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = alpha * memory[i] + (1.0 - alpha) * injected[i];
    }
    out
}

/// `alpha * m + (1 - alpha) * W s`
pub fn update_short(
    memory: &[f64; SHORT_DIM],
    state: &StateVec,
    w: &Projection<SHORT_DIM>,
    alpha: f64,
) -> [f64; SHORT_DIM] {
    decay(memory, &project(w, state), alpha)
}

/// `alpha * m + (1 - alpha) * W s`
pub fn update_long(
    memory: &[f64; LONG_DIM],
    state: &StateVec,
    w: &Projection<LONG_DIM>,
    alpha: f64,
) -> [f64; LONG_DIM] {
    decay(memory, &project(w, state), alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SharedMemory {
    pub values: [f64; SHARED_DIM],
}

impl SharedMemory {
    /// `alpha_shared * m + (1 - alpha_shared) * W [s1; s2]`.
    ///
    /// The product is evaluated as `W[:, 0..3] s1 + W[:, 3..6] s2`, which keeps
    /// the result bit-identical when the agents and the matching column
    /// blocks are swapped.
    pub fn update(&self, s1: &StateVec, s2: &StateVec, w: &SharedProjection) -> Self {
        self.update_with_alpha(s1, s2, w, ALPHA_SHARED)
    }

    pub fn update_with_alpha(
        &self,
        s1: &StateVec,
        s2: &StateVec,
        w: &SharedProjection,
        alpha: f64,
    ) -> Self {
        let mut injected = [0.0; SHARED_DIM];
        for (o, row) in injected.iter_mut().zip(w) {
            let a = row[0] * s1[0] + row[1] * s1[1] + row[2] * s1[2];
            let b = row[3] * s2[0] + row[4] * s2[1] + row[5] * s2[2];
            *o = a + b;
        }
        Self {
            values: decay(&self.values, &injected, alpha),
        }
    }
}

/// Per-agent short- and long-term memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryBank {
    pub short_term: [f64; SHORT_DIM],
    pub long_term: [f64; LONG_DIM],
}

impl Default for MemoryBank {
    fn default() -> Self {
        Self {
            short_term: [0.0; SHORT_DIM],
            long_term: [0.0; LONG_DIM],
        }
    }
}

impl MemoryBank {
    pub fn observe(
        &mut self,
        state: &StateVec,
        w_short: &Projection<SHORT_DIM>,
        w_long: &Projection<LONG_DIM>,
        alpha_short: f64,
        alpha_long: f64,
    ) {
        self.short_term = update_short(&self.short_term, state, w_short, alpha_short);
        self.long_term = update_long(&self.long_term, state, w_long, alpha_long);
    }
}

/// Scalar attention gates for the short- and long-term blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gates {
    pub short: f64,
    pub long: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `w_s = tanh(a_s · M_s)`, `w_l = a_l · M_l`. Only the short gate is squashed.
pub fn attention_gates(
    short: &[f64; SHORT_DIM],
    long: &[f64; LONG_DIM],
    att_short: &[f64; SHORT_DIM],
    att_long: &[f64; LONG_DIM],
) -> Gates {
    Gates {
        short: dot(att_short, short).tanh(),
        long: dot(att_long, long),
    }
}

/// `[w_s M_s | w_l M_l | M_shared]`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedMemory {
    pub values: [f64; COMBINED_DIM],
}

impl CombinedMemory {
    pub fn zeros() -> Self {
        Self {
            values: [0.0; COMBINED_DIM],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

pub fn combine(
    short: &[f64; SHORT_DIM],
    long: &[f64; LONG_DIM],
    shared: &SharedMemory,
    gates: Gates,
) -> CombinedMemory {
    let mut values = [0.0; COMBINED_DIM];
    for (o, m) in values[..SHORT_DIM].iter_mut().zip(short) {
        *o = gates.short * m;
    }
    for (o, m) in values[SHORT_DIM..SHORT_DIM + LONG_DIM].iter_mut().zip(long) {
        *o = gates.long * m;
    }
    values[SHORT_DIM + LONG_DIM..].copy_from_slice(&shared.values);
    CombinedMemory { values }
}
