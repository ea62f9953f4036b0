//! Biased ±1 random walk started at 0: the closed-form probability of ever
//! reaching level `k`, and a seeded Monte Carlo walker to check it.
//!
//! In the late asynchronous phase the signals arriving at a vertex are
//! excitatory with probability `beta`, so the vertex activates iff this
//! walk reaches `k`.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{Channel, CounterRng};

pub const DEFAULT_STEP_CAP: u64 = 10_000;

/// A walk whose remaining chance of reaching the level is below this is
/// counted as a miss.
const NEGLIGIBLE: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkSpec {
    /// Probability of an up-step.
    pub beta: f64,
    pub k: u32,
    pub step_cap: u64,
}

impl WalkSpec {
    pub fn new(beta: f64, k: u32) -> Self {
        WalkSpec {
            beta,
            k,
            step_cap: DEFAULT_STEP_CAP,
        }
    }

    pub fn with_step_cap(mut self, step_cap: u64) -> Self {
        self.step_cap = step_cap.max(1);
        self
    }
}

/// `min{1, (beta / (1 - beta))^k}`.
pub fn hitting_probability(beta: f64, k: u32) -> f64 {
    if beta >= 0.5 {
        1.0
    } else if beta <= 0.0 {
        0.0
    } else {
        (beta / (1.0 - beta)).powi(k as i32).min(1.0)
    }
}

fn up_threshold(beta: f64) -> u64 {
    (beta.clamp(0.0, 1.0) * (1u64 << 32) as f64) as u64
}

/// Depth below the level from which a return has negligible probability.
fn hopeless_depth(beta: f64) -> i64 {
    if beta >= 0.5 || beta <= 0.0 {
        i64::MAX
    } else {
        let r = beta / (1.0 - beta);
        (NEGLIGIBLE.ln() / r.ln()).ceil() as i64
    }
}

/// `(net displacement, maximum prefix sum)` of the 8 steps encoded by a byte.
fn byte_table() -> [(i8, i8); 256] {
    let mut table = [(0i8, 0i8); 256];
    for (b, slot) in table.iter_mut().enumerate() {
        let mut z = 0i8;
        let mut best = i8::MIN;
        for bit in 0..8 {
            z += if b >> bit & 1 == 1 { 1 } else { -1 };
            best = best.max(z);
        }
        *slot = (z, best);
    }
    table
}

struct Walker {
    k: i64,
    cap: u64,
    threshold: u64,
    hopeless: i64,
    fair: bool,
    table: [(i8, i8); 256],
}

impl Walker {
    fn new(spec: &WalkSpec) -> Self {
        Walker {
            k: spec.k as i64,
            cap: spec.step_cap,
            threshold: up_threshold(spec.beta),
            hopeless: hopeless_depth(spec.beta),
            fair: spec.beta == 0.5,
            table: byte_table(),
        }
    }

    fn hits(&self, rng: &mut CounterRng) -> bool {
        if self.k <= 0 {
            return true;
        }
        let mut z = 0i64;
        let mut steps = 0u64;
        if self.fair {
            // 64 fair steps per draw, a byte at a time
            while self.cap - steps >= 64 {
                let word = rng.next_u64();
                for byte in word.to_le_bytes() {
                    let (net, best) = self.table[byte as usize];
                    if z + best as i64 >= self.k {
                        return true;
                    }
                    z += net as i64;
                }
                steps += 64;
                if z + ((self.cap - steps) as i64) < self.k {
                    return false;
                }
            }
        }
        while steps < self.cap {
            let word = rng.next_u64();
            for half in [word >> 32, word & 0xFFFF_FFFF] {
                z += if half < self.threshold { 1 } else { -1 };
                steps += 1;
                if z >= self.k {
                    return true;
                }
                let remaining = (self.cap - steps) as i64;
                if z + remaining < self.k || self.k - z >= self.hopeless || steps == self.cap {
                    return false;
                }
            }
        }
        false
    }
}

/// Fraction of `trials` seeded walks that reach `k` within the step cap.
/// Trial `j` draws from its own stream, so the result does not depend on
/// how trials are sharded across threads.
pub fn simulate_hit(spec: &WalkSpec, seed: u64, trials: u64) -> f64 {
    let walker = Walker::new(spec);
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|j| {
            let mut rng = CounterRng::keyed(seed, Channel::Walk, j, spec.k as u64);
            walker.hits(&mut rng) as u64
        })
        .sum();
    hits as f64 / trials.max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftStats {
    /// Mean of `Z_L / L` over walks.
    pub mean: f64,
    pub sd: f64,
    pub expected: f64,
}

/// Position after `length` steps divided by `length`, over `walks` walks.
pub fn drift_check(beta: f64, walks: u64, length: u64, seed: u64) -> DriftStats {
    let threshold = up_threshold(beta);
    let ratios: Vec<f64> = (0..walks)
        .into_par_iter()
        .map(|j| {
            let mut rng = CounterRng::keyed(seed, Channel::Walk, j, u64::MAX);
            let mut ups = 0u64;
            let mut done = 0u64;
            while done < length {
                let word = rng.next_u64();
                ups += (word >> 32 < threshold) as u64;
                done += 1;
                if done < length {
                    ups += ((word & 0xFFFF_FFFF) < threshold) as u64;
                    done += 1;
                }
            }
            (2.0 * ups as f64 - length as f64) / length as f64
        })
        .collect();
    let m = ratios.len().max(1) as f64;
    let mean = ratios.iter().sum::<f64>() / m;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    DriftStats {
        mean,
        sd: var.sqrt(),
        expected: 2.0 * beta - 1.0,
    }
}
