use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Full parameter tuple of one percolation instance.
///
/// Vertices are labelled `0..n`; the starting set is `0..a0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    /// Edge probability for excitatory sources.
    pub p: f64,
    /// Required excitatory excess.
    pub k: u32,
    /// Probability that a vertex is inhibitory.
    pub tau: f64,
    /// Inhibitory sources connect with probability `gamma * p`.
    pub gamma: f64,
    pub a0: usize,
    pub seed: u64,
}

/// Multiplicative slack standing in for the asymptotic `<<` relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSlack {
    /// `p * n` must be at least this.
    pub min_pn: f64,
    /// `p * n^(1/k)` must be at most this.
    pub max_pn_root: f64,
}

impl Default for RegimeSlack {
    fn default() -> Self {
        RegimeSlack {
            min_pn: 10.0,
            max_pn_root: 0.1,
        }
    }
}

impl ModelParams {
    pub fn new(n: usize, p: f64, k: u32, tau: f64, gamma: f64, a0: usize, seed: u64) -> Self {
        ModelParams {
            n,
            p,
            k,
            tau,
            gamma,
            a0,
            seed,
        }
    }

    /// Edge probability for inhibitory sources.
    pub fn inhibitory_p(&self) -> f64 {
        self.gamma * self.p
    }

    pub fn with_a0(mut self, a0: usize) -> Self {
        self.a0 = a0;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n", "must be positive"));
        }
        if self.n > u32::MAX as usize / 2 {
            return Err(Error::param("n", "must fit in 31 bits"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidProbability {
                name: "p",
                value: self.p,
            });
        }
        if self.k == 0 {
            return Err(Error::param("k", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::InvalidProbability {
                name: "tau",
                value: self.tau,
            });
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::param("gamma", "must be positive and finite"));
        }
        let q = self.inhibitory_p();
        if q > 1.0 {
            return Err(Error::InvalidProbability {
                name: "gamma * p",
                value: q,
            });
        }
        if self.a0 > self.n {
            return Err(Error::param(
                "a0",
                format!("{} exceeds n = {}", self.a0, self.n),
            ));
        }
        Ok(())
    }

    /// `1/n << p << n^(-1/k)`, evaluated with the given slack.
    pub fn in_janson_regime(&self, slack: &RegimeSlack) -> bool {
        let n = self.n as f64;
        self.p * n >= slack.min_pn && self.p * n.powf(1.0 / self.k as f64) <= slack.max_pn_root
    }

    /// `tau < 1/(1+gamma)`, i.e. excitation wins on average.
    pub fn excitation_dominates(&self) -> bool {
        self.tau * (1.0 + self.gamma) < 1.0
    }
}
