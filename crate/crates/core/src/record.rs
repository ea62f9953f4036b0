use serde::{Deserialize, Serialize};

use crate::realization::VertexSign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EngineKind {
    Sync,
    Async,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Termination {
    /// No further vertex can activate.
    Stalled,
    AllActive,
    RoundCap,
    TimeCap,
    ActiveCap,
}

impl Termination {
    pub fn is_truncated(self) -> bool {
        matches!(
            self,
            Termination::RoundCap | Termination::TimeCap | Termination::ActiveCap
        )
    }
}

/// The `s`-th activation `(x_s, t_s)`; `s` is the position in
/// [`TrajectoryRecord::activations`] plus one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Activation {
    pub vertex: u32,
    /// Round number (sync) or activation time (async).
    pub time: f64,
    pub sign: VertexSign,
}

/// One row of the per-trial trajectory table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub step: usize,
    pub time: f64,
    pub active_total: usize,
    pub active_excit: usize,
    pub active_inhib: usize,
    pub newly_active: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub engine: EngineKind,
    pub n: usize,
    pub a0: usize,
    pub activations: Vec<Activation>,
    /// Sync only: `a_t` for `t = 0..=T`, where round `T` is the last round
    /// that activated something.
    pub round_sizes: Vec<usize>,
    /// Sync: rounds executed, including a final empty one. Async: events
    /// processed.
    pub steps_executed: usize,
    pub termination: Termination,
    /// Signals addressed to vertices that were already active.
    pub discarded_signals: u64,
}

impl TrajectoryRecord {
    /// `a*`.
    pub fn final_size(&self) -> usize {
        self.activations.len()
    }

    pub fn truncated(&self) -> bool {
        self.termination.is_truncated()
    }

    pub fn fully_percolated(&self) -> bool {
        self.final_size() == self.n
    }

    /// `t_s`, or `+inf` when fewer than `s` vertices ever activate.
    pub fn time_to_reach(&self, s: usize) -> f64 {
        if s == 0 {
            return 0.0;
        }
        self.activations
            .get(s - 1)
            .map_or(f64::INFINITY, |a| a.time)
    }

    /// Time of the last activation.
    pub fn end_time(&self) -> f64 {
        self.activations.last().map_or(0.0, |a| a.time)
    }

    /// `(|E_s|, |I_s|)`.
    pub fn sign_counts(&self, s: usize) -> (usize, usize) {
        let excit = self.activations[..s.min(self.activations.len())]
            .iter()
            .filter(|a| a.sign.is_excitatory())
            .count();
        (excit, s.min(self.activations.len()) - excit)
    }

    /// Number of vertices active at `time` (activation at `time` counts).
    pub fn active_at(&self, time: f64) -> usize {
        self.activations.partition_point(|a| a.time <= time)
    }

    /// Rows grouped by activation time. The first row always covers the
    /// starting set at time 0, even when it is empty.
    pub fn series(&self) -> Vec<SeriesRow> {
        let mut rows = Vec::new();
        let (mut excit, mut inhib) = (0, 0);
        let mut i = 0;
        let mut round = 0;
        while i < self.activations.len() || rows.is_empty() {
            let time = if rows.is_empty() {
                0.0
            } else {
                self.activations[i].time
            };
            let start = i;
            while i < self.activations.len() && self.activations[i].time == time {
                if self.activations[i].sign.is_excitatory() {
                    excit += 1;
                } else {
                    inhib += 1;
                }
                i += 1;
            }
            let step = match self.engine {
                EngineKind::Sync => round,
                EngineKind::Async => i,
            };
            rows.push(SeriesRow {
                step,
                time,
                active_total: i,
                active_excit: excit,
                active_inhib: inhib,
                newly_active: i - start,
            });
            round += 1;
        }
        rows
    }
}
