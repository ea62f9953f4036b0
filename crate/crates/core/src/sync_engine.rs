//! Round-based percolation.
//!
//! In round `t + 1` every inactive vertex whose excitatory excess after
//! round `t` is at least `k` activates. Signals of a vertex activated in
//! round `t` are counted from round `t + 1` on. Within a round, activation
//! indices follow ascending vertex label.

use crate::params::ModelParams;
use crate::realization::{OutEdge, Realization, VertexSign};
use crate::record::{Activation, EngineKind, Termination, TrajectoryRecord};

#[derive(Debug, Clone)]
pub struct SyncState {
    pub round: usize,
    k: i32,
    active: Vec<bool>,
    /// `N^+_s(v)`: signals received from active excitatory vertices.
    n_plus: Vec<u32>,
    /// `N^-_s(v)`.
    n_minus: Vec<u32>,
    activations: Vec<Activation>,
    round_sizes: Vec<usize>,
    /// Vertices whose counters changed since the last activation check.
    touched: Vec<u32>,
    is_touched: Vec<bool>,
    excit: usize,
    buf: Vec<OutEdge>,
}

impl SyncState {
    /// Round 0: activates `0..a0` and delivers their signals.
    pub fn new<R: Realization + ?Sized>(params: &ModelParams, realization: &R) -> Self {
        let n = realization.n();
        assert_eq!(n, params.n, "realization and parameters disagree on n");
        let mut state = SyncState {
            round: 0,
            k: params.k as i32,
            active: vec![false; n],
            n_plus: vec![0; n],
            n_minus: vec![0; n],
            activations: Vec::with_capacity(params.a0),
            round_sizes: Vec::new(),
            touched: Vec::new(),
            is_touched: vec![false; n],
            excit: 0,
            buf: Vec::new(),
        };
        let start: Vec<u32> = (0..params.a0 as u32).collect();
        state.activate(&start, realization);
        state.round_sizes.push(params.a0);
        state
    }

    fn activate<R: Realization + ?Sized>(&mut self, vertices: &[u32], realization: &R) {
        let time = self.round as f64;
        for &v in vertices {
            self.active[v as usize] = true;
        }
        let first_index = self.activations.len() as u32 + 1;
        for (offset, &v) in vertices.iter().enumerate() {
            let index = first_index + offset as u32;
            let sign = realization.sign_for(index, v);
            if sign.is_excitatory() {
                self.excit += 1;
            }
            self.activations.push(Activation {
                vertex: v,
                time,
                sign,
            });
            let mut buf = std::mem::take(&mut self.buf);
            realization.out_edges_for(index, v, &mut buf);
            let counters = match sign {
                VertexSign::Excitatory => &mut self.n_plus,
                VertexSign::Inhibitory => &mut self.n_minus,
            };
            for e in &buf {
                let t = e.target as usize;
                counters[t] += 1;
                if !self.active[t] && !self.is_touched[t] {
                    self.is_touched[t] = true;
                    self.touched.push(e.target);
                }
            }
            self.buf = buf;
        }
    }

    /// Inactive vertices that would activate in the next round, ascending.
    fn ready(&mut self) -> Vec<u32> {
        let mut ready: Vec<u32> = Vec::new();
        for &v in &self.touched {
            self.is_touched[v as usize] = false;
            if !self.active[v as usize] && self.excess(v) >= self.k {
                ready.push(v);
            }
        }
        self.touched.clear();
        ready.sort_unstable();
        ready
    }

    fn peek_ready(&self) -> bool {
        self.touched
            .iter()
            .any(|&v| !self.active[v as usize] && self.excess(v) >= self.k)
    }

    /// Executes one round and returns the number of newly active vertices.
    pub fn step<R: Realization + ?Sized>(&mut self, realization: &R) -> usize {
        self.round += 1;
        let ready = self.ready();
        if !ready.is_empty() {
            self.activate(&ready, realization);
            self.round_sizes.push(self.activations.len());
        }
        ready.len()
    }

    /// `N^+_s(v) - N^-_s(v)`.
    pub fn excess(&self, v: u32) -> i32 {
        self.n_plus[v as usize] as i32 - self.n_minus[v as usize] as i32
    }

    pub fn is_active(&self, v: u32) -> bool {
        self.active[v as usize]
    }

    pub fn active_count(&self) -> usize {
        self.activations.len()
    }

    /// `(a_t, |E_s|, |I_s|)`.
    pub fn counts(&self) -> (usize, usize, usize) {
        let a = self.activations.len();
        (a, self.excit, a - self.excit)
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    /// Diagnostic `(L_s, U_s)` at the current snapshot: vertices outside the
    /// starting set with exactly `k` excitatory and no inhibitory signals,
    /// and with at least `k` excitatory signals.
    pub fn snapshot_bounds(&self, a0: usize) -> (usize, usize) {
        let k = self.k as u32;
        let mut lower = 0;
        let mut upper = 0;
        for v in a0..self.active.len() {
            if self.n_plus[v] >= k {
                upper += 1;
                if self.n_plus[v] == k && self.n_minus[v] == 0 {
                    lower += 1;
                }
            }
        }
        (lower, upper)
    }

    fn into_record(self, a0: usize, termination: Termination) -> TrajectoryRecord {
        TrajectoryRecord {
            engine: EngineKind::Sync,
            n: self.active.len(),
            a0,
            activations: self.activations,
            round_sizes: self.round_sizes,
            steps_executed: self.round,
            termination,
            discarded_signals: 0,
        }
    }
}

/// Runs rounds until nothing changes, everything is active, or `round_cap`
/// rounds have run (default `n`). Hitting the cap while the process could
/// still grow marks the record as truncated.
pub fn run<R: Realization + ?Sized>(
    params: &ModelParams,
    realization: &R,
    round_cap: Option<usize>,
) -> TrajectoryRecord {
    let cap = round_cap.unwrap_or(params.n).max(1);
    let mut state = SyncState::new(params, realization);
    let n = params.n;
    let termination = loop {
        if state.active_count() == n {
            break Termination::AllActive;
        }
        if state.round >= cap {
            break if state.peek_ready() {
                Termination::RoundCap
            } else {
                Termination::Stalled
            };
        }
        if state.step(realization) == 0 {
            break Termination::Stalled;
        }
    };
    state.into_record(params.a0, termination)
}

/// Recomputes `N^+ - N^-` for `vertices` from the activation order and the
/// realization's edge batches.
pub fn recount_excess<R: Realization + ?Sized>(
    record: &TrajectoryRecord,
    realization: &R,
    vertices: &[u32],
) -> Vec<i32> {
    let mut excess = vec![0i32; vertices.len()];
    let mut buf = Vec::new();
    for (pos, act) in record.activations.iter().enumerate() {
        realization.out_edges_for(pos as u32 + 1, act.vertex, &mut buf);
        for (slot, &v) in vertices.iter().enumerate() {
            if buf.binary_search_by_key(&v, |e| e.target).is_ok() {
                excess[slot] += act.sign.weight();
            }
        }
    }
    excess
}

/// Audits incremental counters against a full recount: every inactive
/// vertex in `vertices` must have excess below `k` and match the recount.
pub fn audit_counters<R: Realization + ?Sized>(
    params: &ModelParams,
    realization: &R,
    vertices: &[u32],
) -> bool {
    let mut state = SyncState::new(params, realization);
    while state.active_count() < params.n && state.step(realization) > 0 {}
    let record = state.clone().into_record(params.a0, Termination::Stalled);
    let recount = recount_excess(&record, realization, vertices);
    vertices
        .iter()
        .zip(&recount)
        .all(|(&v, &x)| state.excess(v) == x && (state.is_active(v) || x < params.k as i32))
}
