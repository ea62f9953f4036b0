//! Event-driven percolation with per-edge delays.
//!
//! A vertex activated at time `t_i` sends a signal along each out-edge that
//! arrives at `t_i + delay`. A vertex activates at the first instant at
//! which its received excitatory excess reaches `k`. Signals arriving at the
//! same instant are applied together before activations are decided, and
//! simultaneous activations take indices in ascending label order. With
//! unit delays this reproduces the synchronous process exactly.

use std::cmp::Ordering;
use std::collections::binary_heap::PeekMut;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::params::ModelParams;
use crate::realization::{OutEdge, Realization, VertexSign};
use crate::record::{Activation, EngineKind, Termination, TrajectoryRecord};

pub const DEFAULT_TIME_CAP: f64 = 50.0;

const INHIBITORY_BIT: u32 = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Polarity {
    Plus,
    Minus,
}

/// A pending signal. Polarity lives in the top bit of the source index so
/// that an event takes 16 bytes.
#[derive(Debug, Clone, Copy)]
pub struct SignalEvent {
    pub arrival_time: f64,
    pub target: u32,
    source: u32,
}

impl SignalEvent {
    pub fn new(arrival_time: f64, target: u32, polarity: Polarity, source_index: u32) -> Self {
        debug_assert!(source_index < INHIBITORY_BIT);
        let bit = match polarity {
            Polarity::Plus => 0,
            Polarity::Minus => INHIBITORY_BIT,
        };
        SignalEvent {
            arrival_time,
            target,
            source: source_index | bit,
        }
    }

    pub fn polarity(&self) -> Polarity {
        if self.source & INHIBITORY_BIT == 0 {
            Polarity::Plus
        } else {
            Polarity::Minus
        }
    }

    pub fn source_index(&self) -> u32 {
        self.source & !INHIBITORY_BIT
    }

    fn key(&self) -> (f64, u32, u32) {
        (self.arrival_time, self.target, self.source_index())
    }
}

impl PartialEq for SignalEvent {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SignalEvent {}

impl PartialOrd for SignalEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SignalEvent {
    /// Reversed so that `BinaryHeap` pops the earliest event; ties break by
    /// target label, then source index.
    fn cmp(&self, other: &Self) -> Ordering {
        let (ta, va, sa) = self.key();
        let (tb, vb, sb) = other.key();
        tb.total_cmp(&ta)
            .then_with(|| vb.cmp(&va))
            .then_with(|| sb.cmp(&sa))
    }
}

/// Run head keyed by `(time bits, target, source)` packed into one integer;
/// arrival times are never negative, so their bits order like the values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Head {
    key: u128,
    run: u32,
}

impl Head {
    fn new(arrival_time: f64, target: u32, source: u32, run: u32) -> Self {
        debug_assert!(arrival_time >= 0.0);
        let index = (source & !INHIBITORY_BIT) as u128;
        Head {
            key: (arrival_time.to_bits() as u128) << 64 | (target as u128) << 32 | index,
            run,
        }
    }
}

impl PartialOrd for Head {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Head {
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.cmp(&self.key)
    }
}

#[derive(Debug, Clone, Default)]
struct Run {
    /// `(arrival_time, target)`, sorted.
    events: Vec<(f64, u32)>,
    cursor: usize,
    source: u32,
}

impl Run {
    fn head(&self, run: u32) -> Head {
        let (arrival_time, target) = self.events[self.cursor];
        Head::new(arrival_time, target, self.source, run)
    }

    fn event(&self) -> SignalEvent {
        let (arrival_time, target) = self.events[self.cursor];
        SignalEvent {
            arrival_time,
            target,
            source: self.source,
        }
    }
}

/// Pending signals. Every activation contributes one run of signals sorted
/// by `(time, target)`; a small heap over run heads merges them, which pops
/// in the same order as one global heap but touches far less memory.
#[derive(Debug, Clone, Default)]
struct SignalQueue {
    runs: Vec<Run>,
    free: Vec<u32>,
    heads: BinaryHeap<Head>,
    len: usize,
}

impl SignalQueue {
    /// Queues the signals of one sender; `fill` writes them into the run.
    fn push_run(
        &mut self,
        polarity: Polarity,
        source_index: u32,
        fill: impl FnOnce(&mut Vec<(f64, u32)>),
    ) {
        let slot = match self.free.pop() {
            Some(slot) => slot,
            None => {
                self.runs.push(Run::default());
                self.runs.len() as u32 - 1
            }
        };
        let run = &mut self.runs[slot as usize];
        run.events.clear();
        run.cursor = 0;
        run.source = SignalEvent::new(0.0, 0, polarity, source_index).source;
        fill(&mut run.events);
        if run.events.is_empty() {
            self.free.push(slot);
            return;
        }
        run.events
            .sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        self.len += run.events.len();
        self.heads.push(run.head(slot));
    }

    fn peek(&self) -> Option<SignalEvent> {
        self.heads.peek().map(|h| self.runs[h.run as usize].event())
    }

    fn pop(&mut self) -> Option<SignalEvent> {
        let mut top = self.heads.peek_mut()?;
        let slot = top.run;
        let run = &mut self.runs[slot as usize];
        let event = run.event();
        run.cursor += 1;
        if run.cursor < run.events.len() {
            *top = run.head(slot);
        } else {
            PeekMut::pop(top);
            self.free.push(slot);
        }
        self.len -= 1;
        Some(event)
    }

    fn len(&self) -> usize {
        self.len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsyncConfig {
    pub time_cap: f64,
    /// Stop once this many vertices are active. `None` means `n`.
    pub active_cap: Option<usize>,
    pub log_events: bool,
}

impl Default for AsyncConfig {
    fn default() -> Self {
        AsyncConfig {
            time_cap: DEFAULT_TIME_CAP,
            active_cap: None,
            log_events: false,
        }
    }
}

/// One processed signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventLogEntry {
    pub event_index: u64,
    pub time: f64,
    pub target: u32,
    pub polarity: Polarity,
    pub source_index: u32,
    pub caused_activation: bool,
}

#[derive(Debug, Clone)]
pub struct AsyncState {
    pub clock: f64,
    k: i32,
    time_cap: f64,
    pending: SignalQueue,
    /// `S^+(v, clock)`.
    s_plus: Vec<u32>,
    /// `S^-(v, clock)`.
    s_minus: Vec<u32>,
    active: Vec<bool>,
    activations: Vec<Activation>,
    touched: Vec<u32>,
    is_touched: Vec<bool>,
    buf: Vec<OutEdge>,
    events_processed: u64,
    discarded: u64,
    dropped_past_cap: bool,
    log: Option<Vec<EventLogEntry>>,
}

impl AsyncState {
    /// Activates `0..a0` at time 0 and enqueues their signals.
    pub fn new<R: Realization + ?Sized>(
        params: &ModelParams,
        realization: &R,
        config: &AsyncConfig,
    ) -> Self {
        let n = realization.n();
        assert_eq!(n, params.n, "realization and parameters disagree on n");
        let mut state = AsyncState {
            clock: 0.0,
            k: params.k as i32,
            time_cap: config.time_cap,
            pending: SignalQueue::default(),
            s_plus: vec![0; n],
            s_minus: vec![0; n],
            active: vec![false; n],
            activations: Vec::with_capacity(params.a0),
            touched: Vec::new(),
            is_touched: vec![false; n],
            buf: Vec::new(),
            events_processed: 0,
            discarded: 0,
            dropped_past_cap: false,
            log: config.log_events.then(Vec::new),
        };
        let start: Vec<u32> = (0..params.a0 as u32).collect();
        state.activate(&start, realization);
        state
    }

    fn activate<R: Realization + ?Sized>(&mut self, vertices: &[u32], realization: &R) {
        for &v in vertices {
            self.active[v as usize] = true;
        }
        let first_index = self.activations.len() as u32 + 1;
        for (offset, &v) in vertices.iter().enumerate() {
            let index = first_index + offset as u32;
            let sign = realization.sign_for(index, v);
            self.activations.push(Activation {
                vertex: v,
                time: self.clock,
                sign,
            });
            let polarity = match sign {
                VertexSign::Excitatory => Polarity::Plus,
                VertexSign::Inhibitory => Polarity::Minus,
            };
            realization.out_edges_for(index, v, &mut self.buf);
            let (clock, time_cap) = (self.clock, self.time_cap);
            let (active, buf) = (&self.active, &self.buf);
            let (mut discarded, mut dropped) = (0, false);
            self.pending.push_run(polarity, index, |run| {
                for e in buf {
                    if active[e.target as usize] {
                        // would be discarded on arrival
                        discarded += 1;
                        continue;
                    }
                    let arrival = clock + e.delay;
                    if arrival > time_cap {
                        dropped = true;
                        continue;
                    }
                    run.push((arrival, e.target));
                }
            });
            self.discarded += discarded;
            self.dropped_past_cap |= dropped;
        }
    }

    /// Processes all events at the next arrival time. Returns the number of
    /// vertices activated, or `None` when no event is left before the cap.
    pub fn advance<R: Realization + ?Sized>(&mut self, realization: &R) -> Option<usize> {
        let time = self.pending.peek()?.arrival_time;
        debug_assert!(time >= self.clock, "event queue went back in time");
        self.clock = time;
        let log_start = self.log.as_ref().map_or(0, Vec::len);
        while let Some(ev) = self.pending.peek() {
            if ev.arrival_time != time {
                break;
            }
            let ev = self.pending.pop().unwrap();
            self.events_processed += 1;
            let v = ev.target as usize;
            let live = !self.active[v];
            if let Some(log) = self.log.as_mut() {
                log.push(EventLogEntry {
                    event_index: self.events_processed - 1,
                    time,
                    target: ev.target,
                    polarity: ev.polarity(),
                    source_index: ev.source_index(),
                    caused_activation: false,
                });
            }
            if !live {
                self.discarded += 1;
                continue;
            }
            match ev.polarity() {
                Polarity::Plus => self.s_plus[v] += 1,
                Polarity::Minus => self.s_minus[v] += 1,
            }
            if !self.is_touched[v] {
                self.is_touched[v] = true;
                self.touched.push(ev.target);
            }
        }
        let mut ready = Vec::new();
        for &v in &self.touched {
            self.is_touched[v as usize] = false;
            if self.excess(v) >= self.k {
                ready.push(v);
            }
        }
        self.touched.clear();
        ready.sort_unstable();
        if let Some(log) = self.log.as_mut() {
            for &v in &ready {
                if let Some(entry) = log[log_start..].iter_mut().rev().find(|e| e.target == v) {
                    entry.caused_activation = true;
                }
            }
        }
        self.activate(&ready, realization);
        Some(ready.len())
    }

    /// `S^+(v) - S^-(v)` at the current clock.
    pub fn excess(&self, v: u32) -> i32 {
        self.s_plus[v as usize] as i32 - self.s_minus[v as usize] as i32
    }

    pub fn is_active(&self, v: u32) -> bool {
        self.active[v as usize]
    }

    pub fn active_count(&self) -> usize {
        self.activations.len()
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    fn finish(
        mut self,
        a0: usize,
        termination: Termination,
    ) -> (TrajectoryRecord, Vec<EventLogEntry>) {
        let log = self.log.take().unwrap_or_default();
        let record = TrajectoryRecord {
            engine: EngineKind::Async,
            n: self.active.len(),
            a0,
            activations: self.activations,
            round_sizes: Vec::new(),
            steps_executed: self.events_processed as usize,
            termination,
            discarded_signals: self.discarded,
        };
        (record, log)
    }
}

/// Runs the asynchronous process to termination or until a cap.
pub fn run<R: Realization + ?Sized>(
    params: &ModelParams,
    realization: &R,
    config: &AsyncConfig,
) -> TrajectoryRecord {
    run_with_log(params, realization, config).0
}

/// Like [`run`], also returning the event log when
/// [`AsyncConfig::log_events`] is set. Signals to vertices already active
/// when the signal is sent are never enqueued and so never logged.
pub fn run_with_log<R: Realization + ?Sized>(
    params: &ModelParams,
    realization: &R,
    config: &AsyncConfig,
) -> (TrajectoryRecord, Vec<EventLogEntry>) {
    let n = params.n;
    let active_cap = config.active_cap.unwrap_or(n).min(n);
    let mut state = AsyncState::new(params, realization, config);
    let termination = loop {
        if state.active_count() == n {
            break Termination::AllActive;
        }
        if state.active_count() >= active_cap {
            break Termination::ActiveCap;
        }
        if state.advance(realization).is_none() {
            break if state.dropped_past_cap {
                Termination::TimeCap
            } else {
                Termination::Stalled
            };
        }
    };
    state.finish(params.a0, termination)
}

/// `t_s`, or `+inf` if fewer than `s` vertices activated.
pub fn time_to_reach(record: &TrajectoryRecord, s: usize) -> f64 {
    record.time_to_reach(s)
}

/// Replays, for every vertex, the signals it receives from the recorded
/// activations and checks that the excess first reaches `k` exactly at the
/// recorded activation time, and never for vertices that stayed inactive
/// (unless the run was truncated). Returns the first offending vertex.
pub fn audit_activation_times<R: Realization + ?Sized>(
    params: &ModelParams,
    record: &TrajectoryRecord,
    realization: &R,
) -> Result<(), u32> {
    let k = params.k as i32;
    let mut incoming: HashMap<u32, Vec<(f64, i32)>> = HashMap::new();
    let mut buf = Vec::new();
    for (pos, act) in record.activations.iter().enumerate() {
        realization.out_edges_for(pos as u32 + 1, act.vertex, &mut buf);
        for e in &buf {
            incoming
                .entry(e.target)
                .or_default()
                .push((act.time + e.delay, act.sign.weight()));
        }
    }
    let activated: HashMap<u32, f64> = record
        .activations
        .iter()
        .skip(record.a0)
        .map(|a| (a.vertex, a.time))
        .collect();
    let start: std::collections::HashSet<u32> = record
        .activations
        .iter()
        .take(record.a0)
        .map(|a| a.vertex)
        .collect();

    for v in 0..params.n as u32 {
        if start.contains(&v) {
            continue;
        }
        let mut signals = incoming.remove(&v).unwrap_or_default();
        signals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut excess = 0;
        let mut first_hit = None;
        let mut i = 0;
        while i < signals.len() {
            let t = signals[i].0;
            while i < signals.len() && signals[i].0 == t {
                excess += signals[i].1;
                i += 1;
            }
            if excess >= k {
                first_hit = Some(t);
                break;
            }
        }
        match (activated.get(&v), first_hit) {
            (Some(&t), Some(hit)) if t == hit => {}
            (None, None) => {}
            (None, Some(hit)) if record.truncated() && hit >= record.end_time() => {}
            _ => return Err(v),
        }
    }
    Ok(())
}
