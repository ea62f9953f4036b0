//! The randomness of one percolation instance.
//!
//! A realization assigns to every *activation index* `i` (the `i`-th vertex
//! to become active, counted from 1) a sign and a batch of out-edges with
//! delays. Randomness is keyed by the index, not by the vertex label, so a
//! vertex's out-edges are only ever drawn once it activates. The same draws
//! can be served lazily ([`LazyRealization`]) or from a materialized graph
//! ([`EagerRealization`]); both read identical values.
//!
//! Delays are drawn only for present edges. The process never looks at the
//! delay of an absent edge, so this is distributionally the same as drawing
//! one for every pair.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::{derive_key, open_unit_f64, unit_f64, Channel, CounterRng};

/// Eager mode refuses graphs with more expected edges than this.
pub const EAGER_EDGE_LIMIT: f64 = 2e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VertexSign {
    Excitatory,
    Inhibitory,
}

impl VertexSign {
    /// Contribution of one signal to the receiver's excess.
    #[inline]
    pub fn weight(self) -> i32 {
        match self {
            VertexSign::Excitatory => 1,
            VertexSign::Inhibitory => -1,
        }
    }

    pub fn is_excitatory(self) -> bool {
        self == VertexSign::Excitatory
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutEdge {
    pub target: u32,
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutEdgeBatch {
    pub source_index: u32,
    pub sign: VertexSign,
    /// Sorted by target, each target at most once.
    pub targets: Vec<OutEdge>,
}

/// Table of delays keyed by `(activation index, target)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InjectedDelays {
    pub table: HashMap<(u32, u32), f64>,
    /// Used for pairs missing from the table.
    pub fallback: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DelayLaw {
    /// Every delay is exactly 1; the synchronous model.
    Unit,
    /// Independent `Exp(1)` delays.
    Exponential,
    /// Replays a fixed table.
    Injected(Arc<InjectedDelays>),
}

impl DelayLaw {
    #[inline]
    pub fn sample(&self, seed: u64, index: u32, target: u32) -> f64 {
        match self {
            DelayLaw::Unit => 1.0,
            DelayLaw::Exponential => {
                let mut rng = CounterRng::keyed(seed, Channel::Delay, index as u64, target as u64);
                let d: f64 = rng.sample(Exp1);
                d.max(f64::MIN_POSITIVE)
            }
            DelayLaw::Injected(tab) => tab
                .table
                .get(&(index, target))
                .copied()
                .unwrap_or(tab.fallback),
        }
    }
}

/// How edge membership is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    /// Geometric skipping over `0..n`; expected `O(np)` work per batch.
    #[default]
    Geometric,
    /// One Bernoulli trial per target. Same distribution, different draws.
    Naive,
}

/// Source of signs and out-edges, keyed by activation index (from 1).
pub trait Realization {
    fn n(&self) -> usize;

    fn sign(&self, index: u32) -> VertexSign;

    /// Replaces `out` with the out-edges of activation index `index`.
    fn out_edges_into(&self, index: u32, out: &mut Vec<OutEdge>);

    /// What the engines call when `vertex` becomes the `index`-th active
    /// vertex. Backends whose randomness belongs to vertices override this.
    fn sign_for(&self, index: u32, _vertex: u32) -> VertexSign {
        self.sign(index)
    }

    fn out_edges_for(&self, index: u32, _vertex: u32, out: &mut Vec<OutEdge>) {
        self.out_edges_into(index, out)
    }
}

/// Sign of the `index`-th activated vertex.
pub fn sample_sign(seed: u64, activation_index: u32, tau: f64) -> VertexSign {
    let u = unit_f64(derive_key(seed, Channel::Sign, activation_index as u64, 0));
    if u < tau {
        VertexSign::Inhibitory
    } else {
        VertexSign::Excitatory
    }
}

fn edge_probability(sign: VertexSign, p: f64, gamma_p: f64) -> f64 {
    match sign {
        VertexSign::Excitatory => p,
        VertexSign::Inhibitory => gamma_p,
    }
}

#[allow(clippy::too_many_arguments)]
fn fill_out_edges(
    seed: u64,
    index: u32,
    sign: VertexSign,
    n: usize,
    q: f64,
    delay: &DelayLaw,
    mode: SamplingMode,
    out: &mut Vec<OutEdge>,
) {
    out.clear();
    if q <= 0.0 || n == 0 {
        return;
    }
    let mut push = |target: u32| {
        out.push(OutEdge {
            target,
            delay: delay.sample(seed, index, target),
        })
    };
    match mode {
        SamplingMode::Geometric if q >= 1.0 => (0..n as u32).for_each(&mut push),
        SamplingMode::Geometric => {
            let channel = match sign {
                VertexSign::Excitatory => Channel::EdgeExcitatory,
                VertexSign::Inhibitory => Channel::EdgeInhibitory,
            };
            let mut rng = CounterRng::keyed(seed, channel, index as u64, 0);
            let log_miss = (-q).ln_1p();
            let mut pos = 0u64;
            let n = n as u64;
            loop {
                let u = open_unit_f64(rand::RngCore::next_u64(&mut rng));
                let skip = (u.ln() / log_miss).floor();
                if skip >= (n - pos) as f64 {
                    break;
                }
                pos += skip as u64;
                push(pos as u32);
                pos += 1;
                if pos >= n {
                    break;
                }
            }
        }
        SamplingMode::Naive => {
            let channel = match sign {
                VertexSign::Excitatory => Channel::NaiveExcitatory,
                VertexSign::Inhibitory => Channel::NaiveInhibitory,
            };
            for v in 0..n as u32 {
                if unit_f64(derive_key(seed, channel, index as u64, v as u64)) < q {
                    push(v);
                }
            }
        }
    }
}

/// Out-edge batch of the `index`-th activated vertex given its sign.
pub fn sample_out_edges(
    seed: u64,
    activation_index: u32,
    sign: VertexSign,
    params: &ModelParams,
    delay_law: &DelayLaw,
) -> Result<OutEdgeBatch> {
    params.validate()?;
    let q = edge_probability(sign, params.p, params.inhibitory_p());
    let mut targets = Vec::new();
    fill_out_edges(
        seed,
        activation_index,
        sign,
        params.n,
        q,
        delay_law,
        SamplingMode::Geometric,
        &mut targets,
    );
    Ok(OutEdgeBatch {
        source_index: activation_index,
        sign,
        targets,
    })
}

/// Draws on demand from `(seed, index, target, channel)`.
#[derive(Debug, Clone)]
pub struct LazyRealization {
    seed: u64,
    n: usize,
    p: f64,
    gamma_p: f64,
    tau: f64,
    delay: DelayLaw,
    mode: SamplingMode,
}

impl LazyRealization {
    pub fn new(params: &ModelParams, delay: DelayLaw) -> Result<Self> {
        params.validate()?;
        Ok(LazyRealization {
            seed: params.seed,
            n: params.n,
            p: params.p,
            gamma_p: params.inhibitory_p(),
            tau: params.tau,
            delay,
            mode: SamplingMode::Geometric,
        })
    }

    pub fn with_mode(mut self, mode: SamplingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn delay_law(&self) -> &DelayLaw {
        &self.delay
    }
}

impl Realization for LazyRealization {
    fn n(&self) -> usize {
        self.n
    }

    fn sign(&self, index: u32) -> VertexSign {
        sample_sign(self.seed, index, self.tau)
    }

    fn out_edges_into(&self, index: u32, out: &mut Vec<OutEdge>) {
        let sign = self.sign(index);
        let q = edge_probability(sign, self.p, self.gamma_p);
        fill_out_edges(
            self.seed,
            index,
            sign,
            self.n,
            q,
            &self.delay,
            self.mode,
            out,
        );
    }
}

/// Whole realization held in memory in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct EagerRealization {
    n: usize,
    /// `signs[i - 1]` is the sign of index `i`.
    signs: Vec<VertexSign>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    delays: Vec<f64>,
}

impl EagerRealization {
    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Targets and delays of index `index` (from 1).
    pub fn row(&self, index: u32) -> (&[u32], &[f64]) {
        let i = index as usize - 1;
        let range = self.offsets[i]..self.offsets[i + 1];
        (&self.targets[range.clone()], &self.delays[range])
    }

    /// Writes the gzipped edge list: a header `n p k tau gamma seed`, then
    /// one line `i v sign delay` per edge.
    pub fn write_dump<W: Write>(&self, params: &ModelParams, writer: W) -> Result<()> {
        let mut out = BufWriter::new(GzEncoder::new(writer, Compression::default()));
        writeln!(
            out,
            "{} {} {} {} {} {}",
            params.n, params.p, params.k, params.tau, params.gamma, params.seed
        )?;
        for index in 1..=self.n as u32 {
            let sign = self.signs[index as usize - 1].weight();
            let (targets, delays) = self.row(index);
            for (v, d) in targets.iter().zip(delays) {
                writeln!(out, "{index} {v} {sign} {d:.16e}")?;
            }
        }
        out.into_inner()
            .map_err(|e| Error::Io(e.into_error()))?
            .finish()?;
        Ok(())
    }

    pub fn write_dump_file(&self, params: &ModelParams, path: &Path) -> Result<()> {
        crate::output::write_atomic(path, |file| self.write_dump(params, file))
    }

    /// Reads a dump written by [`EagerRealization::write_dump`]. Indices
    /// without edges get their sign from the seed and `tau` in the header.
    pub fn read_dump<R: Read>(reader: R) -> Result<(ModelParams, EagerRealization)> {
        let reader = BufReader::new(GzDecoder::new(reader));
        let mut lines = reader.lines();
        let header = lines.next().ok_or(Error::Format {
            line: 1,
            reason: "missing header".into(),
        })??;
        let params = parse_header(&header)?;

        let n = params.n;
        let mut signs: Vec<VertexSign> = (1..=n as u32)
            .map(|i| sample_sign(params.seed, i, params.tau))
            .collect();
        let mut counts = vec![0usize; n];
        let mut edges: Vec<(u32, u32, f64)> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let lineno = lineno + 2;
            let bad = |reason: &str| Error::Format {
                line: lineno,
                reason: reason.into(),
            };
            let mut fields = line.split_ascii_whitespace();
            let mut field = || fields.next().ok_or_else(|| bad("too few fields"));
            let i: u32 = field()?.parse().map_err(|_| bad("index"))?;
            let v: u32 = field()?.parse().map_err(|_| bad("target"))?;
            let sign: i32 = field()?.parse().map_err(|_| bad("sign"))?;
            let d: f64 = field()?.parse().map_err(|_| bad("delay"))?;
            if i == 0 || i as usize > n || v as usize >= n {
                return Err(bad("index or target out of range"));
            }
            signs[i as usize - 1] = match sign {
                1 => VertexSign::Excitatory,
                -1 => VertexSign::Inhibitory,
                _ => return Err(bad("sign must be 1 or -1")),
            };
            counts[i as usize - 1] += 1;
            edges.push((i, v, d));
        }
        edges.sort_by_key(|&(i, v, _)| (i, v));
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let eager = EagerRealization {
            n,
            signs,
            offsets,
            targets: edges.iter().map(|e| e.1).collect(),
            delays: edges.iter().map(|e| e.2).collect(),
        };
        Ok((params, eager))
    }

    pub fn read_dump_file(path: &Path) -> Result<(ModelParams, EagerRealization)> {
        EagerRealization::read_dump(File::open(path)?)
    }
}

fn parse_header(line: &str) -> Result<ModelParams> {
    let bad = |reason: &str| Error::Format {
        line: 1,
        reason: reason.into(),
    };
    let fields: Vec<&str> = line.split_ascii_whitespace().collect();
    if fields.len() != 6 {
        return Err(bad("header needs `n p k tau gamma seed`"));
    }
    let params = ModelParams {
        n: fields[0].parse().map_err(|_| bad("n"))?,
        p: fields[1].parse().map_err(|_| bad("p"))?,
        k: fields[2].parse().map_err(|_| bad("k"))?,
        tau: fields[3].parse().map_err(|_| bad("tau"))?,
        gamma: fields[4].parse().map_err(|_| bad("gamma"))?,
        a0: 0,
        seed: fields[5].parse().map_err(|_| bad("seed"))?,
    };
    params.validate()?;
    Ok(params)
}

impl Realization for EagerRealization {
    fn n(&self) -> usize {
        self.n
    }

    fn sign(&self, index: u32) -> VertexSign {
        self.signs[index as usize - 1]
    }

    fn out_edges_into(&self, index: u32, out: &mut Vec<OutEdge>) {
        out.clear();
        let (targets, delays) = self.row(index);
        out.extend(
            targets
                .iter()
                .zip(delays)
                .map(|(&target, &delay)| OutEdge { target, delay }),
        );
    }
}

/// A fixed digraph whose signs and out-edges belong to vertices: row `i` of
/// an index-keyed realization becomes the out-neighbourhood of vertex
/// `i - 1`. The graph no longer depends on the activation order, so
/// starting sets can be compared on one graph.
///
/// Index-only access ([`Realization::sign`], [`Realization::out_edges_into`])
/// reads row `index` as if vertices activated in label order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledGraph(EagerRealization);

impl LabelledGraph {
    pub fn new(rows: EagerRealization) -> Self {
        LabelledGraph(rows)
    }

    pub fn sample(seed: u64, params: &ModelParams, delay_law: &DelayLaw) -> Result<Self> {
        materialize_graph(seed, params, delay_law).map(LabelledGraph)
    }

    pub fn rows(&self) -> &EagerRealization {
        &self.0
    }
}

impl Realization for LabelledGraph {
    fn n(&self) -> usize {
        self.0.n
    }

    fn sign(&self, index: u32) -> VertexSign {
        self.0.sign(index)
    }

    fn out_edges_into(&self, index: u32, out: &mut Vec<OutEdge>) {
        self.0.out_edges_into(index, out)
    }

    fn sign_for(&self, _index: u32, vertex: u32) -> VertexSign {
        self.0.sign(vertex + 1)
    }

    fn out_edges_for(&self, _index: u32, vertex: u32, out: &mut Vec<OutEdge>) {
        self.0.out_edges_into(vertex + 1, out)
    }
}

/// Materializes the realization for every activation index `1..=n`, each
/// row drawn with the sign of that index.
pub fn materialize_graph(
    seed: u64,
    params: &ModelParams,
    delay_law: &DelayLaw,
) -> Result<EagerRealization> {
    params.validate()?;
    let n = params.n as f64;
    let estimated = n * (1.0 - params.tau + params.gamma * params.tau) * params.p * n;
    if estimated > EAGER_EDGE_LIMIT {
        return Err(Error::TooLargeForEagerMode {
            estimated,
            limit: EAGER_EDGE_LIMIT,
        });
    }
    let lazy = LazyRealization::new(&params.with_seed(seed), delay_law.clone())?;
    let mut signs = Vec::with_capacity(params.n);
    let mut offsets = Vec::with_capacity(params.n + 1);
    let mut targets = Vec::with_capacity(estimated as usize);
    let mut delays = Vec::with_capacity(estimated as usize);
    let mut buf = Vec::new();
    offsets.push(0);
    for index in 1..=params.n as u32 {
        signs.push(lazy.sign(index));
        lazy.out_edges_into(index, &mut buf);
        targets.extend(buf.iter().map(|e| e.target));
        delays.extend(buf.iter().map(|e| e.delay));
        offsets.push(targets.len());
    }
    Ok(EagerRealization {
        n: params.n,
        signs,
        offsets,
        targets,
        delays,
    })
}

/// Hand-specified realization for small worked examples. Indices without an
/// entry are excitatory with no out-edges.
#[derive(Debug, Clone, Default)]
pub struct ScriptedRealization {
    n: usize,
    signs: HashMap<u32, VertexSign>,
    edges: HashMap<u32, Vec<OutEdge>>,
}

impl ScriptedRealization {
    pub fn new(n: usize) -> Self {
        ScriptedRealization {
            n,
            ..Default::default()
        }
    }

    pub fn sign_of(mut self, index: u32, sign: VertexSign) -> Self {
        self.signs.insert(index, sign);
        self
    }

    pub fn edge(mut self, index: u32, target: u32, delay: f64) -> Self {
        let row = self.edges.entry(index).or_default();
        row.push(OutEdge { target, delay });
        row.sort_by_key(|e| e.target);
        self
    }

    /// Complete out-neighbourhood (including the source's own label) with
    /// the given delay.
    pub fn complete_row(mut self, index: u32, delay: f64) -> Self {
        let row = (0..self.n as u32)
            .map(|target| OutEdge { target, delay })
            .collect();
        self.edges.insert(index, row);
        self
    }
}

impl Realization for ScriptedRealization {
    fn n(&self) -> usize {
        self.n
    }

    fn sign(&self, index: u32) -> VertexSign {
        self.signs
            .get(&index)
            .copied()
            .unwrap_or(VertexSign::Excitatory)
    }

    fn out_edges_into(&self, index: u32, out: &mut Vec<OutEdge>) {
        out.clear();
        if let Some(row) = self.edges.get(&index) {
            out.extend_from_slice(row);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, p: f64, tau: f64, gamma: f64) -> ModelParams {
        ModelParams::new(n, p, 2, tau, gamma, 0, 11)
    }

    #[test]
    fn sign_extremes() {
        for i in 1..1000 {
            assert_eq!(sample_sign(3, i, 0.0), VertexSign::Excitatory);
            assert_eq!(sample_sign(3, i, 1.0), VertexSign::Inhibitory);
        }
    }

    #[test]
    fn sign_frequency() {
        let m = 100_000u32;
        let inhib = (1..=m)
            .filter(|&i| sample_sign(99, i, 0.3) == VertexSign::Inhibitory)
            .count();
        let frac = inhib as f64 / m as f64;
        assert!((frac - 0.3).abs() < 0.01, "{frac}");
    }

    #[test]
    fn edge_extremes() {
        let none = sample_out_edges(
            1,
            1,
            VertexSign::Excitatory,
            &params(50, 0.0, 0.0, 1.0),
            &DelayLaw::Unit,
        )
        .unwrap();
        assert!(none.targets.is_empty());
        let all = sample_out_edges(
            1,
            1,
            VertexSign::Excitatory,
            &params(50, 1.0, 0.0, 1.0),
            &DelayLaw::Unit,
        )
        .unwrap();
        assert_eq!(all.targets.len(), 50);
        assert!(all
            .targets
            .iter()
            .enumerate()
            .all(|(v, e)| e.target == v as u32 && e.delay == 1.0));
    }

    #[test]
    fn rejects_invalid_inhibitory_probability() {
        let bad = params(50, 0.5, 0.2, 3.0);
        assert!(matches!(
            sample_out_edges(1, 1, VertexSign::Inhibitory, &bad, &DelayLaw::Unit),
            Err(Error::InvalidProbability { .. })
        ));
    }

    #[test]
    fn batch_size_mean() {
        let pr = params(10_000, 0.01, 0.0, 1.0);
        let draws = 1000;
        let total: usize = (1..=draws)
            .map(|i| {
                sample_out_edges(5, i, VertexSign::Excitatory, &pr, &DelayLaw::Unit)
                    .unwrap()
                    .targets
                    .len()
            })
            .sum();
        let mean = total as f64 / draws as f64;
        assert!((mean - 100.0).abs() < 3.0, "{mean}");
    }

    #[test]
    fn batches_are_sorted_and_unique() {
        let pr = params(5000, 0.05, 0.0, 1.0);
        for i in 1..50 {
            let batch = sample_out_edges(8, i, VertexSign::Excitatory, &pr, &DelayLaw::Exponential)
                .unwrap();
            assert!(batch.targets.windows(2).all(|w| w[0].target < w[1].target));
            assert!(batch
                .targets
                .iter()
                .all(|e| (e.target as usize) < 5000 && e.delay > 0.0));
        }
    }

    #[test]
    fn naive_and_geometric_agree_in_distribution() {
        let pr = params(2000, 0.02, 0.0, 1.0);
        let geo = LazyRealization::new(&pr, DelayLaw::Unit).unwrap();
        let naive = geo.clone().with_mode(SamplingMode::Naive);
        let mut buf = Vec::new();
        let mut counts = [0usize; 2];
        let mut low_half = [0usize; 2];
        for i in 1..=2000 {
            for (slot, real) in [(0, &geo as &dyn Realization), (1, &naive)] {
                real.out_edges_into(i, &mut buf);
                counts[slot] += buf.len();
                low_half[slot] += buf.iter().filter(|e| e.target < 1000).count();
            }
        }
        // each total is Bin(4e6, 0.02): mean 80000, sd ~280
        for slot in 0..2 {
            assert!((counts[slot] as f64 - 80_000.0).abs() < 1400.0);
            let frac = low_half[slot] as f64 / counts[slot] as f64;
            assert!((frac - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn tau_does_not_perturb_edges() {
        let a = params(3000, 0.01, 0.1, 2.0);
        let b = params(3000, 0.01, 0.4, 2.0);
        for i in 1..100 {
            for sign in [VertexSign::Excitatory, VertexSign::Inhibitory] {
                let x = sample_out_edges(4, i, sign, &a, &DelayLaw::Exponential).unwrap();
                let y = sample_out_edges(4, i, sign, &b, &DelayLaw::Exponential).unwrap();
                assert_eq!(x, y);
            }
        }
    }

    #[test]
    fn exponential_delays_have_unit_mean() {
        let law = DelayLaw::Exponential;
        let m = 1_000_000u32;
        let mut sum = 0.0;
        let mut below_one = 0usize;
        for j in 0..m {
            let d = law.sample(17, j / 1000 + 1, j % 1000);
            sum += d;
            below_one += (d <= 1.0) as usize;
        }
        let mean = sum / m as f64;
        let frac = below_one as f64 / m as f64;
        assert!((mean - 1.0).abs() < 0.005, "{mean}");
        assert!((frac - (1.0 - (-1f64).exp())).abs() < 0.005, "{frac}");
    }

    #[test]
    fn injected_delays_replay() {
        let mut table = HashMap::new();
        table.insert((1, 2), 0.5);
        let law = DelayLaw::Injected(Arc::new(InjectedDelays {
            table,
            fallback: 2.0,
        }));
        assert_eq!(law.sample(0, 1, 2), 0.5);
        assert_eq!(law.sample(0, 1, 3), 2.0);
    }

    #[test]
    fn eager_rows_match_lazy_draws() {
        let pr = params(300, 0.05, 0.3, 2.0);
        let eager = materialize_graph(21, &pr, &DelayLaw::Exponential).unwrap();
        for i in 1..=300u32 {
            let sign = sample_sign(21, i, pr.tau);
            assert_eq!(eager.sign(i), sign);
            let batch = sample_out_edges(21, i, sign, &pr, &DelayLaw::Exponential).unwrap();
            let (targets, delays) = eager.row(i);
            assert_eq!(targets.len(), batch.targets.len());
            for (e, (&t, &d)) in batch.targets.iter().zip(targets.iter().zip(delays)) {
                assert_eq!(e.target, t);
                assert_eq!(e.delay.to_bits(), d.to_bits());
            }
        }
    }

    #[test]
    fn eager_complete_graph() {
        let pr = params(100, 1.0, 0.0, 1.0);
        let eager = materialize_graph(0, &pr, &DelayLaw::Unit).unwrap();
        assert_eq!(eager.edge_count(), 100 * 100);
        for i in 1..=100 {
            let (targets, delays) = eager.row(i);
            assert_eq!(targets.len(), 100);
            assert!(delays.iter().all(|&d| d == 1.0));
        }
    }

    #[test]
    fn eager_edge_count() {
        let pr = params(10_000, 0.01, 0.0, 1.0);
        let eager = materialize_graph(2, &pr, &DelayLaw::Unit).unwrap();
        // Bin(10^8, 0.01): mean 10^6, sd ~995
        let count = eager.edge_count() as f64;
        assert!((count - 1e6).abs() < 3.0 * 995.0, "{count}");
    }

    #[test]
    fn eager_guard() {
        let pr = params(1_000_000, 0.001, 0.0, 1.0);
        assert!(matches!(
            materialize_graph(0, &pr, &DelayLaw::Unit),
            Err(Error::TooLargeForEagerMode { .. })
        ));
    }

    #[test]
    fn dump_round_trip() {
        let pr = params(200, 0.05, 0.4, 2.0);
        let eager = materialize_graph(pr.seed, &pr, &DelayLaw::Exponential).unwrap();
        let mut bytes = Vec::new();
        eager.write_dump(&pr, &mut bytes).unwrap();
        let (header, back) = EagerRealization::read_dump(&bytes[..]).unwrap();
        assert_eq!(header.n, 200);
        assert_eq!(header.seed, pr.seed);
        assert_eq!(back, eager);
    }
}
