//! Seeded multi-trial harness: repeated runs, one-parameter sweeps,
//! trajectory concentration checks and the simulated side of the chaos
//! demonstration.
//!
//! Trial `i` of a batch uses seed `base_seed ^ i`. Trials run in parallel
//! but are collected in index order, so summaries are reproducible
//! byte-for-byte whatever the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::async_engine::{self, AsyncConfig};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::realization::{DelayLaw, LazyRealization, SamplingMode};
use crate::record::{EngineKind, TrajectoryRecord};
use crate::sync_engine;
use crate::theory::{self, NonMonotonePair, TheoryConfig, TheoryReport};

/// Delay law in serializable form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DelayKind {
    Unit,
    #[default]
    Exp,
}

impl DelayKind {
    pub fn law(self) -> DelayLaw {
        match self {
            DelayKind::Unit => DelayLaw::Unit,
            DelayKind::Exp => DelayLaw::Exponential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOptions {
    /// Only used by the asynchronous engine.
    pub delay: DelayKind,
    pub round_cap: Option<usize>,
    pub async_config: AsyncConfig,
    pub mode: SamplingMode,
    pub theory: TheoryConfig,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            delay: DelayKind::Exp,
            round_cap: None,
            async_config: AsyncConfig::default(),
            mode: SamplingMode::Geometric,
            theory: TheoryConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub params: ModelParams,
    pub engine: EngineKind,
    pub base_seed: u64,
    pub trials: usize,
    pub final_sizes: Vec<usize>,
    pub mean_final: f64,
    /// Sample standard deviation; absent for a single trial.
    pub sd_final: Option<f64>,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    /// Sync: rounds that activated something. Async: last activation time.
    pub mean_rounds_or_time: f64,
    pub fraction_fully_percolated: f64,
    pub truncated_count: usize,
    pub theory: Option<TheoryReport>,
}

impl TrialSummary {
    /// Standard error of `mean_final`, zero for a single trial.
    pub fn standard_error(&self) -> f64 {
        self.sd_final.unwrap_or(0.0) / (self.trials as f64).sqrt()
    }
}

/// Mean, sample sd and quantiles of a sample, recomputable from the values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub sd: Option<f64>,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

/// Linear interpolation between order statistics at `q * (len - 1)`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn stats(values: &[f64]) -> Stats {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let sd = (values.len() > 1).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (m - 1.0)).sqrt()
    });
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Stats {
        mean,
        sd,
        q05: quantile(&sorted, 0.05),
        q50: quantile(&sorted, 0.5),
        q95: quantile(&sorted, 0.95),
    }
}

/// Runs one trial on a lazily sampled realization.
pub fn run_single(
    params: &ModelParams,
    engine: EngineKind,
    opts: &TrialOptions,
) -> Result<TrajectoryRecord> {
    match engine {
        EngineKind::Sync => {
            let real = LazyRealization::new(params, DelayLaw::Unit)?.with_mode(opts.mode);
            Ok(sync_engine::run(params, &real, opts.round_cap))
        }
        EngineKind::Async => {
            let real = LazyRealization::new(params, opts.delay.law())?.with_mode(opts.mode);
            Ok(async_engine::run(params, &real, &opts.async_config))
        }
    }
}

fn rounds_or_time(record: &TrajectoryRecord) -> f64 {
    match record.engine {
        EngineKind::Sync => record.round_sizes.len().saturating_sub(1) as f64,
        EngineKind::Async => record.end_time(),
    }
}

/// Aggregates finished records into a summary.
pub fn summarize(
    params: &ModelParams,
    engine: EngineKind,
    base_seed: u64,
    records: &[TrajectoryRecord],
    theory_config: &TheoryConfig,
) -> TrialSummary {
    let final_sizes: Vec<usize> = records.iter().map(|r| r.final_size()).collect();
    let finals: Vec<f64> = final_sizes.iter().map(|&s| s as f64).collect();
    let st = stats(&finals);
    let m = records.len() as f64;
    TrialSummary {
        params: params.with_seed(base_seed),
        engine,
        base_seed,
        trials: records.len(),
        mean_final: st.mean,
        sd_final: st.sd,
        q05: st.q05,
        q50: st.q50,
        q95: st.q95,
        mean_rounds_or_time: records.iter().map(rounds_or_time).sum::<f64>() / m,
        fraction_fully_percolated: records.iter().filter(|r| r.fully_percolated()).count() as f64
            / m,
        truncated_count: records.iter().filter(|r| r.truncated()).count(),
        theory: theory::report(params, theory_config).ok(),
        final_sizes,
    }
}

/// Like [`run_trials`], also returning every trajectory in trial order.
pub fn run_trials_with_records(
    params: &ModelParams,
    engine: EngineKind,
    trials: usize,
    base_seed: u64,
    opts: &TrialOptions,
) -> Result<(TrialSummary, Vec<TrajectoryRecord>)> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    params.validate()?;
    let records = (0..trials)
        .into_par_iter()
        .map(|i| run_single(&params.with_seed(base_seed ^ i as u64), engine, opts))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(params, engine, base_seed, &records, &opts.theory);
    Ok((summary, records))
}

pub fn run_trials(
    params: &ModelParams,
    engine: EngineKind,
    trials: usize,
    base_seed: u64,
    opts: &TrialOptions,
) -> Result<TrialSummary> {
    run_trials_with_records(params, engine, trials, base_seed, opts).map(|(s, _)| s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    N,
    P,
    K,
    Tau,
    Gamma,
    A0,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::N => "n",
            SweepParam::P => "p",
            SweepParam::K => "k",
            SweepParam::Tau => "tau",
            SweepParam::Gamma => "gamma",
            SweepParam::A0 => "a0",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &ModelParams, value: f64) -> Result<ModelParams> {
        let integral = || {
            if value.fract() != 0.0 || value < 0.0 || !value.is_finite() {
                Err(Error::param(
                    self.name(),
                    format!("{value} is not a non-negative integer"),
                ))
            } else {
                Ok(value)
            }
        };
        let mut p = *base;
        match self {
            SweepParam::N => p.n = integral()? as usize,
            SweepParam::P => p.p = value,
            SweepParam::K => p.k = integral()? as u32,
            SweepParam::Tau => p.tau = value,
            SweepParam::Gamma => p.gamma = value,
            SweepParam::A0 => p.a0 = integral()? as usize,
        }
        Ok(p)
    }
}

impl std::str::FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "n" => SweepParam::N,
            "p" => SweepParam::P,
            "k" => SweepParam::K,
            "tau" => SweepParam::Tau,
            "gamma" => SweepParam::Gamma,
            "a0" => SweepParam::A0,
            _ => return Err(format!("unknown sweep parameter '{s}'")),
        })
    }
}

/// One grid point; exactly one of `summary` and `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub summary: Option<TrialSummary>,
    pub error: Option<String>,
}

/// Runs [`run_trials`] at each grid value with the same `base_seed`, so
/// neighbouring points share realizations. A failing point is recorded and
/// the sweep moves on.
pub fn sweep(
    base: &ModelParams,
    param: SweepParam,
    grid: &[f64],
    engine: EngineKind,
    trials: usize,
    base_seed: u64,
    opts: &TrialOptions,
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::param("grid", "must not be empty"));
    }
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    let decreasing = grid.windows(2).all(|w| w[0] > w[1]);
    if !(increasing || decreasing) {
        return Err(Error::param("grid", "must be strictly monotone"));
    }
    Ok(grid
        .iter()
        .map(|&value| {
            let result = param
                .apply(base, value)
                .and_then(|p| run_trials(&p, engine, trials, base_seed, opts));
            match result {
                Ok(s) => SweepPoint {
                    value,
                    summary: Some(s),
                    error: None,
                },
                Err(e) => SweepPoint {
                    value,
                    summary: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

pub const OUT_OF_REGIME: &str = "OUT_OF_REGIME";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    /// Rounds are checked while `a_hat_t <= delta * n`.
    pub delta: f64,
    /// Slack in the starting-size hypothesis.
    pub eps: f64,
    pub round_cap: Option<usize>,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        ConcentrationConfig {
            delta: 0.05,
            eps: 0.1,
            round_cap: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundCheck {
    pub round: usize,
    pub a_hat: f64,
    pub checks: usize,
    pub passes: usize,
    pub pass_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub params: ModelParams,
    pub trials: usize,
    pub band: f64,
    pub delta: f64,
    pub flags: Vec<String>,
    pub rounds: Vec<RoundCheck>,
    pub total_checks: usize,
    pub total_passes: usize,
    pub pass_fraction: f64,
}

impl ConcentrationReport {
    pub fn out_of_regime(&self) -> bool {
        self.flags.iter().any(|f| f == OUT_OF_REGIME)
    }
}

/// `a0 >= max{(1+eps) a_c, (ln n)^(2+eps)}`.
pub fn concentration_hypothesis(params: &ModelParams, eps: f64) -> Result<bool> {
    let a_c = theory::compute_threshold(params)?;
    let log_floor = (params.n as f64).ln().powf(2.0 + eps);
    Ok(params.a0 as f64 >= ((1.0 + eps) * a_c).max(log_floor))
}

/// Runs `trials` synchronous trials and checks, for every round `t >= 1`
/// with `a_hat_t <= delta n`, whether `a_t` lies within `(1 +- band) a_hat_t`.
/// A process that stopped early keeps its final size in later rounds.
pub fn validate_concentration(
    params: &ModelParams,
    trials: usize,
    band: f64,
    base_seed: u64,
    config: &ConcentrationConfig,
) -> Result<ConcentrationReport> {
    if !(band >= 0.0) {
        return Err(Error::param("band", "must be non-negative"));
    }
    let mut flags = Vec::new();
    if !concentration_hypothesis(params, config.eps)? {
        flags.push(OUT_OF_REGIME.to_string());
    }
    let cut = config.delta * params.n as f64;
    let traj = theory::trajectory_from_start(params, params.a0 as f64, 10_000, cut);
    let checked: Vec<(usize, f64)> = traj
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &a)| a <= cut)
        .map(|(t, &a)| (t, a))
        .collect();

    let opts = TrialOptions {
        round_cap: config.round_cap,
        ..TrialOptions::default()
    };
    let (_, records) = run_trials_with_records(params, EngineKind::Sync, trials, base_seed, &opts)?;
    let rounds: Vec<RoundCheck> = checked
        .iter()
        .map(|&(t, a_hat)| {
            let passes = records
                .iter()
                .filter(|r| {
                    let a_t = *r.round_sizes.get(t).or(r.round_sizes.last()).unwrap_or(&0) as f64;
                    (1.0 - band) * a_hat <= a_t && a_t <= (1.0 + band) * a_hat
                })
                .count();
            RoundCheck {
                round: t,
                a_hat,
                checks: records.len(),
                passes,
                pass_fraction: passes as f64 / records.len() as f64,
            }
        })
        .collect();
    let total_checks: usize = rounds.iter().map(|r| r.checks).sum();
    let total_passes: usize = rounds.iter().map(|r| r.passes).sum();
    Ok(ConcentrationReport {
        params: params.with_seed(base_seed),
        trials,
        band,
        delta: config.delta,
        flags,
        rounds,
        total_checks,
        total_passes,
        pass_fraction: if total_checks == 0 {
            1.0
        } else {
            total_passes as f64 / total_checks as f64
        },
    })
}

/// Simulated check of one predicted non-monotone pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosConfirmation {
    pub pair: NonMonotonePair,
    pub a0_1: usize,
    pub a0_2: usize,
    pub summary1: TrialSummary,
    pub summary2: TrialSummary,
    /// `(mean1 - mean2) / sqrt(se1^2 + se2^2)`; positive when the means are
    /// ordered opposite to `c`.
    pub separation: f64,
}

impl ChaosConfirmation {
    pub fn confirmed(&self, min_separation: f64) -> bool {
        self.separation >= min_separation
    }
}

/// Runs synchronous trials at `a0 = floor(c * a_c)` for both ends of `pair`.
pub fn confirm_chaos(
    params: &ModelParams,
    pair: &NonMonotonePair,
    trials: usize,
    base_seed: u64,
    opts: &TrialOptions,
) -> Result<ChaosConfirmation> {
    let a_c = theory::compute_threshold(params)?;
    let a0_1 = (pair.c1 * a_c).floor() as usize;
    let a0_2 = (pair.c2 * a_c).floor() as usize;
    let summary1 = run_trials(
        &params.with_a0(a0_1),
        EngineKind::Sync,
        trials,
        base_seed,
        opts,
    )?;
    let summary2 = run_trials(
        &params.with_a0(a0_2),
        EngineKind::Sync,
        trials,
        base_seed,
        opts,
    )?;
    let se = summary1.standard_error().hypot(summary2.standard_error());
    let diff = summary1.mean_final - summary2.mean_final;
    let separation = if se > 0.0 {
        diff / se
    } else if diff > 0.0 {
        f64::INFINITY
    } else if diff < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    };
    Ok(ChaosConfirmation {
        pair: *pair,
        a0_1,
        a0_2,
        summary1,
        summary2,
        separation,
    })
}
