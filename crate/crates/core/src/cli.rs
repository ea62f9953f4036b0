//! The `perc-lab` command line: `theory | sim | sweep | validate | chaos`.
//!
//! Every flag lives in one flat [`RunConfig`], which is also the JSON
//! config format. Flags given on the command line override the file.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 parameters outside the regime
//! of the requested operation, 4 a run hit a cap (outputs are still
//! written and carry a truncation count), 1 anything else.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::async_engine::{self, AsyncConfig, DEFAULT_TIME_CAP};
use crate::error::Error;
use crate::experiments::{
    self, ChaosConfirmation, ConcentrationConfig, DelayKind, SweepParam, SweepPoint, TrialOptions,
};
use crate::output;
use crate::params::ModelParams;
use crate::realization::{materialize_graph, LazyRealization, SamplingMode};
use crate::record::EngineKind;
use crate::theory::{self, NonMonotonePair, TheoryConfig};

pub const SEED_ENV: &str = "PERC_LAB_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_REGIME: i32 = 3;
pub const EXIT_TRUNCATED: i32 = 4;

/// Real number, scientific notation allowed.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

/// Non-negative integer; `1e6` is accepted, `2.5` is not.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v = parse_real(s)?;
    if v < 0.0 || v.fract() != 0.0 {
        return Err(format!("'{s}' is not a non-negative integer"));
    }
    if v >= 2f64.powi(53) {
        return Err(format!(
            "'{s}' is too large to be exact; write it out in digits"
        ));
    }
    Ok(v as u64)
}

fn parse_usize(s: &str) -> Result<usize, String> {
    parse_count(s).and_then(|v| usize::try_from(v).map_err(|e| e.to_string()))
}

fn parse_u32(s: &str) -> Result<u32, String> {
    parse_count(s).and_then(|v| u32::try_from(v).map_err(|e| e.to_string()))
}

fn parse_engine(s: &str) -> Result<EngineKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "sync" => Ok(EngineKind::Sync),
        "async" => Ok(EngineKind::Async),
        _ => Err(format!("engine must be sync or async, got '{s}'")),
    }
}

fn parse_delay(s: &str) -> Result<DelayKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "unit" => Ok(DelayKind::Unit),
        "exp" => Ok(DelayKind::Exp),
        _ => Err(format!("delay must be unit or exp, got '{s}'")),
    }
}

/// All flags of all subcommands. Each subcommand reads the fields it needs.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Number of vertices.
    #[arg(long, value_parser = parse_usize)]
    pub n: Option<usize>,
    /// Edge probability of excitatory sources.
    #[arg(long, value_parser = parse_real)]
    pub p: Option<f64>,
    /// Activation threshold.
    #[arg(long, value_parser = parse_u32)]
    pub k: Option<u32>,
    /// Probability that a vertex is inhibitory [default: 0].
    #[arg(long, value_parser = parse_real)]
    pub tau: Option<f64>,
    /// Inhibitory edge-probability factor [default: 1].
    #[arg(long, value_parser = parse_real)]
    pub gamma: Option<f64>,
    /// Starting-set size.
    #[arg(long, value_parser = parse_usize)]
    pub a0: Option<usize>,
    /// Base seed [default: 0]; PERC_LAB_SEED overrides it.
    #[arg(long, value_parser = parse_count)]
    pub seed: Option<u64>,
    /// sync | async [default: sync].
    #[arg(long, value_parser = parse_engine)]
    pub engine: Option<EngineKind>,
    #[arg(long, value_parser = parse_usize)]
    pub trials: Option<usize>,
    /// unit | exp, for the async engine [default: exp].
    #[arg(long, value_parser = parse_delay)]
    pub delay: Option<DelayKind>,
    /// Use per-pair Bernoulli draws instead of geometric skipping.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub naive_sampling: Option<bool>,
    #[arg(long, value_parser = parse_usize)]
    pub round_cap: Option<usize>,
    #[arg(long, value_parser = parse_real)]
    pub time_cap: Option<f64>,
    #[arg(long, value_parser = parse_usize)]
    pub active_cap: Option<usize>,
    /// Trajectory CSV (sim) or per-point table (sweep).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON; printed to stdout when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Gzipped realization dump of trial 0.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Async event log CSV of trial 0.
    #[arg(long)]
    pub event_log: Option<PathBuf>,
    #[arg(long, value_parser = parse_real)]
    pub delta: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub eps: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub band: Option<f64>,
    /// Swept parameter: n, p, k, tau, gamma or a0.
    #[arg(long)]
    pub param: Option<SweepParam>,
    /// Comma-separated grid values.
    #[arg(long, value_parser = parse_real, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Target final size for the chaos search.
    #[arg(long, value_parser = parse_real)]
    pub target: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub c_min: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub c_max: Option<f64>,
    /// Confirm the chaos search by simulation.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub confirm: Option<bool>,
    /// Worker threads [default: all cores].
    #[arg(long, value_parser = parse_usize)]
    pub jobs: Option<usize>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    /// Fields set in `top` win.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        overlay!(
            self,
            top,
            n,
            p,
            k,
            tau,
            gamma,
            a0,
            seed,
            engine,
            trials,
            delay,
            naive_sampling,
            round_cap,
            time_cap,
            active_cap,
            out,
            summary,
            dump,
            event_log,
            delta,
            eps,
            band,
            param,
            grid,
            target,
            c_min,
            c_max,
            confirm,
            jobs
        )
    }

    fn model(&self, need_a0: bool) -> Result<ModelParams, Failure> {
        let missing = |name: &str| Failure::usage(format!("missing required --{name}"));
        let a0 = match self.a0 {
            Some(a0) => a0,
            None if need_a0 => return Err(missing("a0")),
            None => 0,
        };
        let params = ModelParams::new(
            self.n.ok_or_else(|| missing("n"))?,
            self.p.ok_or_else(|| missing("p"))?,
            self.k.ok_or_else(|| missing("k"))?,
            self.tau.unwrap_or(0.0),
            self.gamma.unwrap_or(1.0),
            a0,
            self.seed.unwrap_or(0),
        );
        params.validate()?;
        Ok(params)
    }

    fn engine(&self) -> EngineKind {
        self.engine.unwrap_or(EngineKind::Sync)
    }

    fn trials(&self) -> Result<usize, Failure> {
        match self.trials.unwrap_or(1) {
            0 => Err(Failure::usage("--trials must be at least 1")),
            t => Ok(t),
        }
    }

    fn trial_options(&self) -> TrialOptions {
        TrialOptions {
            delay: self.delay.unwrap_or_default(),
            round_cap: self.round_cap,
            async_config: AsyncConfig {
                time_cap: self.time_cap.unwrap_or(DEFAULT_TIME_CAP),
                active_cap: self.active_cap,
                log_events: false,
            },
            mode: if self.naive_sampling.unwrap_or(false) {
                SamplingMode::Naive
            } else {
                SamplingMode::Geometric
            },
            theory: self.theory_config(),
        }
    }

    fn theory_config(&self) -> TheoryConfig {
        let d = TheoryConfig::default();
        TheoryConfig {
            delta: self.delta.unwrap_or(d.delta),
            eps: self.eps.unwrap_or(d.eps),
            ..d
        }
    }

    fn outputs(&self) -> impl Iterator<Item = &PathBuf> {
        [&self.out, &self.summary, &self.dump, &self.event_log]
            .into_iter()
            .flatten()
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "perc-lab",
    version,
    about = "Bootstrap percolation with inhibition on random digraphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Invocation {
    #[command(flatten)]
    pub run: RunConfig,
    /// Read flags from a JSON file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the resolved flags as JSON, then run.
    #[arg(long)]
    pub emit_config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form predictions as JSON.
    Theory(Invocation),
    /// Repeated simulations: trajectory CSV and summary JSON.
    Sim(Invocation),
    /// Trials at each value of a one-parameter grid.
    Sweep(Invocation),
    /// Compare synchronous rounds with the expected trajectory.
    Validate(Invocation),
    /// Plateau scan and starting size for a target final size.
    Chaos(Invocation),
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_regime_error() {
            EXIT_REGIME
        } else {
            match e {
                Error::InvalidParameter { .. }
                | Error::InvalidProbability { .. }
                | Error::InvalidThreshold { .. }
                | Error::InhibitionOnly
                | Error::DegenerateBias => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        };
        let mut message = e.to_string();
        if let Error::TargetUnreachable { plateaus, .. } = &e {
            message.push_str("\nplateaus: ");
            message.push_str(&serde_json::to_string(plateaus).unwrap_or_default());
        }
        Failure { code, message }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Errors go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("perc-lab: {}", f.message);
            f.code
        }
    }
}

fn resolve(inv: Invocation) -> Result<RunConfig, Failure> {
    let mut config = match &inv.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            let file: RunConfig = serde_json::from_str(&text)
                .map_err(|e| Failure::usage(format!("bad config {}: {e}", path.display())))?;
            file.overlay(inv.run)
        }
        None => inv.run,
    };
    if let Ok(raw) = std::env::var(SEED_ENV) {
        let seed = parse_count(&raw).map_err(|e| Failure::usage(format!("{SEED_ENV}: {e}")))?;
        config.seed = Some(seed);
    }
    if let Some(path) = &inv.emit_config {
        output::check_writable(path)?;
        output::write_json_file(path, &config)?;
    }
    Ok(config)
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    let (inv, f): (Invocation, fn(&RunConfig) -> Result<i32, Failure>) = match command {
        Command::Theory(i) => (i, cmd_theory),
        Command::Sim(i) => (i, cmd_sim),
        Command::Sweep(i) => (i, cmd_sweep),
        Command::Validate(i) => (i, cmd_validate),
        Command::Chaos(i) => (i, cmd_chaos),
    };
    let config = resolve(inv)?;
    for path in config.outputs() {
        output::check_writable(path)?;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = config.jobs {
        pool = pool.num_threads(jobs.max(1));
    }
    let pool = pool.build().map_err(|e| Failure {
        code: EXIT_FAILURE,
        message: e.to_string(),
    })?;
    pool.install(|| f(&config))
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    match path {
        Some(path) => output::write_json_file(path, value)?,
        None => output::write_json(std::io::stdout().lock(), value)?,
    }
    Ok(())
}

const TRAJ_PREFIX: usize = 20;

fn cmd_theory(config: &RunConfig) -> Result<i32, Failure> {
    let params = config.model(true)?;
    let report = theory::report(&params, &config.theory_config())?;
    let prefix: Vec<f64> = report.traj.iter().take(TRAJ_PREFIX).copied().collect();
    let value = json!({
        "params": report.params,
        "a_c": report.a_c,
        "lambda": report.lambda,
        "beta": report.beta,
        "ell": report.ell,
        "predicted_rounds": report.predicted_rounds,
        "predicted_final": report.predicted_final,
        "regime": report.regime,
        "in_janson_regime": report.in_janson_regime,
        "traj": prefix,
        "notes": report.notes,
    });
    emit_json(config.summary.as_deref(), &value)?;
    Ok(EXIT_OK)
}

fn cmd_sim(config: &RunConfig) -> Result<i32, Failure> {
    let params = config.model(true)?;
    let engine = config.engine();
    let opts = config.trial_options();
    let base_seed = params.seed;
    let (summary, records) =
        experiments::run_trials_with_records(&params, engine, config.trials()?, base_seed, &opts)?;

    if let Some(path) = &config.out {
        output::write_trajectories_file(path, &records)?;
    }
    if let Some(path) = &config.dump {
        let delay = match engine {
            EngineKind::Sync => DelayKind::Unit,
            EngineKind::Async => opts.delay,
        };
        let graph = materialize_graph(base_seed, &params, &delay.law())?;
        graph.write_dump_file(&params.with_seed(base_seed), path)?;
    }
    if let Some(path) = &config.event_log {
        let first = params.with_seed(base_seed);
        let real = LazyRealization::new(&first, opts.delay.law())?.with_mode(opts.mode);
        let log_config = AsyncConfig {
            log_events: true,
            ..opts.async_config
        };
        let (_, log) = async_engine::run_with_log(&first, &real, &log_config);
        output::write_event_log_file(path, &log)?;
    }
    emit_json(config.summary.as_deref(), &summary)?;
    Ok(if summary.truncated_count > 0 {
        EXIT_TRUNCATED
    } else {
        EXIT_OK
    })
}

fn write_sweep_table(path: &Path, points: &[SweepPoint]) -> crate::Result<()> {
    output::write_atomic(path, |file| {
        let mut csv = csv::Writer::from_writer(std::io::BufWriter::new(file));
        csv.write_record([
            "value",
            "mean_final",
            "sd_final",
            "q05",
            "q50",
            "q95",
            "mean_rounds_or_time",
            "fraction_fully_percolated",
            "truncated_count",
            "error",
        ])?;
        for point in points {
            let mut row = vec![point.value.to_string()];
            match &point.summary {
                Some(s) => row.extend([
                    s.mean_final.to_string(),
                    s.sd_final.map_or(String::new(), |v| v.to_string()),
                    s.q05.to_string(),
                    s.q50.to_string(),
                    s.q95.to_string(),
                    s.mean_rounds_or_time.to_string(),
                    s.fraction_fully_percolated.to_string(),
                    s.truncated_count.to_string(),
                    String::new(),
                ]),
                None => {
                    row.extend(std::iter::repeat_n(String::new(), 8));
                    row.push(point.error.clone().unwrap_or_default());
                }
            }
            csv.write_record(&row)?;
        }
        csv.flush()?;
        Ok(())
    })
}

fn cmd_sweep(config: &RunConfig) -> Result<i32, Failure> {
    let param = config
        .param
        .ok_or_else(|| Failure::usage("missing required --param"))?;
    let grid = config
        .grid
        .as_deref()
        .ok_or_else(|| Failure::usage("missing required --grid"))?;
    let base = config.model(param != SweepParam::A0)?;
    let points = experiments::sweep(
        &base,
        param,
        grid,
        config.engine(),
        config.trials()?,
        base.seed,
        &config.trial_options(),
    )?;
    if let Some(path) = &config.out {
        write_sweep_table(path, &points)?;
    }
    emit_json(config.summary.as_deref(), &points)?;
    let truncated = points
        .iter()
        .filter_map(|p| p.summary.as_ref())
        .any(|s| s.truncated_count > 0);
    Ok(if truncated { EXIT_TRUNCATED } else { EXIT_OK })
}

fn cmd_validate(config: &RunConfig) -> Result<i32, Failure> {
    let params = config.model(true)?;
    let d = ConcentrationConfig::default();
    let conc = ConcentrationConfig {
        delta: config.delta.unwrap_or(d.delta),
        eps: config.eps.unwrap_or(d.eps),
        round_cap: config.round_cap,
    };
    let report = experiments::validate_concentration(
        &params,
        config.trials.unwrap_or(20).max(1),
        config.band.unwrap_or(0.25),
        params.seed,
        &conc,
    )?;
    emit_json(config.summary.as_deref(), &report)?;
    Ok(EXIT_OK)
}

/// The found point paired with the nearest starting size on the adjacent
/// plateau, ordered by `c`.
fn neighbour_pair(
    params: &ModelParams,
    found: &theory::ChaosSearch,
    delta: f64,
    max_steps: usize,
) -> crate::Result<Option<NonMonotonePair>> {
    let plateaus = &found.scan.plateaus;
    let Some(i) = plateaus.iter().position(|p| p.ell == found.ell) else {
        return Ok(None);
    };
    let cut = delta * params.n as f64;
    let a_c = found.scan.a_c;
    let eval = |c: f64| theory::ell_from_start(params, c * a_c, cut, max_steps);
    let (c1, c2) = if let Some(next) = plateaus.get(i + 1) {
        (found.c, next.c_lo)
    } else if i > 0 {
        (plateaus[i - 1].c_hi, found.c)
    } else {
        return Ok(None);
    };
    let (ell1, final1) = eval(c1)?;
    let (ell2, final2) = eval(c2)?;
    Ok(Some(NonMonotonePair {
        c1,
        c2,
        ell1,
        ell2,
        final1,
        final2,
    }))
}

fn cmd_chaos(config: &RunConfig) -> Result<i32, Failure> {
    let params = config.model(false)?;
    let tconf = config.theory_config();
    let delta = config.delta.unwrap_or(0.1);
    let c_min = config.c_min.unwrap_or(1.5);
    let c_max = config.c_max.unwrap_or(50.0);

    let (found, scan) = match config.target {
        Some(target) => {
            let found = theory::chaos_search(&params, target, c_min, c_max, delta, &tconf)?;
            let scan = found.scan.clone();
            (Some(found), scan)
        }
        None => {
            if !(params.tau * (1.0 + params.gamma) > 1.0) {
                return Err(Error::WrongRegime {
                    tau: params.tau,
                    gamma: params.gamma,
                }
                .into());
            }
            (
                None,
                theory::chaos_scan(&params, c_min, c_max, delta, &tconf)?,
            )
        }
    };

    let mut confirmation: Option<ChaosConfirmation> = None;
    if config.confirm.unwrap_or(false) {
        let pair = match &found {
            Some(f) => neighbour_pair(&params, f, delta, tconf.max_steps)?,
            None => scan.strongest_pair(),
        };
        if let Some(pair) = pair {
            confirmation = Some(experiments::confirm_chaos(
                &params,
                &pair,
                config.trials.unwrap_or(50).max(1),
                params.seed,
                &config.trial_options(),
            )?);
        }
    }

    let value = json!({
        "params": params,
        "a_c": scan.a_c,
        "c_found": found.as_ref().map(|f| f.c),
        "a0_found": found.as_ref().map(|f| f.a0),
        "ell": found.as_ref().map(|f| f.ell),
        "predicted_final": found.as_ref().map(|f| f.predicted_final),
        "target_in_regime": found.as_ref().map(|f| f.target_in_regime),
        "plateau_table": scan.plateaus,
        "strongest_pair": scan.strongest_pair(),
        "confirmation": confirmation,
    });
    emit_json(config.summary.as_deref(), &value)?;
    Ok(EXIT_OK)
}
