//! Closed-form predictors for the percolation process: threshold,
//! normalization constant, expected round trajectory, round counts, signal
//! bias and final-size predictions, plus the plateau scan behind the chaotic
//! dependence of the synchronous final size on the starting-set size.
//!
//! Everything here is a pure function of [`ModelParams`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelParams, RegimeSlack};

/// Tunables of the predictors. The asymptotic statements they stand in for
/// only say "sufficiently small" or "large enough".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConfig {
    /// Cut `delta * n` used by [`compute_ell`].
    pub delta: f64,
    /// Step budget for trajectory iteration.
    pub max_steps: usize,
    /// Margin above the threshold required for a supercritical prediction.
    pub eps: f64,
    /// Trajectories are cut once they exceed `cap_factor * n`.
    pub cap_factor: f64,
    /// Additive allowance when comparing round counts with [`predict_rounds`].
    pub round_allowance: f64,
    /// Number of grid points for the chaos scan.
    pub chaos_grid: usize,
    /// Slack for `(log n)/p << target << n` in the chaos search.
    pub target_slack: f64,
    pub slack: RegimeSlack,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        TheoryConfig {
            delta: 0.1,
            max_steps: 10_000,
            eps: 0.1,
            cap_factor: 10.0,
            round_allowance: 6.0,
            chaos_grid: 512,
            target_slack: 10.0,
            slack: RegimeSlack::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// Starting set below `(1+eps) a_c`; the process stays at `O(a_c)`.
    Subcritical,
    /// Excitation dominates; (almost) everything becomes active.
    Percolates,
    /// Inhibition dominates; the asynchronous process settles at a linear
    /// fraction independent of `a0`.
    Normalizes,
    /// `tau = 1/(1+gamma)` exactly; no numeric prediction.
    Border,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalPrediction {
    pub regime: Regime,
    /// `None` for [`Regime::Border`]. For [`Regime::Subcritical`] this is
    /// `a_c`, an order of magnitude rather than a point prediction.
    pub value: Option<f64>,
}

fn check_threshold_params(params: &ModelParams) -> Result<()> {
    if params.k < 2 {
        return Err(Error::InvalidThreshold { k: params.k });
    }
    params.validate()?;
    if params.tau >= 1.0 {
        return Err(Error::InhibitionOnly);
    }
    if params.p <= 0.0 {
        return Err(Error::param("p", "must be positive"));
    }
    Ok(())
}

fn factorial(m: u32) -> f64 {
    (1..=m).map(f64::from).product()
}

fn ln_factorial(m: u32) -> f64 {
    (1..=m).map(|i| f64::from(i).ln()).sum()
}

fn lambda_unchecked(params: &ModelParams) -> f64 {
    let k = params.k;
    let n = params.n as f64;
    let excit = 1.0 - params.tau;
    let denom = excit.powi(k as i32) * n * params.p.powi(k as i32);
    let root = 1.0 / f64::from(k - 1);
    if denom.is_normal() && factorial(k - 1).is_finite() {
        (factorial(k - 1) / denom).powf(root)
    } else {
        let kf = f64::from(k);
        let log_base = ln_factorial(k - 1) - kf * excit.ln() - n.ln() - kf * params.p.ln();
        (log_base * root).exp()
    }
}

/// Percolation threshold `a_c(n, p, k, tau)`.
///
/// Independent of `gamma` and `a0`: only excitatory edges can push a vertex
/// over the threshold while the active set is small.
pub fn compute_threshold(params: &ModelParams) -> Result<f64> {
    check_threshold_params(params)?;
    let k = f64::from(params.k);
    Ok((1.0 - 1.0 / k) * lambda_unchecked(params))
}

/// Normalization constant `Lambda = a_c / (1 - 1/k)`, the unique positive
/// fixed point of `x = (1-tau)^k n p^k x^k / (k-1)!`.
pub fn compute_lambda(params: &ModelParams) -> Result<f64> {
    check_threshold_params(params)?;
    Ok(lambda_unchecked(params))
}

/// Probability that the next signal arriving at a vertex late in the
/// asynchronous process is excitatory.
pub fn compute_beta(tau: f64, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidProbability {
            name: "tau",
            value: tau,
        });
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::param("gamma", "must be non-negative and finite"));
    }
    let denom = 1.0 - tau + gamma * tau;
    if denom == 0.0 {
        return Err(Error::DegenerateBias);
    }
    Ok((1.0 - tau) / denom)
}

/// Coefficient `(1-tau)^k n p^k / k!` of the trajectory recursion.
pub fn growth_coefficient(params: &ModelParams) -> f64 {
    let k = params.k as i32;
    (1.0 - params.tau).powi(k) * params.n as f64 * params.p.powi(k) / factorial(params.k)
}

/// Iterates `x_{t+1} = start + coef * x_t^k` from a real starting value.
///
/// Stops after `max_steps` steps or right after the first value exceeding
/// `cap`, which is kept as the last element.
pub fn trajectory_from_start(
    params: &ModelParams,
    start: f64,
    max_steps: usize,
    cap: f64,
) -> Vec<f64> {
    let coef = growth_coefficient(params);
    let k = params.k as i32;
    let mut traj = Vec::with_capacity(16);
    traj.push(start);
    let mut cur = start;
    for _ in 0..max_steps {
        if cur > cap {
            break;
        }
        cur = start + coef * cur.powi(k);
        traj.push(cur);
    }
    traj
}

/// Expected synchronous trajectory `a_hat_0 = a0, a_hat_{t+1} = a0 + (1-tau)^k n p^k a_hat_t^k / k!`.
pub fn expected_trajectory(params: &ModelParams, max_steps: usize, cap: f64) -> Result<Vec<f64>> {
    params.validate()?;
    Ok(trajectory_from_start(
        params,
        params.a0 as f64,
        max_steps,
        cap,
    ))
}

/// Largest `t` with `a_hat_t <= cut` for a trajectory started at `start`,
/// together with `a_hat_t`. Returns `(0, start)` when the start is already
/// past the cut.
pub fn ell_from_start(
    params: &ModelParams,
    start: f64,
    cut: f64,
    max_steps: usize,
) -> Result<(usize, f64)> {
    if start > cut {
        return Ok((0, start));
    }
    let coef = growth_coefficient(params);
    let k = params.k as i32;
    let mut cur = start;
    for t in 0..max_steps {
        let next = start + coef * cur.powi(k);
        if next > cut {
            return Ok((t, cur));
        }
        if next - cur <= 1e-12 * cur.max(1.0) {
            // converged to a fixed point below the cut
            return Err(Error::NoEscape {
                steps: t,
                last: next,
                cut,
            });
        }
        cur = next;
    }
    Err(Error::NoEscape {
        steps: max_steps,
        last: cur,
        cut,
    })
}

/// Index `ell` of the last expected-trajectory value not above `delta * n`.
pub fn compute_ell(params: &ModelParams, delta: f64) -> Result<usize> {
    compute_ell_with(params, delta, TheoryConfig::default().max_steps)
}

pub fn compute_ell_with(params: &ModelParams, delta: f64, max_steps: usize) -> Result<usize> {
    params.validate()?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    let cut = delta * params.n as f64;
    ell_from_start(params, params.a0 as f64, cut, max_steps).map(|(ell, _)| ell)
}

/// Leading term `log_k log_{a0/a_c}(np)` of the number of rounds until the
/// synchronous process almost percolates. Accurate only up to an additive
/// constant.
pub fn predict_rounds(params: &ModelParams) -> Result<f64> {
    let a_c = compute_threshold(params)?;
    let a0 = params.a0 as f64;
    if a0 <= a_c {
        return Err(Error::Subcritical { a0, a_c });
    }
    let np = params.n as f64 * params.p;
    if np <= 1.0 {
        return Err(Error::OutOfRegime(format!("np = {np} is not above 1")));
    }
    let ratio = a0 / a_c;
    let inner = np.ln() / ratio.ln();
    Ok(inner.ln() / f64::from(params.k).ln())
}

/// Predicted final size of the asynchronous process (and the regime it
/// falls in). Inhibition-dominated instances settle at
/// `(1-tau)^k n / (gamma tau)^k`, independent of `a0`.
pub fn predict_final_size(params: &ModelParams) -> Result<FinalPrediction> {
    predict_final_size_with(params, TheoryConfig::default().eps)
}

pub fn predict_final_size_with(params: &ModelParams, eps: f64) -> Result<FinalPrediction> {
    let a_c = compute_threshold(params)?;
    if (params.a0 as f64) < (1.0 + eps) * a_c {
        return Ok(FinalPrediction {
            regime: Regime::Subcritical,
            value: Some(a_c),
        });
    }
    let n = params.n as f64;
    let balance = params.tau * (1.0 + params.gamma);
    if (balance - 1.0).abs() <= 1e-12 {
        return Ok(FinalPrediction {
            regime: Regime::Border,
            value: None,
        });
    }
    if balance < 1.0 {
        return Ok(FinalPrediction {
            regime: Regime::Percolates,
            value: Some(n),
        });
    }
    let ratio = (1.0 - params.tau) / (params.gamma * params.tau);
    Ok(FinalPrediction {
        regime: Regime::Normalizes,
        value: Some(n * ratio.powi(params.k as i32)),
    })
}

/// One grid point of the chaos scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    /// Starting size in units of `a_c`.
    pub c: f64,
    pub ell: usize,
    /// `a_hat_ell`, the predicted stopping size.
    pub predicted_final: f64,
}

/// Maximal range of `c` on which `ell` is constant. On a plateau the
/// predicted final size is continuous and increasing in `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub ell: usize,
    pub c_lo: f64,
    pub c_hi: f64,
    pub final_lo: f64,
    pub final_hi: f64,
}

/// Two starting sizes with `c1 < c2` but a larger prediction at `c1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonMonotonePair {
    pub c1: f64,
    pub c2: f64,
    pub ell1: usize,
    pub ell2: usize,
    pub final1: f64,
    pub final2: f64,
}

impl NonMonotonePair {
    pub fn drop_ratio(&self) -> f64 {
        self.final1 / self.final2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosScan {
    pub a_c: f64,
    pub cut: f64,
    pub points: Vec<ScanPoint>,
    pub plateaus: Vec<Plateau>,
}

impl ChaosScan {
    /// Grid neighbours straddling each plateau boundary where the
    /// prediction drops.
    pub fn non_monotone_pairs(&self) -> Vec<NonMonotonePair> {
        self.points
            .windows(2)
            .filter(|w| w[0].ell != w[1].ell && w[0].predicted_final > w[1].predicted_final)
            .map(|w| NonMonotonePair {
                c1: w[0].c,
                c2: w[1].c,
                ell1: w[0].ell,
                ell2: w[1].ell,
                final1: w[0].predicted_final,
                final2: w[1].predicted_final,
            })
            .collect()
    }

    /// The boundary pair with the largest predicted drop.
    pub fn strongest_pair(&self) -> Option<NonMonotonePair> {
        self.non_monotone_pairs()
            .into_iter()
            .max_by(|a, b| a.drop_ratio().total_cmp(&b.drop_ratio()))
    }
}

struct ScanContext<'a> {
    params: &'a ModelParams,
    a_c: f64,
    cut: f64,
    max_steps: usize,
}

impl ScanContext<'_> {
    fn eval(&self, c: f64) -> Result<ScanPoint> {
        let (ell, predicted_final) =
            ell_from_start(self.params, c * self.a_c, self.cut, self.max_steps)?;
        Ok(ScanPoint {
            c,
            ell,
            predicted_final,
        })
    }

    /// Bisects for the boundary between `lo` (plateau `lo.ell`) and `hi`.
    /// Returns the last point still on `lo`'s plateau and the first point
    /// past it.
    fn boundary(&self, mut lo: ScanPoint, mut hi: ScanPoint) -> Result<(ScanPoint, ScanPoint)> {
        for _ in 0..80 {
            let mid = 0.5 * (lo.c + hi.c);
            if mid <= lo.c || mid >= hi.c {
                break;
            }
            let point = self.eval(mid)?;
            if point.ell == lo.ell {
                lo = point;
            } else {
                hi = point;
            }
        }
        Ok((lo, hi))
    }
}

/// Scans `c` over a geometric grid in `[c_min, c_max]`, starting the
/// expected trajectory at `c * a_c`, and groups the grid into plateaus of
/// constant `ell` with refined boundaries.
pub fn chaos_scan(
    params: &ModelParams,
    c_min: f64,
    c_max: f64,
    delta: f64,
    config: &TheoryConfig,
) -> Result<ChaosScan> {
    if !(c_min > 0.0 && c_max > c_min && c_max.is_finite()) {
        return Err(Error::param("c", "need 0 < c_min < c_max"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    let a_c = compute_threshold(params)?;
    let ctx = ScanContext {
        params,
        a_c,
        cut: delta * params.n as f64,
        max_steps: config.max_steps,
    };
    let grid = config.chaos_grid.max(2);
    let step = (c_max / c_min).ln() / (grid - 1) as f64;
    let points = (0..grid)
        .map(|i| {
            let c = if i + 1 == grid {
                c_max
            } else {
                c_min * (step * i as f64).exp()
            };
            ctx.eval(c)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut plateaus = Vec::new();
    let mut start = points[0];
    for w in points.windows(2) {
        if w[0].ell != w[1].ell {
            let (last, first) = ctx.boundary(w[0], w[1])?;
            plateaus.push(Plateau {
                ell: start.ell,
                c_lo: start.c,
                c_hi: last.c,
                final_lo: start.predicted_final,
                final_hi: last.predicted_final,
            });
            start = first;
        }
    }
    let last = points[points.len() - 1];
    plateaus.push(Plateau {
        ell: start.ell,
        c_lo: start.c,
        c_hi: last.c,
        final_lo: start.predicted_final,
        final_hi: last.predicted_final,
    });

    Ok(ChaosScan {
        a_c,
        cut: ctx.cut,
        points,
        plateaus,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosSearch {
    pub c: f64,
    /// `floor(c * a_c)`, the integer starting size to simulate.
    pub a0: usize,
    pub ell: usize,
    pub predicted_final: f64,
    pub target: f64,
    /// Whether `(log n)/p << target << n` holds with the configured slack.
    pub target_in_regime: bool,
    pub scan: ChaosScan,
}

/// Finds `c` in `[c_min, c_max]` whose predicted stopping size is within 1%
/// of `target`. Plateaus are tried in order of increasing `c`; inside a
/// plateau the prediction is increasing, so bisection applies.
pub fn chaos_search(
    params: &ModelParams,
    target: f64,
    c_min: f64,
    c_max: f64,
    delta: f64,
    config: &TheoryConfig,
) -> Result<ChaosSearch> {
    params.validate()?;
    if params.tau * (1.0 + params.gamma) <= 1.0 {
        return Err(Error::WrongRegime {
            tau: params.tau,
            gamma: params.gamma,
        });
    }
    if !(target > 0.0) {
        return Err(Error::param("target", "must be positive"));
    }
    let scan = chaos_scan(params, c_min, c_max, delta, config)?;
    let ctx = ScanContext {
        params,
        a_c: scan.a_c,
        cut: scan.cut,
        max_steps: config.max_steps,
    };
    let n = params.n as f64;
    let target_in_regime =
        target >= config.target_slack * n.ln() / params.p && target * config.target_slack <= n;
    let close = |value: f64| (value - target).abs() <= 0.01 * target;

    let mut found = None;
    for plateau in &scan.plateaus {
        if close(plateau.final_lo) {
            found = Some(ctx.eval(plateau.c_lo)?);
        } else if close(plateau.final_hi) {
            found = Some(ctx.eval(plateau.c_hi)?);
        } else if plateau.final_lo < target && target < plateau.final_hi {
            let (mut lo, mut hi) = (plateau.c_lo, plateau.c_hi);
            for _ in 0..200 {
                let point = ctx.eval(0.5 * (lo + hi))?;
                if point.ell != plateau.ell {
                    break;
                }
                if (point.predicted_final - target).abs() <= 1e-4 * target {
                    found = Some(point);
                    break;
                }
                if point.predicted_final < target {
                    lo = point.c;
                } else {
                    hi = point.c;
                }
            }
        }
        if found.is_some() {
            break;
        }
    }

    match found {
        Some(point) => Ok(ChaosSearch {
            c: point.c,
            a0: (point.c * scan.a_c).floor() as usize,
            ell: point.ell,
            predicted_final: point.predicted_final,
            target,
            target_in_regime,
            scan,
        }),
        None => Err(Error::TargetUnreachable {
            target,
            plateaus: scan.plateaus,
        }),
    }
}

/// Everything the closed-form side has to say about one parameter tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub params: ModelParams,
    pub a_c: f64,
    pub lambda: f64,
    pub beta: f64,
    pub traj: Vec<f64>,
    pub ell: Option<usize>,
    pub predicted_rounds: Option<f64>,
    pub predicted_final: Option<f64>,
    pub regime: Regime,
    pub in_janson_regime: bool,
    /// Why optional fields are missing.
    pub notes: Vec<String>,
}

/// Collects all predictors. Fails only when the threshold itself is
/// undefined; predictors outside their regime leave their field empty and
/// add a note.
pub fn report(params: &ModelParams, config: &TheoryConfig) -> Result<TheoryReport> {
    let a_c = compute_threshold(params)?;
    let lambda = compute_lambda(params)?;
    let beta = compute_beta(params.tau, params.gamma)?;
    let cap = config.cap_factor * params.n as f64;
    let traj = expected_trajectory(params, config.max_steps, cap)?;
    let mut notes = Vec::new();
    let ell = compute_ell_with(params, config.delta, config.max_steps)
        .map_err(|e| notes.push(format!("ell: {e}")))
        .ok();
    let predicted_rounds = predict_rounds(params)
        .map_err(|e| notes.push(format!("predicted_rounds: {e}")))
        .ok();
    let prediction = predict_final_size_with(params, config.eps)?;
    Ok(TheoryReport {
        params: *params,
        a_c,
        lambda,
        beta,
        traj,
        ell,
        predicted_rounds,
        predicted_final: prediction.value,
        regime: prediction.regime,
        in_janson_regime: params.in_janson_regime(&config.slack),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ModelParams {
        ModelParams::new(1_000_000, 1e-4, 2, 0.0, 1.0, 100, 0)
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn threshold_examples() {
        assert!(rel_close(compute_threshold(&base()).unwrap(), 50.0, 1e-12));
        let half = ModelParams { tau: 0.5, ..base() };
        assert!(rel_close(compute_threshold(&half).unwrap(), 200.0, 1e-12));
        let g7 = ModelParams {
            gamma: 7.0,
            ..base()
        };
        assert_eq!(
            compute_threshold(&base()).unwrap().to_bits(),
            compute_threshold(&g7).unwrap().to_bits()
        );
    }

    #[test]
    fn threshold_errors() {
        let only = ModelParams { tau: 1.0, ..base() };
        assert!(matches!(
            compute_threshold(&only),
            Err(Error::InhibitionOnly)
        ));
        let k1 = ModelParams { k: 1, ..base() };
        assert!(matches!(
            compute_threshold(&k1),
            Err(Error::InvalidThreshold { k: 1 })
        ));
    }

    #[test]
    fn lambda_examples() {
        let lambda = compute_lambda(&base()).unwrap();
        assert!(rel_close(lambda, 100.0, 1e-12));
        // 10^6 * 10^-8 * 100^2 / 1! = 100
        let fixed = 1e6 * 1e-8 * lambda * lambda;
        assert!(rel_close(fixed, lambda, 1e-12));
        let unit = ModelParams::new(100, 0.1, 2, 0.0, 1.0, 1, 0);
        assert!(rel_close(compute_lambda(&unit).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn beta_examples() {
        assert!(rel_close(
            compute_beta(0.3, 5.0).unwrap(),
            7.0 / 22.0,
            1e-15
        ));
        assert_eq!(compute_beta(0.5, 1.0).unwrap(), 0.5);
        assert_eq!(compute_beta(0.0, 123.0).unwrap(), 1.0);
        assert!(matches!(compute_beta(1.0, 0.0), Err(Error::DegenerateBias)));
    }

    #[test]
    fn trajectory_examples() {
        let traj = expected_trajectory(&base(), 10, 1e7).unwrap();
        assert_eq!(&traj[..4], &[100.0, 150.0, 212.5, 325.78125]);
        assert!(traj.windows(2).all(|w| w[1] > w[0]));
        // minimal growth: 150/100 >= (100/50)^(1/2)
        assert!(traj[1] / traj[0] >= 2f64.sqrt());

        let empty = expected_trajectory(&base().with_a0(0), 5, 1e7).unwrap();
        assert_eq!(empty, vec![0.0; 6]);
    }

    #[test]
    fn trajectory_keeps_first_value_past_cap() {
        let traj = expected_trajectory(&base(), 100, 1e7).unwrap();
        let last = *traj.last().unwrap();
        assert!(last > 1e7);
        assert!(traj[..traj.len() - 1].iter().all(|&x| x <= 1e7));
    }

    #[test]
    fn ell_examples() {
        assert_eq!(compute_ell(&base(), 0.1).unwrap(), 6);
        assert_eq!(compute_ell(&base(), 0.5).unwrap(), 6);
        let big = base().with_a0(200_000);
        assert_eq!(compute_ell(&big, 0.1).unwrap(), 0);
    }

    #[test]
    fn ell_reports_stall() {
        // a0 well below the threshold converges to a fixed point
        let low = base().with_a0(10);
        assert!(matches!(
            compute_ell(&low, 0.1),
            Err(Error::NoEscape { .. })
        ));
    }

    #[test]
    fn rounds_examples() {
        let rounds = predict_rounds(&base()).unwrap();
        assert!((rounds - 100f64.log2().log2()).abs() < 1e-12);
        assert!((rounds - 2.732).abs() < 1e-3);
        // a0 / a_c = np = 100
        let same = base().with_a0(5000);
        assert!(predict_rounds(&same).unwrap().abs() < 1e-12);
        let ell = compute_ell(&base(), 0.1).unwrap() as f64;
        assert!(ell - rounds <= TheoryConfig::default().round_allowance);

        assert!(matches!(
            predict_rounds(&base().with_a0(50)),
            Err(Error::Subcritical { .. })
        ));
        let sparse = ModelParams {
            p: 5e-7,
            a0: 1_000_000,
            ..base()
        };
        assert!(matches!(
            predict_rounds(&sparse),
            Err(Error::OutOfRegime(_)) | Err(Error::Subcritical { .. })
        ));
    }

    #[test]
    fn final_size_examples() {
        let norm = ModelParams::new(7000, 0.1, 3, 0.3, 5.0, 100, 0);
        let pred = predict_final_size(&norm).unwrap();
        assert_eq!(pred.regime, Regime::Normalizes);
        let expected = (0.7f64 / 1.5).powi(3) * 7000.0;
        assert!(rel_close(pred.value.unwrap(), expected, 1e-12));
        assert!((pred.value.unwrap() - 711.4).abs() < 0.05);

        let strong = ModelParams { tau: 0.2, ..norm };
        let pred = predict_final_size(&strong).unwrap();
        assert_eq!(pred.regime, Regime::Normalizes);
        assert!(rel_close(pred.value.unwrap(), 3584.0, 1e-12));

        let perc = ModelParams {
            tau: 0.1,
            gamma: 1.0,
            ..norm
        };
        let pred = predict_final_size(&perc).unwrap();
        assert_eq!(pred.regime, Regime::Percolates);
        assert_eq!(pred.value, Some(7000.0));

        let border = ModelParams {
            tau: 0.25,
            gamma: 3.0,
            ..norm
        };
        let pred = predict_final_size(&border).unwrap();
        assert_eq!(pred.regime, Regime::Border);
        assert_eq!(pred.value, None);

        let sub = ModelParams { a0: 0, ..norm };
        assert_eq!(
            predict_final_size(&sub).unwrap().regime,
            Regime::Subcritical
        );

        // tau = 0 takes the percolating branch, no division by gamma * tau
        let clean = ModelParams { tau: 0.0, ..norm };
        assert_eq!(
            predict_final_size(&clean).unwrap().regime,
            Regime::Percolates
        );
    }

    fn chaos_params() -> ModelParams {
        ModelParams::new(100_000, 3.16e-4, 2, 0.5, 3.0, 0, 0)
    }

    #[test]
    fn chaos_scan_has_non_monotone_pairs() {
        let config = TheoryConfig::default();
        let scan = chaos_scan(&chaos_params(), 1.5, 50.0, 0.1, &config).unwrap();
        assert!(scan.plateaus.len() >= 2);
        for plateau in &scan.plateaus {
            assert!(plateau.c_lo <= plateau.c_hi);
            assert!(plateau.final_lo <= plateau.final_hi);
            if plateau.ell > 0 {
                assert!(plateau.final_hi <= scan.cut);
            }
        }
        // ell only decreases in c
        assert!(scan.points.windows(2).all(|w| w[1].ell <= w[0].ell));
        let pairs = scan.non_monotone_pairs();
        assert!(!pairs.is_empty());
        assert!(pairs.iter().all(|p| p.c1 < p.c2 && p.final1 > p.final2));
    }

    #[test]
    fn chaos_search_hits_c_min() {
        let config = TheoryConfig::default();
        let params = chaos_params();
        let a_c = compute_threshold(&params).unwrap();
        let (_, at_min) = ell_from_start(&params, 1.5 * a_c, 1e4, 10_000).unwrap();
        let found = chaos_search(&params, at_min, 1.5, 50.0, 0.1, &config).unwrap();
        assert_eq!(found.c, 1.5);
    }

    #[test]
    fn chaos_search_bisects_inside_plateau() {
        let config = TheoryConfig::default();
        let params = chaos_params();
        let target = 8000.0;
        let found = chaos_search(&params, target, 1.5, 50.0, 0.1, &config).unwrap();
        assert!((found.predicted_final - target).abs() <= 0.01 * target);
        assert!(found.c >= 1.5 && found.c <= 50.0);
    }

    #[test]
    fn chaos_search_errors() {
        let config = TheoryConfig::default();
        let params = chaos_params();
        // nothing can exceed the cut delta * n = 10^4
        assert!(matches!(
            chaos_search(&params, 50_000.0, 1.5, 50.0, 0.1, &config),
            Err(Error::TargetUnreachable { .. })
        ));
        let tame = ModelParams { tau: 0.2, ..params };
        assert!(matches!(
            chaos_search(&tame, 5000.0, 1.5, 50.0, 0.1, &config),
            Err(Error::WrongRegime { .. })
        ));
    }

    #[test]
    fn scaling_c_multiplies_prediction_at_fixed_step() {
        // Multiplying the start by a large constant at a fixed step index
        // grows a_hat by more than a factor np.
        let params = chaos_params();
        let a_c = compute_threshold(&params).unwrap();
        let np = params.n as f64 * params.p;
        let a = trajectory_from_start(&params, 1.5 * a_c, 5, f64::INFINITY);
        let b = trajectory_from_start(&params, 6.0 * a_c, 5, f64::INFINITY);
        assert!(b[4] / a[4] >= np);
    }

    #[test]
    fn report_fills_fields() {
        let rep = report(&base(), &TheoryConfig::default()).unwrap();
        assert!(rel_close(rep.a_c, 50.0, 1e-12));
        assert!(rel_close(rep.lambda, 100.0, 1e-12));
        assert_eq!(rep.beta, 1.0);
        assert_eq!(rep.ell, Some(6));
        assert_eq!(rep.regime, Regime::Percolates);
        assert!(rep.notes.is_empty());

        let sub = report(&base().with_a0(10), &TheoryConfig::default()).unwrap();
        assert_eq!(sub.ell, None);
        assert_eq!(sub.predicted_rounds, None);
        assert_eq!(sub.notes.len(), 2);
    }
}
