//! With exponential delays and excitation dominating, the final size
//! concentrates at `n` times the hitting probability of a biased walk.
//!
//!     cargo run --release --example async_normalization

use perclab::experiments::{run_trials, TrialOptions};
use perclab::random_walk::hitting_probability;
use perclab::{theory, EngineKind, ModelParams};

fn main() -> perclab::Result<()> {
    for tau in [0.2, 0.3] {
        let params = ModelParams::new(20_000, 0.01, 3, tau, 5.0, 100, 0);
        let beta = theory::compute_beta(tau, params.gamma)?;
        let predicted = params.n as f64 * hitting_probability(beta, params.k);
        let s = run_trials(&params, EngineKind::Async, 20, 3, &TrialOptions::default())?;
        println!(
            "tau={tau}: beta={beta:.4} predicted={predicted:.1} simulated={:.1} (q05 {}, q95 {}) time={:.3}",
            s.mean_final, s.q05, s.q95, s.mean_rounds_or_time
        );
    }
    Ok(())
}
