//! Below the threshold the process stalls near its start, above it
//! (without inhibition) everything activates.
//!
//!     cargo run --release --example threshold_dichotomy

use perclab::experiments::{run_trials, TrialOptions};
use perclab::{theory, EngineKind, ModelParams};

fn main() -> perclab::Result<()> {
    let base = ModelParams::new(100_000, 2.24e-4, 2, 0.0, 1.0, 0, 0);
    let a_c = theory::compute_threshold(&base)?;
    println!("a_c = {a_c:.2}");
    println!("{:>6} {:>6} {:>10} {:>8}", "c", "a0", "mean", "full");
    for c in [0.5, 0.8, 0.95, 1.05, 1.25, 2.0] {
        let a0 = (c * a_c).round() as usize;
        let s = run_trials(
            &base.with_a0(a0),
            EngineKind::Sync,
            40,
            1,
            &TrialOptions::default(),
        )?;
        println!(
            "{c:>6} {a0:>6} {:>10.1} {:>8.2}",
            s.mean_final, s.fraction_fully_percolated
        );
    }
    Ok(())
}
