//! A one-parameter sweep written as CSV rows to stdout.
//!
//!     cargo run --release --example sweep_table

use perclab::experiments::{sweep, SweepParam, TrialOptions};
use perclab::{EngineKind, ModelParams};

fn main() -> perclab::Result<()> {
    let base = ModelParams::new(20_000, 0.01, 3, 0.0, 5.0, 100, 0);
    let grid = [0.0, 0.1, 0.2, 0.3, 0.4];
    let points = sweep(
        &base,
        SweepParam::Tau,
        &grid,
        EngineKind::Async,
        10,
        2,
        &TrialOptions::default(),
    )?;
    println!("tau,mean_final,predicted_final");
    for p in points {
        let s = p.summary.expect("in range");
        let predicted = s.theory.and_then(|t| t.predicted_final);
        println!(
            "{},{:.1},{}",
            p.value,
            s.mean_final,
            predicted.map_or(String::new(), |v| format!("{v:.1}"))
        );
    }
    Ok(())
}
