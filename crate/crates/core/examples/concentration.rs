//! Per-round comparison of simulated sync trajectories with the expected
//! trajectory.
//!
//!     cargo run --release --example concentration

use perclab::experiments::{validate_concentration, ConcentrationConfig};
use perclab::ModelParams;

fn main() -> perclab::Result<()> {
    let params = ModelParams::new(100_000, 2.24e-4, 2, 0.0, 1.0, 200, 0);
    let report = validate_concentration(&params, 20, 0.25, 5, &ConcentrationConfig::default())?;
    for r in &report.rounds {
        println!(
            "round {:>2}: a_hat={:>9.1} within band {}/{}",
            r.round, r.a_hat, r.passes, r.checks
        );
    }
    println!(
        "overall {:.3}, flags {:?}",
        report.pass_fraction, report.flags
    );
    Ok(())
}
