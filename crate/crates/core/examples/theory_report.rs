//! Closed-form predictions for one parameter tuple.
//!
//!     cargo run --release --example theory_report

use perclab::theory::{self, TheoryConfig};
use perclab::ModelParams;

fn main() -> perclab::Result<()> {
    let cases = [
        (
            "no inhibition",
            ModelParams::new(1_000_000, 1e-4, 2, 0.0, 1.0, 100, 0),
        ),
        (
            "normalizing",
            ModelParams::new(7_000, 0.1, 3, 0.3, 5.0, 100, 0),
        ),
        (
            "inhibition dominates",
            ModelParams::new(100_000, 3.16e-4, 2, 0.5, 3.0, 400, 0),
        ),
    ];
    for (label, params) in cases {
        let r = theory::report(&params, &TheoryConfig::default())?;
        println!(
            "{label}: n={} p={} k={} tau={} gamma={} a0={}",
            params.n, params.p, params.k, params.tau, params.gamma, params.a0
        );
        println!(
            "  a_c = {:.3}, lambda = {:.3}, beta = {:.4}",
            r.a_c, r.lambda, r.beta
        );
        println!(
            "  regime = {:?}, predicted final = {:?}",
            r.regime, r.predicted_final
        );
        println!("  ell = {:?}, rounds = {:?}", r.ell, r.predicted_rounds);
        let head: Vec<String> = r.traj.iter().take(6).map(|x| format!("{x:.1}")).collect();
        println!("  trajectory: {} ...", head.join(", "));
        for note in &r.notes {
            println!("  note: {note}");
        }
    }
    Ok(())
}
