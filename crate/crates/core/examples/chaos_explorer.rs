//! Plateaus of the predicted final size when inhibition dominates: a larger
//! start can end smaller because it reaches the cut one round earlier.
//!
//!     cargo run --release --example chaos_explorer [target]

use perclab::theory::{self, TheoryConfig};
use perclab::ModelParams;

fn main() -> perclab::Result<()> {
    let params = ModelParams::new(100_000, 3.16e-4, 2, 0.5, 3.0, 0, 0);
    let config = TheoryConfig::default();
    let scan = theory::chaos_scan(&params, 1.5, 50.0, 0.1, &config)?;
    println!("a_c = {:.2}, cut = {}", scan.a_c, scan.cut);
    println!(
        "{:>4} {:>9} {:>9} {:>10} {:>10}",
        "ell", "c_lo", "c_hi", "final_lo", "final_hi"
    );
    for p in &scan.plateaus {
        println!(
            "{:>4} {:>9.4} {:>9.4} {:>10.1} {:>10.1}",
            p.ell, p.c_lo, p.c_hi, p.final_lo, p.final_hi
        );
    }
    if let Some(pair) = scan.strongest_pair() {
        println!(
            "c={:.4} -> {:.1} but c={:.4} -> {:.1}",
            pair.c1, pair.final1, pair.c2, pair.final2
        );
    }
    if let Some(target) = std::env::args().nth(1).and_then(|s| s.parse::<f64>().ok()) {
        match theory::chaos_search(&params, target, 1.5, 50.0, 0.1, &config) {
            Ok(found) => println!(
                "target {target}: c={:.5} a0={} ell={}",
                found.c, found.a0, found.ell
            ),
            Err(e) => println!("target {target}: {e}"),
        }
    }
    Ok(())
}
