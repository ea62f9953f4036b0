//! Closed-form hitting probability against Monte Carlo walks.
//!
//!     cargo run --release --example random_walk_oracle

use perclab::random_walk::{drift_check, hitting_probability, simulate_hit, WalkSpec};

fn main() {
    println!("{:>5} {:>2} {:>9} {:>9}", "beta", "k", "exact", "mc");
    for beta in [0.3, 0.5, 0.6, 0.8] {
        for k in [1, 2, 4] {
            let spec = WalkSpec::new(beta, k).with_step_cap(1_000_000);
            let mc = simulate_hit(&spec, 7, 200_000);
            println!(
                "{beta:>5} {k:>2} {:>9.5} {mc:>9.5}",
                hitting_probability(beta, k)
            );
        }
    }
    let d = drift_check(0.65, 2_000, 5_000, 1);
    println!(
        "drift at beta=0.65: mean {:.4} (sd {:.4}), expected {:.4}",
        d.mean, d.sd, d.expected
    );
}
