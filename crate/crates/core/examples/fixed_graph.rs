//! Starting sets compared on one fixed labelled digraph. Without inhibition
//! a larger start never ends smaller; with inhibition it can.
//!
//!     cargo run --release --example fixed_graph

use perclab::{sync_engine, theory, DelayLaw, LabelledGraph, ModelParams};

fn main() -> perclab::Result<()> {
    for tau in [0.0, 0.5] {
        let params = ModelParams::new(20_000, 1e-3, 2, tau, 3.0, 0, 5);
        let graph = LabelledGraph::sample(params.seed, &params, &DelayLaw::Unit)?;
        let a_c = theory::compute_threshold(&params)?;
        let finals: Vec<usize> = (1..=12)
            .map(|i| {
                let a0 = (0.25 * i as f64 * a_c) as usize;
                sync_engine::run(&params.with_a0(a0), &graph, None).final_size()
            })
            .collect();
        let drops = finals.windows(2).filter(|w| w[1] < w[0]).count();
        println!("tau={tau}: a_c={a_c:.1} finals {finals:?} ({drops} drops)");
    }
    Ok(())
}
