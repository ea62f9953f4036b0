//! Lazy and eager realizations give identical runs, and the async engine
//! with unit delays reproduces the synchronous rounds.
//!
//!     cargo run --release --example engine_equivalence

use perclab::realization::materialize_graph;
use perclab::{async_engine, sync_engine, AsyncConfig, DelayLaw, LazyRealization, ModelParams};

fn main() -> perclab::Result<()> {
    let params = ModelParams::new(5_000, 0.004, 2, 0.2, 2.0, 150, 42);
    let lazy = LazyRealization::new(&params, DelayLaw::Unit)?;
    let eager = materialize_graph(params.seed, &params, &DelayLaw::Unit)?;

    let a = sync_engine::run(&params, &lazy, None);
    let b = sync_engine::run(&params, &eager, None);
    println!("sync lazy == eager: {}", a.activations == b.activations);
    println!("round sizes: {:?}", a.round_sizes);

    let timed = async_engine::run(&params, &lazy, &AsyncConfig::default());
    let same = a
        .activations
        .iter()
        .zip(&timed.activations)
        .all(|(x, y)| x.vertex == y.vertex && x.time == y.time);
    println!(
        "unit-delay async == sync: {same} ({} activations)",
        timed.final_size()
    );

    let sample: Vec<u32> = (0..params.n as u32).step_by(50).collect();
    println!(
        "counter audit: {}",
        sync_engine::audit_counters(&params, &lazy, &sample)
    );
    Ok(())
}
