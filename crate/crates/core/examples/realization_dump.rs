//! Materializes a graph, writes it as a gzipped dump, reads it back and
//! replays an async run on it. The dump holds the graph only; the
//! starting size is supplied again.
//!
//!     cargo run --release --example realization_dump

use perclab::realization::materialize_graph;
use perclab::{async_engine, AsyncConfig, DelayLaw, EagerRealization, ModelParams};

fn main() -> perclab::Result<()> {
    let params = ModelParams::new(3_000, 0.005, 2, 0.25, 2.0, 100, 8);
    let graph = materialize_graph(params.seed, &params, &DelayLaw::Exponential)?;
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("graph.gz");
    graph.write_dump_file(&params, &path)?;
    println!(
        "{} edges, {} bytes on disk",
        graph.edge_count(),
        std::fs::metadata(&path)?.len()
    );

    let (read_params, read_graph) = EagerRealization::read_dump_file(&path)?;
    let before = async_engine::run(&params, &graph, &AsyncConfig::default());
    let after = async_engine::run(&read_params.with_a0(params.a0), &read_graph, &AsyncConfig::default());
    println!(
        "final {} vs {}, identical: {}",
        before.final_size(),
        after.final_size(),
        before.activations == after.activations
    );
    Ok(())
}
