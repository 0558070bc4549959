// Path features, a linear model and MAP on held-out pairs.

use dcpath::reasoning::{train_and_evaluate, ReasoningConfig};
use dcpath::search::{run_path_search, SearchConfig};
use dcpath::selection::{select_paths, SelectionThresholds};
use dcpath::synth::planted_pattern;

pub fn run_example() -> dcpath::Result<f64> {
    let planted = planted_pattern(3);
    let kg = &planted.graph;
    let result = run_path_search(kg, &planted.task, &SearchConfig::default())?;
    let paths = select_paths(&result.pool, &SelectionThresholds::NELL995);

    let outcome = train_and_evaluate(kg, &planted.task, &paths, &ReasoningConfig::default())?;
    println!("{} training rows, {} test sequences", outcome.train_rows, outcome.metrics.sequences);
    for (path, w) in paths.iter().zip(&outcome.model.weights) {
        println!("  weight {w:+.4}  {}", path.display(kg));
    }
    println!("bias {:+.4}", outcome.model.bias);
    let m = outcome.metrics;
    println!("MAP {:.4}  MRR {:.4}  mean rank {:.2}", m.map, m.mrr, m.mean_rank);
    Ok(m.map)
}

#[allow(dead_code)]
fn main() -> dcpath::Result<()> {
    run_example().map(|_| ())
}
