// Path count and MAP as the confidence floor rises, on one cached pool.

use dcpath::pipeline::{threshold_sweep, SweepPoint};
use dcpath::search::{run_path_search, SearchConfig};
use dcpath::synth::planted_pattern;
use dcpath::RunConfig;

pub fn run_example() -> dcpath::Result<Vec<SweepPoint>> {
    let planted = planted_pattern(4);
    let result = run_path_search(&planted.graph, &planted.task, &SearchConfig::default())?;
    let cfg = RunConfig::default();
    let points = threshold_sweep(&planted.graph, &planted.task, &result.pool, &cfg, &cfg.sweep_grid)?;
    println!("threshold  paths  MAP");
    for p in &points {
        println!("{:>9.2}  {:>5}  {:.4}", p.threshold, p.path_count, p.map);
    }
    Ok(points)
}

#[allow(dead_code)]
fn main() -> dcpath::Result<()> {
    run_example().map(|_| ())
}
