// Dataset on disk, config file, full run and the reports it writes.

use std::path::Path;

use dcpath::pipeline::{cmd_run, write_config};
use dcpath::synth::{planted_pattern, write_dataset};
use dcpath::RunConfig;

pub fn run_example() -> dcpath::Result<f64> {
    let dir = tempfile::tempdir().map_err(dcpath::Error::Stream)?;
    let root = dir.path();
    let planted = planted_pattern(5);
    write_dataset(root, &planted.base, &[&planted.task])?;

    let cfg = RunConfig {
        graph: root.join("graph.tsv"),
        tasks_dir: root.join("tasks"),
        output_dir: root.join("out"),
        ..RunConfig::default()
    };
    write_config(&root.join("run.toml"), &cfg)?;
    let cfg = RunConfig::load(&root.join("run.toml"), &["seed=5".to_owned()])?;
    let summary = cmd_run(&cfg)?;

    for t in &summary.completed {
        println!("{}: {} paths, MAP {:.4}", t.metrics.task, t.metrics.path_count, t.metrics.map);
        list(&t.dir);
    }
    Ok(summary.average_map().unwrap_or(0.0))
}

fn list(dir: &Path) {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    println!("  reports: {}", names.join(", "));
}

#[allow(dead_code)]
fn main() -> dcpath::Result<()> {
    run_example().map(|_| ())
}
