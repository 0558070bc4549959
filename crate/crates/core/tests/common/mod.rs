#![allow(dead_code)]

use std::path::{Path, PathBuf};

use dcpath::synth::{planted_pattern, write_dataset};
use dcpath::RunConfig;

/// Writes the planted dataset for `seed` under `dir` and returns a config
/// pointing at it, with outputs in `dir/out`.
pub fn planted_run_config(dir: &Path, seed: u64) -> RunConfig {
    let planted = planted_pattern(seed);
    write_dataset(dir, &planted.base, &[&planted.task]).unwrap();
    RunConfig {
        graph: dir.join("graph.tsv"),
        tasks_dir: dir.join("tasks"),
        output_dir: dir.join("out"),
        seed,
        ..RunConfig::default()
    }
}

pub fn task_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join(dcpath::synth::PLANTED_TARGET)
}
