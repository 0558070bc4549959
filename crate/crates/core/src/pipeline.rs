//! End-to-end orchestration: configuration, per-task execution and report
//! files.
//!
//! Each task writes into `<output_dir>/<task>/`:
//!
//! * `pool.jsonl` - pool snapshot, one path per line;
//! * `selected.jsonl` - the same records with a kept/rejected verdict;
//! * `metrics.json` - one JSON record with the ranking metrics;
//! * `manifest.json` - configuration, its hash, seeds, version and timings;
//! * `sweep.csv` - written by the threshold sweep only.
//!
//! Everything except the manifest is a deterministic function of the
//! configuration and the input files.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kg::{load_task, load_triples, GraphStats, KnowledgeGraph, TaskSplit};
use crate::path_eval::{PathFeature, DEFAULT_MAX_PATH_LENGTH};
use crate::reasoning::{train_and_evaluate, ModelKind, ReasoningConfig, TrainConfig};
use crate::search::{
    read_pool_snapshot, relation_confidence, run_path_search, write_pool_snapshot, PathPool, PoolRecord,
    SearchConfig, SearchLog,
};
use crate::selection::{select_paths, selection_report, write_selection_report, SelectionThresholds};

/// Flat key/value run configuration (TOML syntax). Every key has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Triple file.
    pub graph: PathBuf,
    /// Directory holding one sub-directory per target relation.
    pub tasks_dir: PathBuf,
    /// Task names to run; empty means every task directory.
    pub tasks: Vec<String>,
    pub output_dir: PathBuf,

    pub inverse_relations: bool,
    pub fanin_threshold: usize,

    pub max_path_length: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub out_degree_threshold: usize,
    pub sample_size: usize,
    pub warmup_pairs: usize,
    pub seed: u64,
    pub pruning: bool,
    pub sampling: bool,
    pub early_stop: bool,
    pub exhaustive: bool,

    /// Preset name: nell995, fb15k237-lowered, fb15k237-original, all.
    pub thresholds: String,
    pub theta_c1: Option<f64>,
    pub theta_c2: Option<f64>,
    pub theta_p1: Option<f64>,
    pub theta_p2: Option<f64>,

    pub n_neg: usize,
    pub negative_seed: u64,
    pub lambda: f64,
    pub model: ModelKind,

    /// Reuse `pool.jsonl` from the output directory instead of searching.
    pub reuse_pool: bool,

    pub sweep_grid: Vec<f64>,
    pub sweep_theta_c1: f64,
    pub sweep_theta_p1: f64,
    pub sweep_coverage: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let search = SearchConfig::default();
        let reasoning = ReasoningConfig::default();
        Self {
            graph: PathBuf::from("graph.tsv"),
            tasks_dir: PathBuf::from("tasks"),
            tasks: Vec::new(),
            output_dir: PathBuf::from("out"),
            inverse_relations: true,
            fanin_threshold: 100,
            max_path_length: DEFAULT_MAX_PATH_LENGTH,
            alpha: search.alpha,
            beta: search.beta,
            gamma: search.gamma,
            out_degree_threshold: search.out_degree_threshold,
            sample_size: search.sample_size,
            warmup_pairs: search.warmup_pairs,
            seed: search.seed,
            pruning: search.pruning,
            sampling: search.sampling,
            early_stop: search.early_stop,
            exhaustive: search.exhaustive,
            thresholds: "nell995".into(),
            theta_c1: None,
            theta_c2: None,
            theta_p1: None,
            theta_p2: None,
            n_neg: reasoning.n_neg,
            negative_seed: reasoning.negative_seed,
            lambda: reasoning.train.lambda,
            model: reasoning.train.kind,
            reuse_pool: false,
            sweep_grid: vec![0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
            sweep_theta_c1: 0.3,
            sweep_theta_p1: 0.01,
            sweep_coverage: 0.01,
        }
    }
}

impl RunConfig {
    /// Parses TOML text, applies `key=value` overrides, and resolves
    /// relative paths against `base_dir`.
    pub fn parse(text: &str, overrides: &[String], base_dir: Option<&Path>) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for ov in overrides {
            let (key, value) = ov
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {ov:?} is not key=value")))?;
            let (key, value) = (key.trim(), value.trim());
            let parsed = format!("v = {value}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(value.to_owned()));
            table.insert(key.to_owned(), parsed);
        }
        let mut cfg: RunConfig = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let Some(base) = base_dir {
            for p in [&mut cfg.graph, &mut cfg.tasks_dir, &mut cfg.output_dir] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text, overrides, path.parent())
    }

    pub fn validate(&self) -> Result<()> {
        self.search_config().validate()?;
        self.selection_thresholds()?.validate()?;
        if self.fanin_threshold == 0 {
            return Err(Error::Config("fanin_threshold must be positive".into()));
        }
        if self.n_neg == 0 {
            return Err(Error::Config("n_neg must be at least 1".into()));
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return Err(Error::Config("lambda must be non-negative".into()));
        }
        Ok(())
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            max_path_length: self.max_path_length,
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            out_degree_threshold: self.out_degree_threshold,
            sample_size: self.sample_size,
            warmup_pairs: self.warmup_pairs,
            seed: self.seed,
            pruning: self.pruning,
            sampling: self.sampling,
            early_stop: self.early_stop,
            exhaustive: self.exhaustive,
        }
    }

    /// The named preset with any explicit `theta_*` keys applied on top.
    pub fn selection_thresholds(&self) -> Result<SelectionThresholds> {
        let mut th = SelectionThresholds::preset(&self.thresholds)
            .ok_or_else(|| Error::Config(format!("unknown threshold preset {:?}", self.thresholds)))?;
        if let Some(v) = self.theta_c1 {
            th.theta_c1 = v;
        }
        if let Some(v) = self.theta_c2 {
            th.theta_c2 = v;
        }
        if let Some(v) = self.theta_p1 {
            th.theta_p1 = v;
        }
        if let Some(v) = self.theta_p2 {
            th.theta_p2 = v;
        }
        Ok(th)
    }

    pub fn reasoning_config(&self) -> ReasoningConfig {
        ReasoningConfig {
            n_neg: self.n_neg,
            negative_seed: self.negative_seed,
            train: TrainConfig {
                kind: self.model,
                lambda: self.lambda,
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

/// Metrics record written to `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics {
    pub task: String,
    pub relation: String,
    pub path_count: usize,
    pub map: f64,
    pub mrr: f64,
    pub mean_rank: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub train_rows: usize,
    pub test_sequences: usize,
    pub skipped_train: usize,
    pub skipped_test: usize,
    pub model_degenerate: bool,
    pub seed: u64,
    pub negative_seed: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timings {
    pub search_ms: u128,
    pub select_ms: u128,
    pub reasoning_ms: u128,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub task: String,
    pub config_hash: String,
    pub seed: u64,
    pub negative_seed: u64,
    pub graph: GraphStats,
    pub pool_reused: bool,
    pub search_log: Option<SearchLog>,
    pub timings: Timings,
    pub config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub metrics: TaskMetrics,
    pub timings: Timings,
    pub dir: PathBuf,
}

#[derive(Debug)]
pub struct RunSummary {
    pub completed: Vec<TaskOutcome>,
    pub failed: Vec<(String, Error)>,
}

impl RunSummary {
    pub fn average_map(&self) -> Option<f64> {
        (!self.completed.is_empty())
            .then(|| self.completed.iter().map(|t| t.metrics.map).sum::<f64>() / self.completed.len() as f64)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.display().to_string(),
        source: e,
    }
}

/// Loads the triple file and, when configured, adds inverse relations.
pub fn load_graph(cfg: &RunConfig) -> Result<KnowledgeGraph> {
    let f = fs::File::open(&cfg.graph).map_err(io_err(&cfg.graph))?;
    let kg = load_triples(BufReader::new(f))?;
    if !cfg.inverse_relations {
        return Ok(kg);
    }
    let out = kg.add_inverse_relations(cfg.fanin_threshold)?;
    if !out.filtered.is_empty() {
        log::info!(
            "{} relations exceed fan-in {} and gained no inverse",
            out.filtered.len(),
            cfg.fanin_threshold
        );
    }
    Ok(out.graph)
}

/// Task directory names, sorted, restricted to `cfg.tasks` when non-empty.
pub fn task_names(cfg: &RunConfig) -> Result<Vec<String>> {
    if !cfg.tasks.is_empty() {
        return Ok(cfg.tasks.clone());
    }
    let mut names = Vec::new();
    for entry in fs::read_dir(&cfg.tasks_dir).map_err(io_err(&cfg.tasks_dir))? {
        let entry = entry.map_err(io_err(&cfg.tasks_dir))?;
        if entry.path().is_dir() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(io_err(path))
}

/// Searches (or reloads) the pool for one task and writes `pool.jsonl`.
fn task_pool(kg: &KnowledgeGraph, task: &TaskSplit, cfg: &RunConfig, dir: &Path) -> Result<(PathPool, Option<SearchLog>)> {
    let pool_path = dir.join("pool.jsonl");
    if cfg.reuse_pool && pool_path.exists() {
        let f = fs::File::open(&pool_path).map_err(io_err(&pool_path))?;
        return Ok((read_pool_snapshot(kg, BufReader::new(f))?, None));
    }
    let result = run_path_search(kg, task, &cfg.search_config())?;
    let mut buf = Vec::new();
    write_pool_snapshot(kg, &result.pool, &mut buf)?;
    write_file(&pool_path, &buf)?;
    Ok((result.pool, Some(result.log)))
}

/// Selection, training and evaluation on a finished pool.
pub fn evaluate_pool(
    kg: &KnowledgeGraph,
    task: &TaskSplit,
    pool: &PathPool,
    th: &SelectionThresholds,
    cfg: &RunConfig,
) -> Result<(Vec<PathFeature>, TaskMetrics)> {
    let paths = select_paths(pool, th);
    let outcome = train_and_evaluate(kg, task, &paths, &cfg.reasoning_config())?;
    let metrics = TaskMetrics {
        task: task.name.clone(),
        relation: kg.relation_label(task.relation).to_owned(),
        path_count: paths.len(),
        map: outcome.metrics.map,
        mrr: outcome.metrics.mrr,
        mean_rank: outcome.metrics.mean_rank,
        train_size: task.train.len(),
        test_size: task.test.len(),
        train_rows: outcome.train_rows,
        test_sequences: outcome.metrics.sequences,
        skipped_train: outcome.skipped_train,
        skipped_test: outcome.skipped_test,
        model_degenerate: outcome.model.degenerate,
        seed: cfg.seed,
        negative_seed: cfg.negative_seed,
    };
    Ok((paths, metrics))
}

/// Runs every phase for one task and writes its reports.
pub fn run_task(kg: &KnowledgeGraph, name: &str, cfg: &RunConfig) -> Result<TaskOutcome> {
    let task = load_task(kg, &cfg.tasks_dir.join(name), None)?;
    let dir = cfg.output_dir.join(name);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let th = cfg.selection_thresholds()?;

    let t0 = Instant::now();
    let (pool, search_log) = task_pool(kg, &task, cfg, &dir)?;
    let search_ms = t0.elapsed().as_millis();

    let t1 = Instant::now();
    let report = selection_report(kg, &pool, &th);
    let mut buf = Vec::new();
    write_selection_report(&report, &mut buf)?;
    write_file(&dir.join("selected.jsonl"), &buf)?;
    let select_ms = t1.elapsed().as_millis();

    let t2 = Instant::now();
    let (_, metrics) = evaluate_pool(kg, &task, &pool, &th, cfg)?;
    let mut line = serde_json::to_vec(&metrics)?;
    line.push(b'\n');
    write_file(&dir.join("metrics.json"), &line)?;
    let reasoning_ms = t2.elapsed().as_millis();

    let timings = Timings {
        search_ms,
        select_ms,
        reasoning_ms,
    };
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        task: name.to_owned(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        negative_seed: cfg.negative_seed,
        graph: kg.stats(),
        pool_reused: search_log.is_none(),
        search_log,
        timings: timings.clone(),
        config: cfg.clone(),
    };
    write_file(&dir.join("manifest.json"), &serde_json::to_vec_pretty(&manifest)?)?;
    log::info!(
        "task {name}: {} paths, MAP {:.4}, MRR {:.4}",
        metrics.path_count,
        metrics.map,
        metrics.mrr
    );
    Ok(TaskOutcome { metrics, timings, dir })
}

/// Runs all configured tasks. Task failures are collected, not fatal; a
/// graph that cannot be loaded is.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary> {
    let kg = load_graph(cfg)?;
    let names = task_names(cfg)?;
    fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
    let mut summary = RunSummary {
        completed: Vec::new(),
        failed: Vec::new(),
    };
    for name in names {
        match run_task(&kg, &name, cfg) {
            Ok(outcome) => summary.completed.push(outcome),
            Err(e) => {
                log::error!("task {name} failed: {e}");
                summary.failed.push((name, e));
            }
        }
    }
    write_summary(cfg, &summary)?;
    Ok(summary)
}

fn write_summary(cfg: &RunConfig, summary: &RunSummary) -> Result<()> {
    let mut out = String::from("task,path_count,map,mrr,mean_rank\n");
    for t in &summary.completed {
        let m = &t.metrics;
        out.push_str(&format!("{},{},{},{},{}\n", m.task, m.path_count, m.map, m.mrr, m.mean_rank));
    }
    if let Some(avg) = summary.average_map() {
        out.push_str(&format!("average,,{avg},,\n"));
    }
    write_file(&cfg.output_dir.join("summary.csv"), out.as_bytes())
}

/// One row of a threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub path_count: usize,
    pub map: f64,
}

/// Thresholds for one sweep point: the confidence floor for longer paths is
/// `threshold`; single-relation floors and the coverage floor stay fixed.
pub fn sweep_thresholds(cfg: &RunConfig, threshold: f64) -> SelectionThresholds {
    SelectionThresholds::new(cfg.sweep_theta_c1, threshold, cfg.sweep_theta_p1, cfg.sweep_coverage)
}

/// Re-selects and re-trains on a fixed pool for each grid value.
pub fn threshold_sweep(
    kg: &KnowledgeGraph,
    task: &TaskSplit,
    pool: &PathPool,
    cfg: &RunConfig,
    grid: &[f64],
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    grid.iter()
        .map(|&threshold| {
            let th = sweep_thresholds(cfg, threshold);
            th.validate()?;
            let (paths, metrics) = evaluate_pool(kg, task, pool, &th, cfg)?;
            Ok(SweepPoint {
                threshold,
                path_count: paths.len(),
                map: metrics.map,
            })
        })
        .collect()
}

/// Sweep over every configured task, reusing `pool.jsonl` when present.
/// Writes `<task>/sweep.csv` and returns the rows per task.
pub fn cmd_threshold_sweep(cfg: &RunConfig, grid: &[f64]) -> Result<Vec<(String, Vec<SweepPoint>)>> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let kg = load_graph(cfg)?;
    let mut cfg = cfg.clone();
    cfg.reuse_pool = true;
    let mut out = Vec::new();
    for name in task_names(&cfg)? {
        let task = load_task(&kg, &cfg.tasks_dir.join(&name), None)?;
        let dir = cfg.output_dir.join(&name);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let (pool, _) = task_pool(&kg, &task, &cfg, &dir)?;
        let points = threshold_sweep(&kg, &task, &pool, &cfg, grid)?;
        let mut csv = String::from("threshold,path_count,map\n");
        for p in &points {
            csv.push_str(&format!("{},{},{}\n", p.threshold, p.path_count, p.map));
        }
        write_file(&dir.join("sweep.csv"), csv.as_bytes())?;
        out.push((name, points));
    }
    Ok(out)
}

/// Pool overview: the best paths and the relations with the highest
/// relation confidence.
#[derive(Debug, Clone, Serialize)]
pub struct PoolSummary {
    pub paths: usize,
    pub top_paths: Vec<PoolRecord>,
    pub top_relations: Vec<(String, f64)>,
}

/// Summarizes a pool snapshot file without needing the graph.
pub fn inspect_pool(path: &Path, top: usize) -> Result<PoolSummary> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut records = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        records.push(serde_json::from_str::<PoolRecord>(line)?);
    }
    let mut labels: Vec<String> = records.iter().flat_map(|r| r.path.iter().cloned()).collect();
    labels.sort();
    labels.dedup();
    let n = records.len();
    let mut top_relations: Vec<(String, f64)> = labels
        .into_iter()
        .map(|label| {
            let row: Vec<f64> = records
                .iter()
                .map(|r| if r.path.contains(&label) { r.d_confidence } else { 0.0 })
                .collect();
            let a = if n == 0 { 0.0 } else { relation_confidence(&row) };
            (label, a)
        })
        .collect();
    top_relations.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    top_relations.truncate(top);
    Ok(PoolSummary {
        paths: n,
        top_paths: records.into_iter().take(top).collect(),
        top_relations,
    })
}

/// Writes `summary` as readable text.
pub fn print_pool_summary<W: Write>(summary: &PoolSummary, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} paths", summary.paths)?;
    writeln!(out, "{:>8} {:>8}  path", "conf", "cov")?;
    for r in &summary.top_paths {
        writeln!(out, "{:>8.4} {:>8.4}  {}", r.d_confidence, r.d_coverage, r.path.join(" -> "))?;
    }
    writeln!(out, "\nrelation confidence")?;
    for (label, a) in &summary.top_relations {
        writeln!(out, "{a:>8.4}  {label}")?;
    }
    Ok(())
}

/// Writes a TOML config for a dataset directory laid out as
/// `graph.tsv` + `tasks/`.
pub fn write_config(path: &Path, cfg: &RunConfig) -> Result<()> {
    let f = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(f);
    w.write_all(cfg.to_toml().as_bytes()).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_settings() {
        let cfg = RunConfig::default();
        assert_eq!((cfg.alpha, cfg.beta, cfg.gamma), (0.99, 0.01, 0.5));
        assert_eq!(cfg.max_path_length, 3);
        assert_eq!(cfg.selection_thresholds().unwrap(), SelectionThresholds::NELL995);
    }

    #[test]
    fn overrides_and_presets() {
        let cfg = RunConfig::parse(
            "thresholds = \"fb15k237-original\"\nseed = 3\n",
            &["seed=11".into(), "theta_c2 = 0.25".into(), "model=logistic".into()],
            None,
        )
        .unwrap();
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.model, ModelKind::Logistic);
        assert_eq!(cfg.selection_thresholds().unwrap(), SelectionThresholds::new(0.2, 0.25, 0.02, 0.2));
        let lowered = RunConfig::parse("thresholds = \"fb15k237\"", &[], None).unwrap();
        assert_eq!(lowered.selection_thresholds().unwrap(), SelectionThresholds::FB15K237_LOWERED);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(RunConfig::parse("no_such_key = 1", &[], None).is_err());
        assert!(RunConfig::parse("thresholds = \"x\"", &[], None).is_err());
        assert!(RunConfig::parse("alpha = 0.9\nbeta = 0.2", &[], None).is_err());
        assert!(RunConfig::parse("", &["seed".into()], None).is_err());
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let cfg = RunConfig::parse("graph = \"g.tsv\"", &[], Some(Path::new("/data/x"))).unwrap();
        assert_eq!(cfg.graph, PathBuf::from("/data/x/g.tsv"));
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let b = RunConfig { seed: 1, ..RunConfig::default() };
        assert_eq!(a.hash(), RunConfig::default().hash());
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(cmd_threshold_sweep(&RunConfig::default(), &[]).is_err());
    }
}
