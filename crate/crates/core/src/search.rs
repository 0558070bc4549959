//! Confidence-guided path search.
//!
//! Training pairs are visited in order. For each pair a bounded depth-first
//! search enumerates relation sequences from the head, and the per-pair walk
//! tallies are folded into a [`PathPool`]. The pool's dynamic confidences
//! feed a relation/path matrix whose row statistics decide, for later pairs,
//! how likely each relation branch is to be expanded at all.
//!
//! Three strategies narrow the search once enabled:
//!
//! * pruning: after `warmup_pairs` pairs, a relation branch is skipped with
//!   probability `1 - (alpha * A_r + beta)^gamma`;
//! * sampling: a relation group with more than `out_degree_threshold`
//!   neighbors is expanded through `sample_size` uniformly chosen neighbors;
//! * early stop: a walk that reaches a known tail of the head is recorded and
//!   not extended further.
//!
//! With every strategy disabled (`exhaustive`), the tallies are exactly the
//! walk counts of [`crate::path_eval`].
//!
//! Randomness comes from a ChaCha8 generator seeded with `seed` and switched
//! to stream `k` for the `k`-th traversed pair, so pair `k` draws the same
//! numbers regardless of platform or of how many draws earlier pairs made.

use std::borrow::Borrow;
use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use indexmap::IndexMap;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{EntityId, GraphView, KnowledgeGraph, RelationId, TaskSplit};
use crate::path_eval::{ratio, PathFeature, DEFAULT_MAX_PATH_LENGTH};

impl Borrow<[RelationId]> for PathFeature {
    fn borrow(&self) -> &[RelationId] {
        self.relations()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
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
    /// Disables pruning, sampling, early stop and the single-relation stop.
    pub exhaustive: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_path_length: DEFAULT_MAX_PATH_LENGTH,
            alpha: 0.99,
            beta: 0.01,
            gamma: 0.5,
            out_degree_threshold: 50,
            sample_size: 20,
            warmup_pairs: 10,
            seed: 42,
            pruning: true,
            sampling: true,
            early_stop: true,
            exhaustive: false,
        }
    }
}

impl SearchConfig {
    pub fn exhaustive(max_path_length: usize) -> Self {
        Self {
            max_path_length,
            exhaustive: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_owned()));
        if self.max_path_length < 1 {
            return bad("max_path_length must be at least 1");
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return bad("alpha and beta must be non-negative");
        }
        if self.alpha + self.beta > 1.0 + 1e-12 {
            return bad("alpha + beta must not exceed 1");
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be positive");
        }
        if self.sampling && self.sample_size == 0 {
            return bad("sample_size must be positive when sampling is enabled");
        }
        Ok(())
    }

    fn pruning_active(&self, pairs_done: usize) -> bool {
        self.pruning && !self.exhaustive && pairs_done >= self.warmup_pairs
    }
}

/// Probability of expanding a relation branch given its relation
/// confidence: `(alpha * a_r + beta)^gamma`.
pub fn search_probability(a_r: f64, cfg: &SearchConfig) -> f64 {
    (cfg.alpha * a_r + cfg.beta).powf(cfg.gamma)
}

/// `(max(row) + mean(row)) / 2`, zero for an empty row.
pub fn relation_confidence(row: &[f64]) -> f64 {
    if row.is_empty() {
        return 0.0;
    }
    let max = row.iter().copied().fold(0.0_f64, f64::max);
    let mean = row.iter().sum::<f64>() / row.len() as f64;
    (max + mean) / 2.0
}

/// Running accumulators for one pooled path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub support_sum: u64,
    pub count_sum: u64,
    pub cover_sum: u64,
    /// Pairs traversed since (and including) the one that discovered the path.
    pub pairs_seen: u64,
    /// Index of the discovering pair among traversed pairs.
    pub first_pair: u64,
}

impl PoolEntry {
    pub fn d_confidence(&self) -> f64 {
        ratio(self.support_sum, self.count_sum)
    }

    pub fn d_coverage(&self) -> f64 {
        ratio(self.cover_sum, self.pairs_seen)
    }
}

/// Discovered paths in discovery order; the position of a path is its
/// column in the relation/path matrix.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathPool {
    entries: IndexMap<PathFeature, PoolEntry>,
}

impl PathPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, path: &PathFeature) -> Option<&PoolEntry> {
        self.entries.get(path)
    }

    pub fn column(&self, path: &PathFeature) -> Option<usize> {
        self.entries.get_index_of(path)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PathFeature, &PoolEntry)> {
        self.entries.iter()
    }

    pub fn entry_at(&self, column: usize) -> Option<(&PathFeature, &PoolEntry)> {
        self.entries.get_index(column)
    }

    pub fn insert(&mut self, path: PathFeature, entry: PoolEntry) -> usize {
        self.entries.insert_full(path, entry).0
    }

    /// Entries ordered by D-confidence, then D-coverage (both descending),
    /// then relation sequence.
    pub fn ranked(&self) -> Vec<(&PathFeature, &PoolEntry)> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by(|a, b| {
            b.1.d_confidence()
                .total_cmp(&a.1.d_confidence())
                .then(b.1.d_coverage().total_cmp(&a.1.d_coverage()))
                .then_with(|| a.0.cmp(b.0))
        });
        v
    }
}

/// Sparse form of the `relations x paths` matrix whose entry is the path's
/// D-confidence when the relation occurs in the path and zero otherwise.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RelationPathMatrix {
    rows: Vec<Vec<usize>>,
    columns: usize,
}

impl RelationPathMatrix {
    pub fn new(num_relations: usize) -> Self {
        Self {
            rows: vec![Vec::new(); num_relations],
            columns: 0,
        }
    }

    pub fn from_pool(num_relations: usize, pool: &PathPool) -> Self {
        let mut m = Self::new(num_relations);
        for (col, (path, _)) in pool.iter().enumerate() {
            m.add_column(col, path);
        }
        m
    }

    pub fn num_relations(&self) -> usize {
        self.rows.len()
    }

    pub fn num_columns(&self) -> usize {
        self.columns
    }

    /// Registers pool column `col` under each distinct relation of `path`.
    pub fn add_column(&mut self, col: usize, path: &PathFeature) {
        let distinct: BTreeSet<RelationId> = path.relations().iter().copied().collect();
        for r in distinct {
            if r.index() >= self.rows.len() {
                self.rows.resize(r.index() + 1, Vec::new());
            }
            self.rows[r.index()].push(col);
        }
        self.columns = self.columns.max(col + 1);
    }

    /// Columns in which `relation` participates.
    pub fn participation(&self, relation: RelationId) -> &[usize] {
        self.rows.get(relation.index()).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Dense row of length `pool.len()`.
    pub fn row(&self, relation: RelationId, pool: &PathPool) -> Vec<f64> {
        let mut row = vec![0.0; pool.len()];
        for &col in self.participation(relation) {
            if let Some((_, e)) = pool.entry_at(col) {
                row[col] = e.d_confidence();
            }
        }
        row
    }

    pub fn relation_confidence(&self, relation: RelationId, pool: &PathPool) -> f64 {
        let n = pool.len();
        if n == 0 {
            return 0.0;
        }
        let mut max = 0.0_f64;
        let mut sum = 0.0;
        for &col in self.participation(relation) {
            let c = pool.entry_at(col).map(|(_, e)| e.d_confidence()).unwrap_or(0.0);
            max = max.max(c);
            sum += c;
        }
        (max + sum / n as f64) / 2.0
    }

    /// A_r for every relation.
    pub fn relation_confidences(&self, pool: &PathPool) -> Vec<f64> {
        (0..self.rows.len() as u32)
            .map(|r| self.relation_confidence(RelationId(r), pool))
            .collect()
    }
}

/// Counters describing how much work a search did.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLog {
    pub pairs_traversed: u64,
    pub pairs_skipped: u64,
    pub branches_pruned: u64,
    pub branches_sampled: u64,
    pub walks_expanded: u64,
    pub paths_admitted: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairTally {
    pub support: u64,
    pub count: u64,
}

/// Result of one pair's depth-first search, before merging.
#[derive(Debug, Clone, Default)]
pub struct PairTallies {
    tallies: HashMap<PathFeature, PairTally>,
}

impl PairTallies {
    pub fn get(&self, path: &PathFeature) -> Option<PairTally> {
        self.tallies.get(path).copied()
    }

    pub fn len(&self) -> usize {
        self.tallies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tallies.is_empty()
    }

    /// Tallies in relation-sequence order.
    pub fn sorted(&self) -> Vec<(&PathFeature, PairTally)> {
        let mut v: Vec<_> = self.tallies.iter().map(|(p, t)| (p, *t)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    fn record(&mut self, path: &[RelationId], hit: bool) {
        let t = match self.tallies.get_mut(path) {
            Some(t) => t,
            None => self.tallies.entry(PathFeature::from(path)).or_default(),
        };
        t.count += 1;
        t.support += u64::from(hit);
    }
}

struct Walker<'a, 'v> {
    view: &'a GraphView<'v>,
    tail: EntityId,
    stop_set: &'a [EntityId],
    probabilities: Option<&'a [f64]>,
    sample: Option<(usize, usize)>,
    early_stop: bool,
    single_relation_stop: bool,
    max_len: usize,
    rng: &'a mut ChaCha8Rng,
    path: Vec<RelationId>,
    out: PairTallies,
    log: &'a mut SearchLog,
}

impl Walker<'_, '_> {
    fn expand(&mut self, at: EntityId) {
        let view = self.view;
        for (relation, neighbors) in view.out_edges(at) {
            if let Some(probs) = self.probabilities {
                let u: f64 = self.rng.gen();
                let p = probs.get(relation.index()).copied().unwrap_or(0.0);
                if p < u {
                    self.log.branches_pruned += 1;
                    continue;
                }
            }
            let chosen = match self.sample {
                Some((threshold, k)) if neighbors.len() > threshold => {
                    self.log.branches_sampled += 1;
                    let mut picks = index::sample(self.rng, neighbors.len(), k.min(neighbors.len())).into_vec();
                    picks.sort_unstable();
                    picks.into_iter().map(|i| neighbors[i]).collect()
                }
                _ => neighbors,
            };
            self.path.push(relation);
            for next in chosen {
                self.log.walks_expanded += 1;
                self.out.record(&self.path, next == self.tail);
                let at_tail = self.stop_set.binary_search(&next).is_ok();
                let halt = at_tail && (self.early_stop || (self.single_relation_stop && self.path.len() == 1));
                if !halt && self.path.len() < self.max_len {
                    self.expand(next);
                }
            }
            self.path.pop();
        }
    }
}

/// Dynamic search state: the path pool, the relation/path matrix and the
/// work log. Feed it pairs with [`PathSearch::search_pair`].
#[derive(Debug, Clone)]
pub struct PathSearch {
    cfg: SearchConfig,
    pool: PathPool,
    matrix: RelationPathMatrix,
    log: SearchLog,
}

impl PathSearch {
    pub fn new(num_relations: usize, cfg: SearchConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            pool: PathPool::new(),
            matrix: RelationPathMatrix::new(num_relations),
            log: SearchLog::default(),
        })
    }

    pub fn config(&self) -> &SearchConfig {
        &self.cfg
    }

    pub fn pool(&self) -> &PathPool {
        &self.pool
    }

    pub fn matrix(&self) -> &RelationPathMatrix {
        &self.matrix
    }

    pub fn log(&self) -> &SearchLog {
        &self.log
    }

    /// Number of pairs traversed so far.
    pub fn pairs_done(&self) -> usize {
        self.log.pairs_traversed as usize
    }

    /// The per-pair generator: stream `pair_index` of the configured seed.
    pub fn pair_rng(&self, pair_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(pair_index);
        rng
    }

    /// Depth-first search from `head` on `view`. Support is counted for
    /// walks ending at `tail`; `stop_set` (sorted) holds the entities at
    /// which early stopping halts a walk.
    pub fn dfs_conf(
        &mut self,
        view: &GraphView<'_>,
        head: EntityId,
        tail: EntityId,
        stop_set: &[EntityId],
        rng: &mut ChaCha8Rng,
    ) -> PairTallies {
        debug_assert!(stop_set.windows(2).all(|w| w[0] < w[1]));
        let probabilities = self.cfg.pruning_active(self.pairs_done()).then(|| {
            self.matrix
                .relation_confidences(&self.pool)
                .into_iter()
                .map(|a| search_probability(a, &self.cfg))
                .collect::<Vec<_>>()
        });
        let exhaustive = self.cfg.exhaustive;
        let mut walker = Walker {
            view,
            tail,
            stop_set,
            probabilities: probabilities.as_deref(),
            sample: (self.cfg.sampling && !exhaustive)
                .then_some((self.cfg.out_degree_threshold, self.cfg.sample_size)),
            early_stop: self.cfg.early_stop && !exhaustive,
            single_relation_stop: !exhaustive,
            max_len: self.cfg.max_path_length,
            rng,
            path: Vec::with_capacity(self.cfg.max_path_length),
            out: PairTallies::default(),
            log: &mut self.log,
        };
        walker.expand(head);
        walker.out
    }

    /// Folds one pair's tallies into the pool and matrix. Every existing
    /// entry counts the pair; unseen paths are admitted only when at least
    /// one walk reached the tail.
    pub fn merge(&mut self, tallies: &PairTallies) {
        let k = self.log.pairs_traversed;
        for (_, e) in self.pool.entries.iter_mut() {
            e.pairs_seen += 1;
        }
        for (path, t) in tallies.sorted() {
            if let Some(e) = self.pool.entries.get_mut(path) {
                e.support_sum += t.support;
                e.count_sum += t.count;
                e.cover_sum += u64::from(t.support >= 1);
            } else if t.support >= 1 {
                let col = self.pool.insert(
                    path.clone(),
                    PoolEntry {
                        support_sum: t.support,
                        count_sum: t.count,
                        cover_sum: 1,
                        pairs_seen: 1,
                        first_pair: k,
                    },
                );
                self.matrix.add_column(col, path);
                self.log.paths_admitted += 1;
            }
        }
        self.log.pairs_traversed += 1;
    }

    /// Searches one pair and merges the result. Heads outside the graph are
    /// skipped and counted in the log.
    pub fn search_pair(
        &mut self,
        view: &GraphView<'_>,
        head: EntityId,
        tail: EntityId,
        stop_set: &[EntityId],
    ) -> Option<PairTallies> {
        if head.index() >= view.graph().num_entities() {
            log::warn!("head {head} not in graph, pair skipped");
            self.log.pairs_skipped += 1;
            return None;
        }
        let mut rng = self.pair_rng(self.log.pairs_traversed);
        let tallies = self.dfs_conf(view, head, tail, stop_set, &mut rng);
        self.merge(&tallies);
        Some(tallies)
    }

    pub fn finish(self) -> SearchResult {
        SearchResult {
            pool: self.pool,
            matrix: self.matrix,
            log: self.log,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub pool: PathPool,
    pub matrix: RelationPathMatrix,
    pub log: SearchLog,
}

/// Runs the search over the task's training pairs in order. Test pairs are
/// hidden throughout; for each pair the head's own target edges
/// `head -> T(head)` (and their inverses) are hidden as well.
pub fn run_path_search(kg: &KnowledgeGraph, task: &TaskSplit, cfg: &SearchConfig) -> Result<SearchResult> {
    if task.train.is_empty() {
        return Err(Error::EmptyPairs("path search"));
    }
    let mut search = PathSearch::new(kg.num_relations(), cfg.clone())?;
    let test_mask = task.test_mask(kg);
    let base = kg.view();
    let base = base.masked(&test_mask);
    for &(head, tail) in &task.train {
        let head_mask = task.head_mask(kg, head);
        let view = base.masked(&head_mask);
        let stop_set = task.tails_of(head);
        search.search_pair(&view, head, tail, &stop_set);
    }
    let result = search.finish();
    log::debug!(
        "task {}: {} pairs, pool {} paths, {} walks, {} branches pruned",
        task.name,
        result.log.pairs_traversed,
        result.pool.len(),
        result.log.walks_expanded,
        result.log.branches_pruned
    );
    Ok(result)
}

/// One line of a pool snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolRecord {
    pub path: Vec<String>,
    pub support_sum: u64,
    pub count_sum: u64,
    pub cover_sum: u64,
    pub pairs_seen: u64,
    pub first_pair: u64,
    pub d_confidence: f64,
    pub d_coverage: f64,
}

impl PoolRecord {
    pub fn new(kg: &KnowledgeGraph, path: &PathFeature, e: &PoolEntry) -> Self {
        Self {
            path: path.labels(kg),
            support_sum: e.support_sum,
            count_sum: e.count_sum,
            cover_sum: e.cover_sum,
            pairs_seen: e.pairs_seen,
            first_pair: e.first_pair,
            d_confidence: e.d_confidence(),
            d_coverage: e.d_coverage(),
        }
    }
}

/// Writes the pool as JSON lines ordered by D-confidence descending.
pub fn write_pool_snapshot<W: Write>(kg: &KnowledgeGraph, pool: &PathPool, mut out: W) -> Result<()> {
    for (path, e) in pool.ranked() {
        serde_json::to_writer(&mut out, &PoolRecord::new(kg, path, e))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a snapshot back. Columns follow file order.
pub fn read_pool_snapshot<R: BufRead>(kg: &KnowledgeGraph, input: R) -> Result<PathPool> {
    let mut pool = PathPool::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PoolRecord = serde_json::from_str(&line)?;
        if rec.path.is_empty() {
            return Err(Error::PoolRecord("empty path".into()));
        }
        let rels = rec
            .path
            .iter()
            .map(|l| kg.relation_id(l).ok_or_else(|| Error::UnknownRelation(l.clone())))
            .collect::<Result<Vec<_>>>()?;
        if rec.cover_sum > rec.pairs_seen || rec.support_sum > rec.count_sum {
            return Err(Error::PoolRecord(format!("inconsistent sums for {:?}", rec.path)));
        }
        pool.insert(
            PathFeature::new(rels),
            PoolEntry {
                support_sum: rec.support_sum,
                count_sum: rec.count_sum,
                cover_sum: rec.cover_sum,
                pairs_seen: rec.pairs_seen,
                first_pair: rec.first_pair,
            },
        );
    }
    Ok(pool)
}
