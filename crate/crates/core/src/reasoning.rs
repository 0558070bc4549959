//! Relation reasoning with path features: walk-probability feature vectors,
//! a ridge-regularized linear scorer and ranking metrics.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{EntityId, GraphView, KnowledgeGraph, TaskSplit};
use crate::path_eval::{endpoint_distribution, ratio, PathFeature};

/// Random-walk probability of reaching `tail` from `head` under each path:
/// `support / count`, zero when no walk exists.
pub fn feature_vector(view: &GraphView<'_>, head: EntityId, tail: EntityId, paths: &[PathFeature]) -> Vec<f64> {
    head_features(view, head, &[tail], paths).pop().unwrap_or_default()
}

/// Feature vectors for several candidate tails of one head, sharing one
/// walk-distribution computation per path.
pub fn head_features(
    view: &GraphView<'_>,
    head: EntityId,
    tails: &[EntityId],
    paths: &[PathFeature],
) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(paths.len()); tails.len()];
    for path in paths {
        let dist = endpoint_distribution(view, head, path);
        let total: u64 = dist.values().sum();
        for (row, t) in out.iter_mut().zip(tails) {
            row.push(ratio(dist.get(t).copied().unwrap_or(0), total));
        }
    }
    out
}

/// Candidate tails for `head`: entities that are a tail of the target
/// relation somewhere (graph edges or task pairs), minus every known tail
/// of `head`. Draws `n_neg` without replacement, or the whole pool when it
/// is smaller. The result is sorted by entity id.
pub fn sample_negatives(
    kg: &KnowledgeGraph,
    task: &TaskSplit,
    head: EntityId,
    n_neg: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<EntityId> {
    let pool = negative_pool(kg, task);
    let truth: HashSet<EntityId> = task.tails_of(head).into_iter().collect();
    let pool: Vec<EntityId> = pool.into_iter().filter(|e| !truth.contains(e)).collect();
    draw(pool, n_neg, rng)
}

fn negative_pool(kg: &KnowledgeGraph, task: &TaskSplit) -> BTreeSet<EntityId> {
    kg.triples()
        .iter()
        .filter(|t| t.relation == task.relation)
        .map(|t| t.tail)
        .chain(task.train.iter().chain(task.test.iter()).map(|p| p.1))
        .collect()
}

fn draw(pool: Vec<EntityId>, n: usize, rng: &mut ChaCha8Rng) -> Vec<EntityId> {
    if pool.len() <= n {
        return pool;
    }
    let mut picked: Vec<EntityId> = index::sample(rng, pool.len(), n).into_iter().map(|i| pool[i]).collect();
    picked.sort_unstable();
    picked
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Squared loss against 0/1 labels, closed form.
    #[default]
    Linear,
    /// Log loss, Newton iterations.
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub kind: ModelKind,
    /// L2 penalty on the weights (the bias is not penalized).
    pub lambda: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::Linear,
            lambda: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub kind: ModelKind,
    pub lambda: f64,
    /// Training objective at the solution.
    pub loss: f64,
    pub rows: usize,
    pub iterations: usize,
    /// Set when all training labels were identical.
    pub degenerate: bool,
}

impl LinearModel {
    /// `w . x + b`. For a logistic model this is the logit, which ranks the
    /// same as the probability.
    pub fn score(&self, features: &[f64]) -> f64 {
        debug_assert_eq!(features.len(), self.weights.len());
        self.weights.iter().zip(features).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }
}

pub fn score(model: &LinearModel, features: &[f64]) -> f64 {
    model.score(features)
}

/// Fits the model to `features` (one row per example) and 0/1 `labels`.
pub fn train_model(features: &[Vec<f64>], labels: &[bool], cfg: &TrainConfig) -> Result<LinearModel> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(Error::TrainingData);
    }
    let dim = features[0].len();
    if features.iter().any(|r| r.len() != dim) {
        return Err(Error::TrainingData);
    }
    if cfg.lambda.is_nan() || cfg.lambda < 0.0 {
        return Err(Error::Config("lambda must be non-negative".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let degenerate = positives == 0 || positives == labels.len();
    if degenerate {
        log::warn!("training labels are all identical; model is degenerate");
    }
    let n = features.len();
    let x = DMatrix::from_fn(n, dim, |i, j| features[i][j]);
    let y = DVector::from_iterator(n, labels.iter().map(|&l| if l { 1.0 } else { 0.0 }));
    let mut model = match cfg.kind {
        ModelKind::Linear => fit_ridge(&x, &y, cfg.lambda),
        ModelKind::Logistic if degenerate => fit_ridge(&x, &y, cfg.lambda),
        ModelKind::Logistic => fit_logistic(&x, &y, cfg.lambda),
    };
    model.degenerate = degenerate;
    Ok(model)
}

fn fit_ridge(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> LinearModel {
    let (n, d) = x.shape();
    let nf = n as f64;
    let y_mean = y.mean();
    let x_mean: DVector<f64> = DVector::from_fn(d, |j, _| x.column(j).mean());
    let weights = if d == 0 {
        DVector::zeros(0)
    } else {
        let mut xc = x.clone();
        for j in 0..d {
            xc.column_mut(j).add_scalar_mut(-x_mean[j]);
        }
        let yc = y.add_scalar(-y_mean);
        let mut gram = xc.tr_mul(&xc) / nf;
        for j in 0..d {
            gram[(j, j)] += lambda;
        }
        let rhs = xc.tr_mul(&yc) / nf;
        match gram.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            // singular without regularization: minimum-norm solution
            None => gram
                .svd(true, true)
                .solve(&rhs, 1e-12)
                .unwrap_or_else(|_| DVector::zeros(d)),
        }
    };
    let bias = y_mean - weights.dot(&x_mean);
    let residual = x * &weights + DVector::repeat(n, bias) - y;
    let loss = residual.norm_squared() / nf + lambda * weights.norm_squared();
    LinearModel {
        weights: weights.iter().copied().collect(),
        bias,
        kind: ModelKind::Linear,
        lambda,
        loss,
        rows: n,
        iterations: 1,
        degenerate: false,
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn fit_logistic(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> LinearModel {
    const MAX_ITER: usize = 100;
    let (n, d) = x.shape();
    let nf = n as f64;
    // bias as the last column
    let xa = x.clone().insert_column(d, 1.0);
    let mut theta = DVector::<f64>::zeros(d + 1);
    let mut iterations = 0;
    for _ in 0..MAX_ITER {
        iterations += 1;
        let z = &xa * &theta;
        let p = z.map(sigmoid);
        let mut grad = xa.tr_mul(&(&p - y)) / nf;
        let w = p.map(|v| (v * (1.0 - v)).max(1e-12));
        let mut hess = xa.tr_mul(&DMatrix::from_fn(n, d + 1, |i, j| xa[(i, j)] * w[i])) / nf;
        for j in 0..d {
            grad[j] += 2.0 * lambda * theta[j];
            hess[(j, j)] += 2.0 * lambda;
        }
        hess[(d, d)] += 1e-10;
        let Some(step) = hess.cholesky().map(|c| c.solve(&grad)) else {
            break;
        };
        theta -= &step;
        if step.amax() < 1e-10 {
            break;
        }
    }
    let z = &xa * &theta;
    let loss = z
        .iter()
        .zip(y.iter())
        .map(|(&z, &t)| {
            // log(1 + e^z) - t z, computed stably
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            softplus - t * z
        })
        .sum::<f64>()
        / nf
        + lambda * theta.rows(0, d).norm_squared();
    LinearModel {
        weights: theta.rows(0, d).iter().copied().collect(),
        bias: theta[d],
        kind: ModelKind::Logistic,
        lambda,
        loss,
        rows: n,
        iterations,
        degenerate: false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub entity: EntityId,
    pub features: Vec<f64>,
}

/// One true tail of a head together with its negative candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingSequence {
    pub head: EntityId,
    pub positive: Candidate,
    pub negatives: Vec<Candidate>,
}

impl RankingSequence {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::from([self.positive.entity]);
        for c in &self.negatives {
            if !seen.insert(c.entity) {
                return Err(Error::Config(format!(
                    "sequence for head {} repeats candidate {}",
                    self.head, c.entity
                )));
            }
        }
        Ok(())
    }
}

/// Scores for one sequence, positive first.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSequence {
    pub head: EntityId,
    pub positive: (EntityId, f64),
    pub negatives: Vec<(EntityId, f64)>,
}

impl ScoredSequence {
    /// 1-based rank of the positive, ties broken by ascending entity id.
    pub fn positive_rank(&self) -> usize {
        let (pe, ps) = self.positive;
        1 + self
            .negatives
            .iter()
            .filter(|&&(e, s)| outranks((e, s), (pe, ps)))
            .count()
    }
}

fn outranks(a: (EntityId, f64), b: (EntityId, f64)) -> bool {
    match a.1.total_cmp(&b.1) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => a.0 < b.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingMetrics {
    /// Mean over heads of the average precision of that head's true tails.
    pub map: f64,
    /// Mean reciprocal rank of the positive within its own sequence.
    pub mrr: f64,
    /// Mean rank of the positive within its own sequence.
    pub mean_rank: f64,
    pub sequences: usize,
    pub heads: usize,
}

type Scores = BTreeMap<EntityId, f64>;

/// Ranking metrics over already scored sequences. Sequences sharing a head
/// are pooled into one ranked list for average precision.
pub fn ranking_metrics(sequences: &[ScoredSequence]) -> Result<RankingMetrics> {
    if sequences.is_empty() {
        return Err(Error::NoSequences);
    }
    // per head: scores of true tails and of negatives
    let mut by_head: BTreeMap<EntityId, (Scores, Scores)> = BTreeMap::new();
    let mut rr = 0.0;
    let mut rank_sum = 0.0;
    for s in sequences {
        let rank = s.positive_rank();
        rr += 1.0 / rank as f64;
        rank_sum += rank as f64;
        let (pos, neg) = by_head.entry(s.head).or_default();
        pos.insert(s.positive.0, s.positive.1);
        for &(e, sc) in &s.negatives {
            neg.insert(e, sc);
        }
    }
    let mut ap_sum = 0.0;
    for (pos, neg) in by_head.values() {
        let mut ranked: Vec<(EntityId, f64, bool)> = pos
            .iter()
            .map(|(&e, &s)| (e, s, true))
            .chain(neg.iter().filter(|(e, _)| !pos.contains_key(e)).map(|(&e, &s)| (e, s, false)))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut hits = 0usize;
        let mut precision_sum = 0.0;
        for (i, &(_, _, positive)) in ranked.iter().enumerate() {
            if positive {
                hits += 1;
                precision_sum += hits as f64 / (i + 1) as f64;
            }
        }
        ap_sum += precision_sum / pos.len() as f64;
    }
    let n = sequences.len() as f64;
    Ok(RankingMetrics {
        map: ap_sum / by_head.len() as f64,
        mrr: rr / n,
        mean_rank: rank_sum / n,
        sequences: sequences.len(),
        heads: by_head.len(),
    })
}

pub fn score_sequence(model: &LinearModel, seq: &RankingSequence) -> ScoredSequence {
    ScoredSequence {
        head: seq.head,
        positive: (seq.positive.entity, model.score(&seq.positive.features)),
        negatives: seq
            .negatives
            .iter()
            .map(|c| (c.entity, model.score(&c.features)))
            .collect(),
    }
}

pub fn evaluate_map(model: &LinearModel, sequences: &[RankingSequence]) -> Result<RankingMetrics> {
    if sequences.is_empty() {
        return Err(Error::NoSequences);
    }
    let scored: Vec<ScoredSequence> = sequences
        .iter()
        .map(|s| {
            s.validate()?;
            Ok(score_sequence(model, s))
        })
        .collect::<Result<_>>()?;
    ranking_metrics(&scored)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReasoningConfig {
    pub n_neg: usize,
    pub negative_seed: u64,
    pub train: TrainConfig,
}

impl Default for ReasoningConfig {
    fn default() -> Self {
        Self {
            n_neg: 10,
            negative_seed: 7,
            train: TrainConfig::default(),
        }
    }
}

/// Stream offset separating evaluation negatives from training negatives.
const EVAL_STREAM: u64 = 1 << 40;

/// Builds one sequence per pair: features for the true tail and for
/// `n_neg` sampled negatives. Pair `i` draws negatives from stream
/// `stream_base + i` of `negative_seed`. Features are computed with test
/// edges and the head's own target edges hidden. Pairs with no negative
/// available are skipped and counted.
pub fn build_sequences(
    kg: &KnowledgeGraph,
    task: &TaskSplit,
    pairs: &[(EntityId, EntityId)],
    paths: &[PathFeature],
    cfg: &ReasoningConfig,
    stream_base: u64,
) -> Result<(Vec<RankingSequence>, usize)> {
    if cfg.n_neg == 0 {
        return Err(Error::Config("n_neg must be at least 1".into()));
    }
    let negatives: Vec<Vec<EntityId>> = pairs
        .iter()
        .enumerate()
        .map(|(i, &(h, _))| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.negative_seed);
            rng.set_stream(stream_base + i as u64);
            sample_negatives(kg, task, h, cfg.n_neg, &mut rng)
        })
        .collect();

    let mut by_head: BTreeMap<EntityId, Vec<usize>> = BTreeMap::new();
    for (i, &(h, _)) in pairs.iter().enumerate() {
        if !negatives[i].is_empty() {
            by_head.entry(h).or_default().push(i);
        }
    }
    let skipped = pairs.len() - by_head.values().map(Vec::len).sum::<usize>();
    if skipped > 0 {
        log::warn!("task {}: {skipped} pairs have no negative candidates", task.name);
    }

    let test_mask = task.test_mask(kg);
    let groups: Vec<(EntityId, Vec<usize>)> = by_head.into_iter().collect();
    let built: Vec<Vec<(usize, RankingSequence)>> = groups
        .par_iter()
        .map(|(head, idxs)| {
            let head_mask = task.head_mask(kg, *head);
            let base = kg.view();
            let base = base.masked(&test_mask);
            let view = base.masked(&head_mask);
            let mut tails: BTreeSet<EntityId> = BTreeSet::new();
            for &i in idxs {
                tails.insert(pairs[i].1);
                tails.extend(negatives[i].iter().copied());
            }
            let tails: Vec<EntityId> = tails.into_iter().collect();
            let feats = head_features(&view, *head, &tails, paths);
            let lookup = |e: EntityId| feats[tails.binary_search(&e).expect("candidate computed")].clone();
            idxs.iter()
                .map(|&i| {
                    let (h, t) = pairs[i];
                    let seq = RankingSequence {
                        head: h,
                        positive: Candidate { entity: t, features: lookup(t) },
                        negatives: negatives[i]
                            .iter()
                            .map(|&e| Candidate { entity: e, features: lookup(e) })
                            .collect(),
                    };
                    (i, seq)
                })
                .collect()
        })
        .collect();
    let mut flat: Vec<(usize, RankingSequence)> = built.into_iter().flatten().collect();
    flat.sort_by_key(|(i, _)| *i);
    Ok((flat.into_iter().map(|(_, s)| s).collect(), skipped))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReasoningOutcome {
    pub model: LinearModel,
    pub metrics: RankingMetrics,
    pub train_rows: usize,
    pub skipped_train: usize,
    pub skipped_test: usize,
}

/// Trains on the task's training pairs and evaluates on its test pairs.
pub fn train_and_evaluate(
    kg: &KnowledgeGraph,
    task: &TaskSplit,
    paths: &[PathFeature],
    cfg: &ReasoningConfig,
) -> Result<ReasoningOutcome> {
    let (train_seqs, skipped_train) = build_sequences(kg, task, &task.train, paths, cfg, 0)?;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for s in &train_seqs {
        rows.push(s.positive.features.clone());
        labels.push(true);
        for c in &s.negatives {
            rows.push(c.features.clone());
            labels.push(false);
        }
    }
    let model = train_model(&rows, &labels, &cfg.train)?;
    let (test_seqs, skipped_test) = build_sequences(kg, task, &task.test, paths, cfg, EVAL_STREAM)?;
    let metrics = evaluate_map(&model, &test_seqs)?;
    Ok(ReasoningOutcome {
        model,
        metrics,
        train_rows: rows.len(),
        skipped_train,
        skipped_test,
    })
}
