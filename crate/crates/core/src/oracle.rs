//! Cross-check of exhaustive search tallies against exact enumeration.
//!
//! For every relation sequence up to the length bound and every training
//! pair, the enumeration routes of [`crate::path_eval`] give the pair's
//! support, count and cover. A sequence belongs in the pool iff some pair
//! supports it; its first supporting pair is where it must have been
//! admitted, and its accumulators must equal the enumerated sums from that
//! pair on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::kg::{GraphView, KnowledgeGraph, RelationId, TaskSplit};
use crate::path_eval::{path_count, path_entity_support, PathFeature};
use crate::search::{run_path_search, PoolEntry, SearchConfig};
use crate::synth::{random_instance, RandomGraphSpec};

/// All relation sequences of length `1..=max_len` over `num_relations`.
pub fn all_sequences(num_relations: usize, max_len: usize) -> Vec<PathFeature> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<RelationId>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for prefix in &frontier {
            for r in 0..num_relations as u32 {
                let mut p = prefix.clone();
                p.push(RelationId(r));
                out.push(PathFeature::from(p.as_slice()));
                next.push(p);
            }
        }
        frontier = next;
    }
    out
}

/// Pool accumulators predicted by enumeration for `path`, or `None` when no
/// training pair supports it.
pub fn expected_entry(kg: &KnowledgeGraph, task: &TaskSplit, path: &PathFeature) -> Option<PoolEntry> {
    let test_mask = task.test_mask(kg);
    let base = kg.view();
    let base = base.masked(&test_mask);
    let per_pair: Vec<(u64, u64)> = task
        .train
        .iter()
        .map(|&(h, t)| {
            let head_mask = task.head_mask(kg, h);
            let view: GraphView<'_> = base.masked(&head_mask);
            (path_entity_support(&view, h, t, path), path_count(&view, h, path))
        })
        .collect();
    let first = per_pair.iter().position(|&(s, _)| s >= 1)?;
    let tail = &per_pair[first..];
    Some(PoolEntry {
        support_sum: tail.iter().map(|p| p.0).sum(),
        count_sum: tail.iter().map(|p| p.1).sum(),
        cover_sum: tail.iter().filter(|p| p.0 >= 1).count() as u64,
        pairs_seen: tail.len() as u64,
        first_pair: first as u64,
    })
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct OracleReport {
    pub graphs: usize,
    pub sequences_checked: usize,
    pub pool_paths: usize,
    pub counterexample: Option<String>,
    pub vacuous: bool,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Runs exhaustive search on one instance and compares every sequence with
/// enumeration. Returns the number of sequences checked, or a description
/// of the first mismatch.
pub fn check_instance(
    kg: &KnowledgeGraph,
    task: &TaskSplit,
    max_len: usize,
) -> Result<std::result::Result<(usize, usize), String>> {
    let result = run_path_search(kg, task, &SearchConfig::exhaustive(max_len))?;
    let sequences = all_sequences(kg.num_relations(), max_len);
    for path in &sequences {
        let expected = expected_entry(kg, task, path);
        let actual = result.pool.get(path).cloned();
        if expected != actual {
            return Ok(Err(format!(
                "path [{}]: expected {:?}, search produced {:?}",
                path.display(kg),
                expected,
                actual
            )));
        }
    }
    Ok(Ok((sequences.len(), result.pool.len())))
}

/// Checks `graphs` random instances with between 2 and `bound` entities.
/// A bound below 2 checks nothing and is reported as vacuous.
pub fn oracle_check(bound: usize, graphs: usize, max_len: usize, seed: u64) -> Result<OracleReport> {
    let mut report = OracleReport::default();
    if bound < 2 || graphs == 0 {
        log::warn!("oracle check with entity bound {bound} and {graphs} graphs is vacuous");
        report.vacuous = true;
        return Ok(report);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for g in 0..graphs {
        let entities = rng.gen_range(2..=bound);
        let relations = rng.gen_range(1..=6);
        let spec = RandomGraphSpec {
            entities,
            relations,
            triples: rng.gen_range(entities..=3 * entities),
            self_loops: g % 2 == 1,
        };
        let inst = random_instance(spec, 0.2, &mut rng);
        report.graphs += 1;
        match check_instance(&inst.graph, &inst.task, max_len)? {
            Ok((seqs, paths)) => {
                report.sequences_checked += seqs;
                report.pool_paths += paths;
            }
            Err(msg) => {
                report.counterexample = Some(format!("graph {g} ({entities} entities, {relations} relations): {msg}"));
                break;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::GraphBuilder;

    #[test]
    fn sequence_enumeration_size() {
        assert_eq!(all_sequences(3, 3).len(), 3 + 9 + 27);
    }

    #[test]
    fn zero_bound_is_vacuous() {
        let r = oracle_check(0, 10, 3, 1).unwrap();
        assert!(r.vacuous && r.passed());
    }

    #[test]
    fn cyclic_graph_agrees() {
        // a directed ring with chords and self loops
        let mut b = GraphBuilder::new();
        for i in 0..6 {
            b.add(&format!("n{i}"), "next", &format!("n{}", (i + 1) % 6));
            b.add(&format!("n{i}"), "loop", &format!("n{i}"));
            b.add(&format!("n{i}"), "target", &format!("n{}", (i + 2) % 6));
        }
        let kg = b.build().add_inverse_relations(10).unwrap().graph;
        let target = kg.relation_id("target").unwrap();
        let pairs: Vec<_> = kg
            .triples()
            .iter()
            .filter(|t| t.relation == target)
            .map(|t| (t.head, t.tail))
            .collect();
        let task = TaskSplit::new(&kg, "target", target, pairs, vec![]);
        let outcome = check_instance(&kg, &task, 3).unwrap();
        assert!(outcome.is_ok(), "{outcome:?}");
    }

    #[test]
    fn small_random_batch() {
        let r = oracle_check(12, 10, 3, 99).unwrap();
        assert!(r.passed(), "{:?}", r.counterexample);
        assert_eq!(r.graphs, 10);
    }
}
