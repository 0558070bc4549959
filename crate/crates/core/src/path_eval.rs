//! Exact path statistics by exhaustive walk enumeration.
//!
//! A walk under path `r1, ..., rl` is a sequence of entities
//! `h -r1-> e1 -r2-> ... -rl-> e_l`. Walks are counted per entity sequence,
//! so two routes through different intermediates count twice and cycles are
//! allowed.

use std::collections::HashMap;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::kg::{EntityId, GraphView, KnowledgeGraph, RelationId};

/// Default maximum path length.
pub const DEFAULT_MAX_PATH_LENGTH: usize = 3;

/// An ordered, non-empty relation sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathFeature(SmallVec<[RelationId; 4]>);

impl PathFeature {
    /// Panics on an empty sequence.
    pub fn new(relations: impl IntoIterator<Item = RelationId>) -> Self {
        let inner: SmallVec<[RelationId; 4]> = relations.into_iter().collect();
        assert!(!inner.is_empty(), "path feature must contain a relation");
        Self(inner)
    }

    pub fn relations(&self) -> &[RelationId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, r: RelationId) -> bool {
        self.0.contains(&r)
    }

    pub fn labels(&self, kg: &KnowledgeGraph) -> Vec<String> {
        self.0
            .iter()
            .map(|&r| kg.relation_label(r).to_owned())
            .collect()
    }

    pub fn display<'a>(&'a self, kg: &'a KnowledgeGraph) -> impl fmt::Display + 'a {
        DisplayPath { path: self, kg }
    }
}

impl From<&[RelationId]> for PathFeature {
    fn from(rs: &[RelationId]) -> Self {
        Self::new(rs.iter().copied())
    }
}

struct DisplayPath<'a> {
    path: &'a PathFeature,
    kg: &'a KnowledgeGraph,
}

impl fmt::Display for DisplayPath<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &r) in self.path.relations().iter().enumerate() {
            if i > 0 {
                f.write_str(" -> ")?;
            }
            f.write_str(self.kg.relation_label(r))?;
        }
        Ok(())
    }
}

fn walk<F: FnMut(EntityId)>(view: &GraphView<'_>, at: EntityId, rest: &[RelationId], visit: &mut F) {
    match rest.split_first() {
        None => visit(at),
        Some((&r, tail)) => {
            for next in view.neighbors(at, r) {
                walk(view, next, tail, visit);
            }
        }
    }
}

/// Number of walks from `head` to `tail` following `path`.
pub fn path_entity_support(
    view: &GraphView<'_>,
    head: EntityId,
    tail: EntityId,
    path: &PathFeature,
) -> u64 {
    let mut n = 0;
    walk(view, head, path.relations(), &mut |end| {
        if end == tail {
            n += 1;
        }
    });
    n
}

/// Number of walks from `head` following `path`, to any endpoint.
pub fn path_count(view: &GraphView<'_>, head: EntityId, path: &PathFeature) -> u64 {
    let mut n = 0;
    walk(view, head, path.relations(), &mut |_| n += 1);
    n
}

pub fn cover(view: &GraphView<'_>, head: EntityId, tail: EntityId, path: &PathFeature) -> u64 {
    u64::from(path_entity_support(view, head, tail, path) >= 1)
}

/// Integer numerator/denominator behind a confidence or coverage value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PathTotals {
    pub support: u64,
    pub count: u64,
    pub cover: u64,
    pub pairs: u64,
}

impl PathTotals {
    pub fn confidence(&self) -> f64 {
        ratio(self.support, self.count)
    }

    pub fn coverage(&self) -> f64 {
        ratio(self.cover, self.pairs)
    }
}

pub(crate) fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Sums support, count and cover over `pairs`, evaluating pair `i` on the
/// view returned by `view_for(i)`.
pub fn path_totals<'v, F>(pairs: &[(EntityId, EntityId)], path: &PathFeature, mut view_for: F) -> PathTotals
where
    F: FnMut(usize) -> GraphView<'v>,
{
    let mut totals = PathTotals {
        pairs: pairs.len() as u64,
        ..Default::default()
    };
    for (i, &(h, t)) in pairs.iter().enumerate() {
        let view = view_for(i);
        let s = path_entity_support(&view, h, t, path);
        totals.support += s;
        totals.count += path_count(&view, h, path);
        totals.cover += u64::from(s >= 1);
    }
    totals
}

/// Fraction of walks over all pairs that end at the pair's own tail.
/// Zero when no walk exists.
pub fn path_confidence(
    view: &GraphView<'_>,
    pairs: &[(EntityId, EntityId)],
    path: &PathFeature,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairs("path_confidence"));
    }
    Ok(path_totals(pairs, path, |_| view.clone()).confidence())
}

/// Fraction of pairs connected by at least one walk.
pub fn pair_coverage(
    view: &GraphView<'_>,
    pairs: &[(EntityId, EntityId)],
    path: &PathFeature,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairs("pair_coverage"));
    }
    Ok(path_totals(pairs, path, |_| view.clone()).coverage())
}

/// Walk multiplicity per endpoint, computed hop by hop as a sparse
/// vector-matrix product over the per-relation adjacency. Agrees with the
/// enumeration above but costs `O(frontier * degree)` per hop instead of
/// `O(#walks)`.
pub fn endpoint_distribution(
    view: &GraphView<'_>,
    head: EntityId,
    path: &PathFeature,
) -> HashMap<EntityId, u64> {
    let mut frontier: HashMap<EntityId, u64> = HashMap::from([(head, 1)]);
    for &r in path.relations() {
        let mut next: HashMap<EntityId, u64> = HashMap::with_capacity(frontier.len());
        for (&e, &mult) in &frontier {
            for n in view.neighbors(e, r) {
                *next.entry(n).or_default() += mult;
            }
        }
        if next.is_empty() {
            return next;
        }
        frontier = next;
    }
    frontier
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::load_triples;

    fn setup(src: &str) -> (KnowledgeGraph, impl Fn(&str) -> EntityId + '_) {
        let kg = load_triples(src.as_bytes()).unwrap();
        let kg2 = kg.clone();
        (kg, move |s: &str| kg2.entity_id(s).unwrap())
    }

    fn path(kg: &KnowledgeGraph, labels: &[&str]) -> PathFeature {
        PathFeature::new(labels.iter().map(|l| kg.relation_id(l).unwrap()))
    }

    #[test]
    fn single_walk_support() {
        let (kg, e) = setup("a\tr1\tb\nb\tr2\tc\n");
        let v = kg.view();
        assert_eq!(path_entity_support(&v, e("a"), e("c"), &path(&kg, &["r1", "r2"])), 1);
        assert_eq!(path_entity_support(&v, e("a"), e("c"), &path(&kg, &["r2"])), 0);
    }

    #[test]
    fn two_routes_support_two() {
        let (kg, e) = setup("a\tr1\tb\na\tr1\td\nb\tr2\tc\nd\tr2\tc\n");
        let v = kg.view();
        let p = path(&kg, &["r1", "r2"]);
        assert_eq!(path_entity_support(&v, e("a"), e("c"), &p), 2);
        assert_eq!(cover(&v, e("a"), e("c"), &p), 1);
    }

    #[test]
    fn counts_to_any_endpoint() {
        let (kg, e) = setup("a\tr1\tb\na\tr1\td\nb\tr2\tc\nd\tr2\te\nx\tr2\ta\n");
        let v = kg.view();
        assert_eq!(path_count(&v, e("a"), &path(&kg, &["r1", "r2"])), 2);
        assert_eq!(path_count(&v, e("a"), &path(&kg, &["r1"])), 2);
        assert_eq!(path_count(&v, e("e"), &path(&kg, &["r1"])), 0);
        // one of the two walks ends at c
        let conf = path_confidence(&v, &[(e("a"), e("c"))], &path(&kg, &["r1", "r2"])).unwrap();
        assert_eq!(conf, 0.5);
    }

    #[test]
    fn confidence_edge_cases() {
        let (kg, e) = setup("a\tr1\tb\nc\tr1\td\n");
        let v = kg.view();
        let p = path(&kg, &["r1"]);
        assert_eq!(path_confidence(&v, &[(e("a"), e("b")), (e("c"), e("d"))], &p).unwrap(), 1.0);
        // no walk from b
        assert_eq!(path_confidence(&v, &[(e("b"), e("a"))], &p).unwrap(), 0.0);
        assert!(path_confidence(&v, &[], &p).is_err());
        assert_eq!(pair_coverage(&v, &[(e("a"), e("b")), (e("a"), e("d"))], &p).unwrap(), 0.5);
        assert!(pair_coverage(&v, &[], &p).is_err());
    }

    #[test]
    fn cycles_are_walked() {
        let (kg, e) = setup("a\tr\tb\nb\tr\ta\n");
        let v = kg.view();
        assert_eq!(path_entity_support(&v, e("a"), e("b"), &path(&kg, &["r", "r", "r"])), 1);
        assert_eq!(path_entity_support(&v, e("a"), e("a"), &path(&kg, &["r", "r"])), 1);
    }

    #[test]
    fn distribution_matches_enumeration() {
        let (kg, e) = setup("a\tr1\tb\na\tr1\td\nb\tr2\tc\nd\tr2\tc\nd\tr2\ta\n");
        let v = kg.view();
        let p = path(&kg, &["r1", "r2"]);
        let dist = endpoint_distribution(&v, e("a"), &p);
        assert_eq!(dist.get(&e("c")), Some(&2));
        assert_eq!(dist.values().sum::<u64>(), path_count(&v, e("a"), &p));
    }
}
