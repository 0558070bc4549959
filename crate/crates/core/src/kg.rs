//! Knowledge graph storage: interned ids, per-entity adjacency grouped by
//! relation, inverse-relation preprocessing and masked traversal views.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Suffix appended to a relation label to name its inverse.
pub const INVERSE_SUFFIX: &str = "_inv";

/// Dense entity identifier, contiguous from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityId(pub u32);

/// Dense relation identifier, contiguous from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RelationId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triple {
    pub fn new(head: EntityId, relation: RelationId, tail: EntityId) -> Self {
        Self {
            head,
            relation,
            tail,
        }
    }
}

/// Bidirectional label <-> id table.
#[derive(Debug, Clone, Default)]
pub struct Interner {
    labels: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Interner {
    pub fn intern(&mut self, label: &str) -> u32 {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = self.labels.len() as u32;
        self.labels.push(label.to_owned());
        self.ids.insert(label.to_owned(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<u32> {
        self.ids.get(label).copied()
    }

    pub fn label(&self, id: u32) -> &str {
        &self.labels[id as usize]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Outgoing edges of one entity: relation -> sorted neighbor list.
type Adjacency = BTreeMap<RelationId, Vec<EntityId>>;

/// An immutable knowledge graph. Construct with [`GraphBuilder`] or
/// [`load_triples`].
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    entities: Interner,
    relations: Interner,
    triples: Vec<Triple>,
    adjacency: Vec<Adjacency>,
    inverse: Vec<Option<RelationId>>,
}

/// Accumulates labelled or id-based triples and freezes them into a
/// [`KnowledgeGraph`].
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    entities: Interner,
    relations: Interner,
    triples: BTreeSet<Triple>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entity(&mut self, label: &str) -> EntityId {
        EntityId(self.entities.intern(label))
    }

    pub fn relation(&mut self, label: &str) -> RelationId {
        RelationId(self.relations.intern(label))
    }

    pub fn add(&mut self, head: &str, relation: &str, tail: &str) -> Triple {
        let t = Triple::new(self.entity(head), self.relation(relation), self.entity(tail));
        self.triples.insert(t);
        t
    }

    /// Adds a triple by id. Ids must have been produced by this builder.
    pub fn add_ids(&mut self, head: EntityId, relation: RelationId, tail: EntityId) {
        assert!(head.index() < self.entities.len() && tail.index() < self.entities.len());
        assert!(relation.index() < self.relations.len());
        self.triples.insert(Triple::new(head, relation, tail));
    }

    pub fn build(self) -> KnowledgeGraph {
        KnowledgeGraph::from_parts(self.entities, self.relations, self.triples)
    }
}

impl KnowledgeGraph {
    fn from_parts(entities: Interner, relations: Interner, triples: BTreeSet<Triple>) -> Self {
        let mut adjacency: Vec<Adjacency> = vec![BTreeMap::new(); entities.len()];
        // BTreeSet order is (head, relation, tail), so neighbor lists come out sorted.
        for t in &triples {
            adjacency[t.head.index()]
                .entry(t.relation)
                .or_default()
                .push(t.tail);
        }
        let inverse = link_inverses(&relations);
        Self {
            entities,
            relations,
            triples: triples.into_iter().collect(),
            adjacency,
            inverse,
        }
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    /// Number of relations, inverses included.
    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn num_triples(&self) -> usize {
        self.triples.len()
    }

    /// All triples in (head, relation, tail) order.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.binary_search(t).is_ok()
    }

    pub fn entity_id(&self, label: &str) -> Option<EntityId> {
        self.entities.get(label).map(EntityId)
    }

    pub fn relation_id(&self, label: &str) -> Option<RelationId> {
        self.relations.get(label).map(RelationId)
    }

    pub fn entity_label(&self, id: EntityId) -> &str {
        self.entities.label(id.0)
    }

    pub fn relation_label(&self, id: RelationId) -> &str {
        self.relations.label(id.0)
    }

    pub fn relations(&self) -> impl Iterator<Item = RelationId> {
        (0..self.relations.len() as u32).map(RelationId)
    }

    pub fn entities(&self) -> impl Iterator<Item = EntityId> {
        (0..self.entities.len() as u32).map(EntityId)
    }

    /// The paired inverse relation, when one exists in the graph.
    pub fn inverse_of(&self, relation: RelationId) -> Option<RelationId> {
        self.inverse.get(relation.index()).copied().flatten()
    }

    pub fn has_inverse_relations(&self) -> bool {
        (0..self.relations.len() as u32).any(|r| self.relations.label(r).ends_with(INVERSE_SUFFIX))
    }

    /// Unmasked traversal view.
    pub fn view(&self) -> GraphView<'_> {
        GraphView {
            kg: self,
            masks: SmallVec::new(),
        }
    }

    /// Writes the triple set as `head\trelation\ttail` lines.
    pub fn write_triples<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for t in &self.triples {
            writeln!(
                out,
                "{}\t{}\t{}",
                self.entity_label(t.head),
                self.relation_label(t.relation),
                self.entity_label(t.tail)
            )?;
        }
        Ok(())
    }

    /// Largest number of distinct heads sharing a single tail under `relation`.
    pub fn max_tail_fanin(&self, relation: RelationId) -> usize {
        let mut fanin: HashMap<EntityId, usize> = HashMap::new();
        for t in self.triples.iter().filter(|t| t.relation == relation) {
            *fanin.entry(t.tail).or_default() += 1;
        }
        fanin.values().copied().max().unwrap_or(0)
    }

    /// Adds `(t, r_inv, h)` for every `(h, r, t)` whose relation passes the
    /// fan-in filter. A relation is filtered when more than `fanin_threshold`
    /// distinct heads point at one tail.
    pub fn add_inverse_relations(&self, fanin_threshold: usize) -> Result<InverseReport> {
        if fanin_threshold == 0 {
            return Err(Error::Config("fanin_threshold must be positive".into()));
        }
        if let Some(r) = self
            .relations()
            .find(|&r| self.relation_label(r).ends_with(INVERSE_SUFFIX))
        {
            return Err(Error::InverseAlreadyPresent(
                self.relation_label(r).to_owned(),
            ));
        }
        let base_count = self.relations.len() as u32;
        let mut relations = self.relations.clone();
        let mut triples: BTreeSet<Triple> = self.triples.iter().copied().collect();
        let mut filtered = Vec::new();
        for r in 0..base_count {
            let r = RelationId(r);
            let label = format!("{}{}", self.relation_label(r), INVERSE_SUFFIX);
            if self.relations.get(&label).is_some() {
                return Err(Error::InverseAlreadyPresent(label));
            }
            if self.max_tail_fanin(r) > fanin_threshold {
                filtered.push(r);
                continue;
            }
            let inv = RelationId(relations.intern(&label));
            for t in self.triples.iter().filter(|t| t.relation == r) {
                triples.insert(Triple::new(t.tail, inv, t.head));
            }
        }
        let graph = Self::from_parts(self.entities.clone(), relations, triples);
        Ok(InverseReport { graph, filtered })
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            entities: self.num_entities(),
            relations: self.num_relations(),
            triples: self.num_triples(),
        }
    }
}

fn link_inverses(relations: &Interner) -> Vec<Option<RelationId>> {
    (0..relations.len() as u32)
        .map(|r| {
            let label = relations.label(r);
            let partner = match label.strip_suffix(INVERSE_SUFFIX) {
                Some(base) => relations.get(base),
                None => relations.get(&format!("{label}{INVERSE_SUFFIX}")),
            };
            partner.map(RelationId)
        })
        .collect()
}

/// Result of inverse-relation preprocessing.
#[derive(Debug, Clone)]
pub struct InverseReport {
    pub graph: KnowledgeGraph,
    /// Relations that exceeded the fan-in threshold and gained no inverse.
    pub filtered: Vec<RelationId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub entities: usize,
    pub relations: usize,
    pub triples: usize,
}

/// Parses `head\trelation\ttail` lines. Blank lines are ignored and duplicate
/// triples collapse.
pub fn load_triples<R: BufRead>(source: R) -> Result<KnowledgeGraph> {
    let mut builder = GraphBuilder::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        builder.add(fields[0], fields[1], fields[2]);
    }
    let kg = builder.build();
    log::info!(
        "loaded {} triples, {} entities, {} relations",
        kg.num_triples(),
        kg.num_entities(),
        kg.num_relations()
    );
    Ok(kg)
}

/// A set of hidden edges applied on top of a graph.
#[derive(Debug, Clone, Default)]
pub struct EdgeMask {
    hidden: HashSet<Triple>,
}

impl EdgeMask {
    pub fn new() -> Self {
        Self::default()
    }

    /// Hides `(h, relation, t)` and `(t, relation_inv, h)` for every pair.
    /// Pairs that are not edges of the graph are ignored.
    pub fn for_pairs<'p, I>(kg: &KnowledgeGraph, relation: RelationId, pairs: I) -> Self
    where
        I: IntoIterator<Item = &'p (EntityId, EntityId)>,
    {
        let mut mask = Self::new();
        mask.hide_pairs(kg, relation, pairs);
        mask
    }

    pub fn hide_pairs<'p, I>(&mut self, kg: &KnowledgeGraph, relation: RelationId, pairs: I)
    where
        I: IntoIterator<Item = &'p (EntityId, EntityId)>,
    {
        let inverse = kg.inverse_of(relation);
        for &(h, t) in pairs {
            self.hidden.insert(Triple::new(h, relation, t));
            if let Some(inv) = inverse {
                self.hidden.insert(Triple::new(t, inv, h));
            }
        }
    }

    pub fn hides(&self, t: &Triple) -> bool {
        self.hidden.contains(t)
    }

    pub fn len(&self) -> usize {
        self.hidden.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hidden.is_empty()
    }
}

/// Read-only traversal over a graph with zero or more masks layered on top.
/// The underlying graph is never modified.
#[derive(Debug, Clone)]
pub struct GraphView<'a> {
    kg: &'a KnowledgeGraph,
    masks: SmallVec<[&'a EdgeMask; 2]>,
}

impl<'a> GraphView<'a> {
    pub fn graph(&self) -> &'a KnowledgeGraph {
        self.kg
    }

    /// A new view that additionally hides the edges in `mask`.
    pub fn masked<'b>(&self, mask: &'b EdgeMask) -> GraphView<'b>
    where
        'a: 'b,
    {
        let mut masks: SmallVec<[&'b EdgeMask; 2]> = self.masks.iter().copied().collect();
        if !mask.is_empty() {
            masks.push(mask);
        }
        GraphView { kg: self.kg, masks }
    }

    fn visible(&self, t: &Triple) -> bool {
        !self.masks.iter().any(|m| m.hides(t))
    }

    fn adjacency(&self, entity: EntityId) -> Option<&'a Adjacency> {
        self.kg.adjacency.get(entity.index())
    }

    /// Neighbors of `entity` under `relation`, ascending by id. Unknown
    /// entities yield nothing.
    pub fn neighbors(
        &self,
        entity: EntityId,
        relation: RelationId,
    ) -> impl Iterator<Item = EntityId> + use<'_, 'a> {
        self.adjacency(entity)
            .and_then(|adj| adj.get(&relation))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .copied()
            .filter(move |&t| self.visible(&Triple::new(entity, relation, t)))
    }

    /// Outgoing `(relation, visible neighbors)` groups in relation order.
    /// Groups whose neighbors are all masked are omitted.
    pub fn out_edges(&self, entity: EntityId) -> impl Iterator<Item = (RelationId, Vec<EntityId>)> + use<'_, 'a> {
        self.adjacency(entity)
            .into_iter()
            .flat_map(|adj| adj.iter())
            .filter_map(move |(&r, nbrs)| {
                let visible: Vec<EntityId> = if self.masks.is_empty() {
                    nbrs.clone()
                } else {
                    nbrs.iter()
                        .copied()
                        .filter(|&t| self.visible(&Triple::new(entity, r, t)))
                        .collect()
                };
                (!visible.is_empty()).then_some((r, visible))
            })
    }

    /// Per-relation out-degree of `entity` under this view.
    pub fn out_degree(&self, entity: EntityId) -> BTreeMap<RelationId, usize> {
        self.out_edges(entity).map(|(r, n)| (r, n.len())).collect()
    }

    pub fn degree(&self, entity: EntityId, relation: RelationId) -> usize {
        self.neighbors(entity, relation).count()
    }

    /// Visible triples, in (head, relation, tail) order.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + use<'_, 'a> {
        self.kg.triples.iter().copied().filter(|t| self.visible(t))
    }

    /// Number of visible triples carrying `relation`.
    pub fn relation_count(&self, relation: RelationId) -> usize {
        self.triples().filter(|t| t.relation == relation).count()
    }
}

/// Train/test pairs for one target relation.
#[derive(Debug, Clone)]
pub struct TaskSplit {
    pub name: String,
    pub relation: RelationId,
    pub train: Vec<(EntityId, EntityId)>,
    pub test: Vec<(EntityId, EntityId)>,
    /// Pairs dropped while loading (unknown entity, or overlap with test).
    pub dropped: usize,
    /// Every known tail of each head: train, test and graph edges of the
    /// target relation.
    tails: BTreeMap<EntityId, BTreeSet<EntityId>>,
}

impl TaskSplit {
    /// Builds a split. Training pairs that also occur in the test set are
    /// dropped so the two stay disjoint.
    pub fn new(
        kg: &KnowledgeGraph,
        name: impl Into<String>,
        relation: RelationId,
        train: Vec<(EntityId, EntityId)>,
        test: Vec<(EntityId, EntityId)>,
    ) -> Self {
        let test_set: HashSet<_> = test.iter().copied().collect();
        let before = train.len();
        let train: Vec<_> = train.into_iter().filter(|p| !test_set.contains(p)).collect();
        let dropped = before - train.len();
        if dropped > 0 {
            log::warn!("dropped {dropped} training pairs that also appear in the test set");
        }
        let mut tails: BTreeMap<EntityId, BTreeSet<EntityId>> = BTreeMap::new();
        for &(h, t) in train.iter().chain(test.iter()) {
            tails.entry(h).or_default().insert(t);
        }
        for t in kg.triples().iter().filter(|t| t.relation == relation) {
            tails.entry(t.head).or_default().insert(t.tail);
        }
        Self {
            name: name.into(),
            relation,
            train,
            test,
            dropped,
            tails,
        }
    }

    /// T(h): all known tails of `head` under the target relation.
    pub fn tails_of(&self, head: EntityId) -> Vec<EntityId> {
        self.tails
            .get(&head)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    /// Mask hiding every test pair (and its inverse edge).
    pub fn test_mask(&self, kg: &KnowledgeGraph) -> EdgeMask {
        EdgeMask::for_pairs(kg, self.relation, self.test.iter())
    }

    /// Mask hiding `head -> T(head)` under the target relation and inverse.
    pub fn head_mask(&self, kg: &KnowledgeGraph, head: EntityId) -> EdgeMask {
        let pairs: Vec<_> = self.tails_of(head).into_iter().map(|t| (head, t)).collect();
        EdgeMask::for_pairs(kg, self.relation, pairs.iter())
    }
}

/// Reads a `head\ttail` pair file. A third field, when present, must name
/// the target relation. Pairs naming unknown entities are skipped and
/// counted.
pub fn load_pairs<R: BufRead>(
    kg: &KnowledgeGraph,
    relation_label: &str,
    source: R,
) -> Result<(Vec<(EntityId, EntityId)>, usize)> {
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    let mut unknown = 0;
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !(fields.len() == 2 || fields.len() == 3) {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 2 tab-separated fields, found {}", fields.len()),
            });
        }
        if fields.len() == 3 && fields[2] != relation_label {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("pair names relation {:?}, expected {relation_label:?}", fields[2]),
            });
        }
        match (kg.entity_id(fields[0]), kg.entity_id(fields[1])) {
            (Some(h), Some(t)) => {
                if seen.insert((h, t)) {
                    pairs.push((h, t));
                }
            }
            _ => unknown += 1,
        }
    }
    Ok((pairs, unknown))
}

/// Loads `dir/train_pos` and `dir/test_pos` for a target relation. The
/// relation label defaults to the directory name.
pub fn load_task(
    kg: &KnowledgeGraph,
    dir: &std::path::Path,
    relation_label: Option<&str>,
) -> Result<TaskSplit> {
    let name = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let label = relation_label.unwrap_or(&name).to_owned();
    let relation = kg
        .relation_id(&label)
        .ok_or_else(|| Error::UnknownRelation(label.clone()))?;
    let open = |file: &str| -> Result<std::io::BufReader<std::fs::File>> {
        let path = dir.join(file);
        let f = std::fs::File::open(&path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(std::io::BufReader::new(f))
    };
    let (train, u1) = load_pairs(kg, &label, open("train_pos")?)?;
    let (test, u2) = load_pairs(kg, &label, open("test_pos")?)?;
    if u1 + u2 > 0 {
        log::warn!("task {name}: skipped {} pairs with unknown entities", u1 + u2);
    }
    let mut split = TaskSplit::new(kg, name, relation, train, test);
    split.dropped += u1 + u2;
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(lines: &str) -> KnowledgeGraph {
        load_triples(lines.as_bytes()).unwrap()
    }

    #[test]
    fn duplicate_lines_collapse() {
        let kg = graph("a\tr\tb\na\tr\tb\n");
        assert_eq!(kg.stats(), GraphStats { entities: 2, relations: 1, triples: 1 });
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = load_triples("a\tr\tb\n\na\tr\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(load_triples("a\tr\tb\tc\n".as_bytes()).is_err());
    }

    #[test]
    fn inverse_added_below_threshold() {
        let kg = graph("h\tspouse\tt\n");
        let out = kg.add_inverse_relations(10).unwrap();
        let g = out.graph;
        let inv = g.relation_id("spouse_inv").unwrap();
        let (h, t) = (g.entity_id("h").unwrap(), g.entity_id("t").unwrap());
        assert!(g.contains(&Triple::new(t, inv, h)));
        assert_eq!(g.inverse_of(g.relation_id("spouse").unwrap()), Some(inv));
        assert_eq!(g.inverse_of(inv), g.relation_id("spouse"));
    }

    #[test]
    fn fanin_filter_suppresses_inverse() {
        let mut b = GraphBuilder::new();
        for i in 0..100 {
            b.add(&format!("h{i}"), "g", "hub");
        }
        b.add("x", "other", "y");
        let out = b.build().add_inverse_relations(50).unwrap();
        assert!(out.graph.relation_id("g_inv").is_none());
        assert!(out.graph.relation_id("other_inv").is_some());
        assert_eq!(out.filtered.len(), 1);
        assert_eq!(out.graph.num_triples(), 102);
    }

    #[test]
    fn second_application_rejected() {
        let kg = graph("h\tr\tt\n").add_inverse_relations(10).unwrap().graph;
        assert!(matches!(
            kg.add_inverse_relations(10),
            Err(Error::InverseAlreadyPresent(_))
        ));
    }

    #[test]
    fn label_collision_rejected() {
        let kg = graph("h\tr\tt\nh\tr_inv\tt\n");
        assert!(kg.add_inverse_relations(10).is_err());
    }

    #[test]
    fn neighbors_sorted_and_masked() {
        let kg = graph("a\tr\tc\na\tr\tb\n");
        let (a, b, c) = (
            kg.entity_id("a").unwrap(),
            kg.entity_id("b").unwrap(),
            kg.entity_id("c").unwrap(),
        );
        let r = kg.relation_id("r").unwrap();
        let mut expected = vec![b, c];
        expected.sort();
        assert_eq!(kg.view().neighbors(a, r).collect::<Vec<_>>(), expected);
        let mask = EdgeMask::for_pairs(&kg, r, [(a, b)].iter());
        let view = kg.view();
        let masked = view.masked(&mask);
        assert_eq!(masked.neighbors(a, r).collect::<Vec<_>>(), vec![c]);
        assert!(masked.neighbors(EntityId(99), r).next().is_none());
        // the graph itself is untouched
        assert_eq!(kg.view().degree(a, r), 2);
    }

    #[test]
    fn mask_hides_inverse_edge() {
        let kg = graph("a\tr\tb\na\tr\tc\n").add_inverse_relations(10).unwrap().graph;
        let r = kg.relation_id("r").unwrap();
        let (a, b) = (kg.entity_id("a").unwrap(), kg.entity_id("b").unwrap());
        let mask = EdgeMask::for_pairs(&kg, r, [(a, b)].iter());
        let view = kg.view();
        let masked = view.masked(&mask);
        let visible: Vec<_> = masked.triples().collect();
        assert_eq!(visible.len(), 2);
        assert!(visible.iter().all(|t| !(t.head == b || t.tail == b)));
        let empty = EdgeMask::new();
        assert_eq!(kg.view().masked(&empty).triples().count(), kg.num_triples());
    }

    #[test]
    fn serialize_round_trip() {
        let src = "x\tp\ty\ny\tq\tz\nx\tp\tz\n";
        let kg = graph(src);
        let mut buf = Vec::new();
        kg.write_triples(&mut buf).unwrap();
        let again = load_triples(buf.as_slice()).unwrap();
        let labels = |g: &KnowledgeGraph| -> BTreeSet<(String, String, String)> {
            g.triples()
                .iter()
                .map(|t| {
                    (
                        g.entity_label(t.head).to_owned(),
                        g.relation_label(t.relation).to_owned(),
                        g.entity_label(t.tail).to_owned(),
                    )
                })
                .collect()
        };
        assert_eq!(labels(&kg), labels(&again));
    }

    #[test]
    fn task_split_drops_overlap() {
        let kg = graph("a\tr\tb\nc\tr\td\n");
        let r = kg.relation_id("r").unwrap();
        let ab = (kg.entity_id("a").unwrap(), kg.entity_id("b").unwrap());
        let cd = (kg.entity_id("c").unwrap(), kg.entity_id("d").unwrap());
        let split = TaskSplit::new(&kg, "r", r, vec![ab, cd], vec![cd]);
        assert_eq!(split.train, vec![ab]);
        assert_eq!(split.dropped, 1);
        assert_eq!(split.tails_of(ab.0), vec![ab.1]);
    }
}
