//! Synthetic graphs for tests, examples and the oracle check.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kg::{EntityId, GraphBuilder, KnowledgeGraph, TaskSplit};
use crate::path_eval::PathFeature;

/// Shape of a uniformly random multi-relational graph.
#[derive(Debug, Clone, Copy)]
pub struct RandomGraphSpec {
    pub entities: usize,
    pub relations: usize,
    pub triples: usize,
    /// Allow `(e, r, e)` edges.
    pub self_loops: bool,
}

/// Uniform random triples over `e0..` and `r0..`. Relation `r0` always
/// gets at least one edge so it can serve as a target.
pub fn random_graph(spec: RandomGraphSpec, rng: &mut impl Rng) -> KnowledgeGraph {
    assert!(spec.entities >= 2 && spec.relations >= 1);
    let mut b = GraphBuilder::new();
    let ents: Vec<EntityId> = (0..spec.entities).map(|i| b.entity(&format!("e{i}"))).collect();
    let rels: Vec<_> = (0..spec.relations).map(|i| b.relation(&format!("r{i}"))).collect();
    for i in 0..spec.triples.max(1) {
        let r = if i == 0 { rels[0] } else { rels[rng.gen_range(0..rels.len())] };
        let h = ents[rng.gen_range(0..ents.len())];
        let mut t = ents[rng.gen_range(0..ents.len())];
        while !spec.self_loops && t == h {
            t = ents[rng.gen_range(0..ents.len())];
        }
        b.add_ids(h, r, t);
    }
    b.build()
}

/// Graph plus a task over relation `r0` whose training pairs are that
/// relation's edges in random order.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub graph: KnowledgeGraph,
    pub task: TaskSplit,
}

pub fn random_instance(spec: RandomGraphSpec, test_fraction: f64, rng: &mut impl Rng) -> RandomInstance {
    let base = random_graph(spec, rng);
    let graph = base
        .add_inverse_relations(usize::MAX)
        .expect("fresh graph has no inverses")
        .graph;
    let target = graph.relation_id("r0").expect("r0 exists");
    let mut pairs: Vec<(EntityId, EntityId)> = graph
        .triples()
        .iter()
        .filter(|t| t.relation == target)
        .map(|t| (t.head, t.tail))
        .collect();
    pairs.shuffle(rng);
    let n_test = ((pairs.len() as f64) * test_fraction).floor() as usize;
    let n_test = n_test.min(pairs.len().saturating_sub(1));
    let test = pairs.split_off(pairs.len() - n_test);
    let task = TaskSplit::new(&graph, "r0", target, pairs, test);
    RandomInstance { graph, task }
}

/// A graph in which the target relation is exactly the composition of two
/// other relations, padded with random noise relations.
#[derive(Debug, Clone)]
pub struct Planted {
    /// Triples as they would appear in a dataset file (no inverses).
    pub base: KnowledgeGraph,
    /// `base` with inverse relations added.
    pub graph: KnowledgeGraph,
    pub task: TaskSplit,
    /// The composed path, in `graph` ids.
    pub planted: PathFeature,
}

pub const PLANTED_TARGET: &str = "athleteHomeStadium";

/// 200 entities: 60 athletes, 20 teams, 20 stadiums and 100 others.
/// `athleteHomeStadium = playsFor . homeStadium` holds exactly; five noise
/// relations carry 150 random edges each. 45 athletes train, 15 test.
pub fn planted_pattern(seed: u64) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::new();
    let athletes: Vec<String> = (0..60).map(|i| format!("athlete{i}")).collect();
    let teams: Vec<String> = (0..20).map(|i| format!("team{i}")).collect();
    let stadiums: Vec<String> = (0..20).map(|i| format!("stadium{i}")).collect();
    let others: Vec<String> = (0..100).map(|i| format!("thing{i}")).collect();
    for name in athletes.iter().chain(&teams).chain(&stadiums).chain(&others) {
        b.entity(name);
    }
    for (team, stadium) in teams.iter().zip(&stadiums) {
        b.add(team, "homeStadium", stadium);
    }
    let mut pairs = Vec::new();
    for athlete in &athletes {
        let team = rng.gen_range(0..teams.len());
        b.add(athlete, "playsFor", &teams[team]);
        let t = b.add(athlete, PLANTED_TARGET, &stadiums[team]);
        pairs.push((t.head, t.tail));
    }
    let everyone: Vec<&String> = athletes.iter().chain(&teams).chain(&stadiums).chain(&others).collect();
    for k in 0..5 {
        let rel = format!("noise{k}");
        for _ in 0..150 {
            let h = everyone[rng.gen_range(0..everyone.len())];
            let t = everyone[rng.gen_range(0..everyone.len())];
            if h != t {
                b.add(h, &rel, t);
            }
        }
    }
    let base = b.build();
    let graph = base.add_inverse_relations(100).expect("no inverses yet").graph;
    pairs.shuffle(&mut rng);
    let test = pairs.split_off(45);
    let target = graph.relation_id(PLANTED_TARGET).expect("target");
    let task = TaskSplit::new(&graph, PLANTED_TARGET, target, pairs, test);
    let planted = PathFeature::new([
        graph.relation_id("playsFor").expect("playsFor"),
        graph.relation_id("homeStadium").expect("homeStadium"),
    ]);
    Planted {
        base,
        graph,
        task,
        planted,
    }
}

/// Writes `dir/graph.tsv` and `dir/tasks/<name>/{train_pos,test_pos}` in
/// the on-disk dataset layout.
pub fn write_dataset(dir: &Path, base: &KnowledgeGraph, tasks: &[&TaskSplit]) -> Result<()> {
    let io = |path: &Path, e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source: e,
    };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let graph_path = dir.join("graph.tsv");
    let f = std::fs::File::create(&graph_path).map_err(|e| io(&graph_path, e))?;
    base.write_triples(std::io::BufWriter::new(f)).map_err(|e| io(&graph_path, e))?;
    for task in tasks {
        let tdir = dir.join("tasks").join(&task.name);
        std::fs::create_dir_all(&tdir).map_err(|e| io(&tdir, e))?;
        for (file, pairs) in [("train_pos", &task.train), ("test_pos", &task.test)] {
            let path = tdir.join(file);
            let mut f = std::io::BufWriter::new(std::fs::File::create(&path).map_err(|e| io(&path, e))?);
            for &(h, t) in pairs.iter() {
                writeln!(f, "{}\t{}", base.entity_label(h), base.entity_label(t)).map_err(|e| io(&path, e))?;
            }
            f.flush().map_err(|e| io(&path, e))?;
        }
    }
    Ok(())
}
