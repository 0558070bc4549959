// Load a triple file, add inverse relations and hide the edges of a task.

use dcpath::kg::{load_triples, EdgeMask, KnowledgeGraph};

const TRIPLES: &str = "\
kobe\tplaysFor\tlakers
lebron\tplaysFor\tlakers
lakers\thomeStadium\tcrypto_arena
kobe\tathleteHomeStadium\tcrypto_arena
curry\tplaysFor\twarriors
warriors\thomeStadium\tchase_center
";

pub fn run_example() -> dcpath::Result<KnowledgeGraph> {
    let raw = load_triples(TRIPLES.as_bytes())?;
    println!("loaded {:?}", raw.stats());

    let report = raw.add_inverse_relations(100)?;
    let kg = report.graph;
    println!("with inverses {:?}, filtered {:?}", kg.stats(), report.filtered);

    let target = kg.relation_id("athleteHomeStadium").expect("target relation");
    let kobe = kg.entity_id("kobe").expect("kobe");
    let arena = kg.entity_id("crypto_arena").expect("arena");
    let mask = EdgeMask::for_pairs(&kg, target, &[(kobe, arena)]);
    {
        let view = kg.view();
        let hidden = view.masked(&mask);
        let total = |v: &dcpath::GraphView<'_>| v.out_degree(kobe).values().sum::<usize>();
        println!("kobe out-degree: {} visible, {} with the task edge hidden", total(&view), total(&hidden));
        for (rel, tails) in hidden.out_edges(kobe) {
            let names: Vec<&str> = tails.iter().map(|&t| kg.entity_label(t)).collect();
            println!("  kobe -{}-> {:?}", kg.relation_label(rel), names);
        }
    }
    Ok(kg)
}

#[allow(dead_code)]
fn main() -> dcpath::Result<()> {
    run_example().map(|_| ())
}
