// Confidence-guided search on a graph with a planted two-hop pattern.

use dcpath::search::{run_path_search, SearchConfig, SearchResult};
use dcpath::synth::planted_pattern;

pub fn run_example() -> dcpath::Result<SearchResult> {
    let planted = planted_pattern(1);
    let kg = &planted.graph;
    let cfg = SearchConfig::default();
    let result = run_path_search(kg, &planted.task, &cfg)?;

    println!("{:?}", result.log);
    println!("top paths by D-confidence:");
    for (path, e) in result.pool.ranked().into_iter().take(5) {
        println!(
            "  {:<40} D-conf {:.3}  D-cov {:.3}  seen on {} pairs",
            path.display(kg).to_string(),
            e.d_confidence(),
            e.d_coverage(),
            e.pairs_seen
        );
    }

    let mut rels: Vec<(f64, &str)> = result
        .matrix
        .relation_confidences(&result.pool)
        .into_iter()
        .enumerate()
        .map(|(r, a)| (a, kg.relation_label(dcpath::RelationId(r as u32))))
        .collect();
    rels.sort_by(|a, b| b.0.total_cmp(&a.0));
    println!("relation confidence -> expansion probability:");
    for (a, label) in rels.into_iter().take(4) {
        println!("  {label:<20} {a:.3} -> {:.3}", dcpath::search::search_probability(a, &cfg));
    }
    Ok(result)
}

#[allow(dead_code)]
fn main() -> dcpath::Result<()> {
    run_example().map(|_| ())
}
