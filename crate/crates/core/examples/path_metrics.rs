// Exact support, count, cover, confidence and coverage of one relation path.

use dcpath::kg::GraphBuilder;
use dcpath::path_eval::{cover, pair_coverage, path_confidence, path_count, path_entity_support, PathFeature};

pub fn run_example() -> dcpath::Result<(f64, f64)> {
    let mut b = GraphBuilder::new();
    b.add("kobe", "playsFor", "lakers");
    b.add("kobe", "playsFor", "allstars");
    b.add("lakers", "homeStadium", "crypto_arena");
    b.add("allstars", "homeStadium", "rotating_arena");
    b.add("curry", "playsFor", "warriors");
    b.add("warriors", "homeStadium", "chase_center");
    let kg = b.build();
    let view = kg.view();

    let path = PathFeature::new([
        kg.relation_id("playsFor").expect("playsFor"),
        kg.relation_id("homeStadium").expect("homeStadium"),
    ]);
    let id = |name: &str| kg.entity_id(name).expect("entity");
    let pairs = [(id("kobe"), id("crypto_arena")), (id("curry"), id("chase_center"))];

    for &(h, t) in &pairs {
        println!(
            "{} -> {} via {}: support {}, count {}, cover {}",
            kg.entity_label(h),
            kg.entity_label(t),
            path.display(&kg),
            path_entity_support(&view, h, t, &path),
            path_count(&view, h, &path),
            cover(&view, h, t, &path)
        );
    }
    let confidence = path_confidence(&view, &pairs, &path)?;
    let coverage = pair_coverage(&view, &pairs, &path)?;
    println!("confidence {confidence:.3}, coverage {coverage:.3}");
    Ok((confidence, coverage))
}

#[allow(dead_code)]
fn main() -> dcpath::Result<()> {
    run_example().map(|_| ())
}
