// Four-threshold selection over a searched pool, with per-path verdicts.

use dcpath::search::{run_path_search, SearchConfig};
use dcpath::selection::{select_paths, selection_report, SelectionThresholds};
use dcpath::synth::planted_pattern;

pub fn run_example() -> dcpath::Result<usize> {
    let planted = planted_pattern(2);
    let kg = &planted.graph;
    let result = run_path_search(kg, &planted.task, &SearchConfig::default())?;

    for name in ["all", "fb15k237-lowered", "nell995"] {
        let th = SelectionThresholds::preset(name).expect("known preset");
        println!("{name:<18} keeps {} of {} paths", select_paths(&result.pool, &th).len(), result.pool.len());
    }

    let th = SelectionThresholds::NELL995;
    for r in selection_report(kg, &result.pool, &th).iter().take(6) {
        let verdict = match r.rejected_by {
            None => "kept".to_owned(),
            Some(rule) => format!("rejected by {rule:?}"),
        };
        println!("  {:<40} {:.3} {:.3} {verdict}", r.path.path.join(" > "), r.path.d_confidence, r.path.d_coverage);
    }
    Ok(select_paths(&result.pool, &th).len())
}

#[allow(dead_code)]
fn main() -> dcpath::Result<()> {
    run_example().map(|_| ())
}
