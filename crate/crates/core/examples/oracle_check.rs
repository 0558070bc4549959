// Exhaustive search compared against exact path enumeration on random graphs.

use dcpath::oracle::{oracle_check, OracleReport};

pub fn run_example() -> dcpath::Result<OracleReport> {
    let report = oracle_check(20, 25, 3, 9)?;
    println!(
        "{} graphs, {} relation sequences, {} pooled paths: {}",
        report.graphs,
        report.sequences_checked,
        report.pool_paths,
        if report.passed() { "agree" } else { "DISAGREE" }
    );
    if let Some(c) = &report.counterexample {
        println!("{c}");
    }
    Ok(report)
}

#[allow(dead_code)]
fn main() -> dcpath::Result<()> {
    run_example().map(|_| ())
}
