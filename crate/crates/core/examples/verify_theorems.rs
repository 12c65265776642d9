//! Numerical battery for the regret-bound results.

use ncbandit::harness::verify::verify_theorems;

fn main() -> ncbandit::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(10_000);
    let report = verify_theorems(trials, 7)?;
    print!("{}", report.render());
    if !report.passed() {
        std::process::exit(2);
    }
    Ok(())
}
