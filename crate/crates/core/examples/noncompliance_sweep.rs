//! Symmetric noncompliance sweep: mean final regret of TS, TS-Check and TS-Obs
//! as the swap probability p runs from 0 to 1.
//!
//! cargo run --release --example noncompliance_sweep -- [horizon] [replications]

use ncbandit::harness::{presets, sweep_noncompliance, RunOptions};

fn main() -> ncbandit::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().ok());
    let horizon = args.next().flatten().unwrap_or(1000);
    let reps = args.next().flatten().unwrap_or(20);

    let grid = presets::sweep_grid(0.1, 1.0)?;
    let opts = RunOptions::new(horizon, reps, 1);
    let (_, rows) = sweep_noncompliance(&grid, &presets::sweep_agents(), &opts)?;

    println!("T = {horizon}, R = {reps}");
    println!(
        "{:>5} {:>18} {:>18} {:>18}",
        "p", "TS", "TS-Check", "TS-Obs"
    );
    for &p in &grid {
        let cell = |agent: &str| {
            rows.iter()
                .find(|r| r.p == p && r.agent == agent)
                .map(|r| {
                    let mark = if r.flagged { "*" } else { " " };
                    format!("{:8.2} +- {:6.2}{mark}", r.stats.mean, r.stats.std)
                })
                .unwrap_or_default()
        };
        println!(
            "{p:>5.2} {:>18} {:>18} {:>18}",
            cell("TS"),
            cell("TS-Check"),
            cell("TS-Obs")
        );
    }
    println!("* TS-Check past p = 0.5 only learns from the rare compliant rounds");
    Ok(())
}
