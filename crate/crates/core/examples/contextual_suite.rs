//! Four two-context environments with different compliance patterns, every
//! agent including TS-Lat with and without a soft start.
//!
//! cargo run --release --example contextual_suite -- [horizon] [replications]

use ncbandit::harness::{presets, run_cb_suite, RunOptions};

fn main() -> ncbandit::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().ok());
    let horizon = args.next().flatten().unwrap_or(500);
    let reps = args.next().flatten().unwrap_or(10);

    let agents = presets::cb_agents(&[0, 40]);
    let out = run_cb_suite(
        &presets::CB_ENV_IDS,
        &agents,
        &RunOptions::new(horizon, reps, 1),
    )?;

    print!("{:<10}", "");
    for id in presets::CB_ENV_IDS {
        print!("{:>24}", format!("env{id} q50 / mean / std"));
    }
    println!();
    for spec in &agents {
        let name = spec.name();
        print!("{name:<10}");
        for id in presets::CB_ENV_IDS {
            let s = out
                .summary(&format!("env{id}"), &name)
                .expect("every cell ran");
            print!(
                "{:>24}",
                format!("{:.1} / {:.1} / {:.1}", s.q50, s.mean, s.std)
            );
        }
        println!();
    }
    if !out.failures.is_empty() {
        eprintln!("{} replications failed", out.failures.len());
    }
    Ok(())
}
