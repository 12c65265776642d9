//! Replays the International Stroke Trial summary statistics (six treatment
//! arms, empirical compliance) and reports the expected number of extra
//! successes each agent earns over uniform allocation.
//!
//! cargo run --release --example stroke_trial -- [patients] [replications]

use ncbandit::harness::{presets, run_ist, IstClass, RunOptions};

fn main() -> ncbandit::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().ok());
    let patients = args.next().flatten().unwrap_or(5000);
    let reps = args.next().flatten().unwrap_or(50);
    let opts = RunOptions::new(patients, reps, 1);

    for class in IstClass::ALL {
        let (_, report) = run_ist(class, &presets::ist_agents(), &opts)?;
        println!(
            "{} (uniform allocation loses {:.1} expected successes)",
            class.as_str().to_uppercase(),
            report.baseline_mean_regret
        );
        for row in &report.rows {
            println!("  {:<10} {:>8.2} +- {:.2}", row.agent, row.excess, row.sem);
        }
    }
    Ok(())
}
