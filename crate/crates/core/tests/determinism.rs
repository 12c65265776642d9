use std::fs;

use ncbandit::agents::AgentSpec;
use ncbandit::harness::presets::{cb_agents, ist_agents, sweep_agents, sweep_grid};
use ncbandit::harness::{run_cb_suite, run_ist, sweep_noncompliance, IstClass, RunOptions};
use ncbandit::output::{write_results, Manifest};
use ncbandit::RunOutput;

fn opts(workers: usize) -> RunOptions {
    RunOptions {
        workers: Some(workers),
        keep_traces: true,
        ..RunOptions::new(120, 4, 17)
    }
}

fn csv_bytes(out: &RunOutput) -> Vec<Vec<u8>> {
    let dir = tempfile::tempdir().unwrap();
    write_results(dir.path(), out, &Manifest::new("x", 17, 120, 4)).unwrap();
    ["results.csv", "summary.csv", "traces.csv"]
        .iter()
        .map(|f| fs::read(dir.path().join(f)).unwrap())
        .collect()
}

#[test]
fn presets_are_worker_independent() {
    let grid = sweep_grid(0.25, 1.0).unwrap();
    let sweep = |w| {
        sweep_noncompliance(&grid, &sweep_agents(), &opts(w))
            .unwrap()
            .0
    };
    assert_eq!(csv_bytes(&sweep(1)), csv_bytes(&sweep(4)));

    let cb = |w| run_cb_suite(&[1, 2, 3, 4], &cb_agents(&[0, 40]), &opts(w)).unwrap();
    assert_eq!(csv_bytes(&cb(1)), csv_bytes(&cb(4)));

    let ist = |w| run_ist(IstClass::Sts, &ist_agents(), &opts(w)).unwrap().0;
    assert_eq!(csv_bytes(&ist(1)), csv_bytes(&ist(4)));
}

#[test]
fn seeds_change_results() {
    let agents = [AgentSpec::new(ncbandit::AgentKind::Ts)];
    let grid = [0.2];
    let a = sweep_noncompliance(&grid, &agents, &RunOptions::new(200, 3, 1))
        .unwrap()
        .0;
    let b = sweep_noncompliance(&grid, &agents, &RunOptions::new(200, 3, 2))
        .unwrap()
        .0;
    assert_ne!(a.records, b.records);
}
