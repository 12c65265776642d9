//! Runs an experiment described by a TOML file and writes the CSV outputs.
//!
//! cargo run --release --example custom_config -- [config.toml] [output dir]

use std::path::PathBuf;

use ncbandit::config::{parse_config, to_toml};
use ncbandit::harness::{options_for, run_replications};
use ncbandit::output::{write_results, Manifest};

fn main() -> ncbandit::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().map_or_else(
        || PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/two_arm.toml"),
        PathBuf::from,
    );
    let config = parse_config(&path)?;
    let out_dir = args.next().map_or_else(
        || std::env::temp_dir().join("ncbandit-example"),
        PathBuf::from,
    );

    let out = run_replications(&config, &options_for(&config))?;
    for row in out.summaries() {
        println!(
            "{} {:<10} q50 {:>7.2} mean {:>7.2} std {:>6.2} (n = {})",
            row.label, row.agent, row.stats.q50, row.stats.mean, row.stats.std, row.stats.n
        );
    }

    let mut manifest = Manifest::new(
        &config.experiment,
        config.seed,
        config.horizon,
        config.replications,
    );
    manifest.config_toml = Some(to_toml(&config)?);
    for path in write_results(&out_dir, &out, &manifest)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
