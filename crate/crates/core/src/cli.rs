//! Command-line front end. Exit codes: 0 success, 1 usage or validation
//! error, 2 when `verify` finds a violation.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::agents::AgentSpec;
use crate::config::{parse_config, to_toml};
use crate::error::Result;
use crate::harness::presets::{self, CB_ENV_IDS};
use crate::harness::verify::verify_theorems;
use crate::harness::{
    env_workers, options_for, run_cb_suite, run_ist_classes, run_replications, sweep_noncompliance,
    IstClass, RunOptions, RunOutput,
};
use crate::output::{fmt_g17, write_excess, write_results, write_sweep_table, Manifest};

#[derive(Debug, Parser)]
#[command(
    name = "ncbandit",
    version,
    about = "Thompson sampling for Bernoulli bandits with noncompliance"
)]
struct Cli {
    /// Worker threads (overrides NCBANDIT_WORKERS and config files).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Also write per-step cumulative regret to traces.csv.
    #[arg(long, global = true)]
    traces: bool,
    /// Record wall time per episode (outputs are no longer byte-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Symmetric noncompliance sweep on mu = (0.75, 0.25).
    Sweep {
        #[arg(long, default_value_t = 2000)]
        t: usize,
        #[arg(long, default_value_t = 30)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        grid_step: f64,
        /// Largest p on the grid.
        #[arg(long, default_value_t = 1.0)]
        p_max: f64,
        #[arg(long, default_value = "results/sweep")]
        out: PathBuf,
    },
    /// Two-context environments 1-4 with TS, TS-Check, TS-Obs and TS-Lat.
    Cb {
        /// 1, 2, 3, 4 or all.
        #[arg(long, default_value = "all")]
        env: String,
        /// Soft starts for TS-Lat, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0,40")]
        m: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        t: usize,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "results/cb")]
        out: PathBuf,
    },
    /// Stroke-trial replay with excess successes over uniform allocation.
    Ist {
        /// sts, lts, ltr or all.
        #[arg(long, default_value = "all")]
        class: String,
        #[arg(long, default_value_t = 5000)]
        t: usize,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "results/ist")]
        out: PathBuf,
    },
    /// Numerical checks of the regret-bound results.
    Verify {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides run.output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `argv` (including the program name) and runs the command.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn options(
    cli: &Cli,
    t: usize,
    reps: usize,
    seed: u64,
    config_workers: Option<usize>,
) -> RunOptions {
    RunOptions {
        workers: cli.workers.or_else(env_workers).or(config_workers),
        keep_traces: cli.traces,
        timing: cli.timing,
        ..RunOptions::new(t, reps, seed)
    }
}

fn finish(out_dir: &Path, out: &RunOutput, manifest: &Manifest) -> Result<()> {
    let written = write_results(out_dir, out, manifest)?;
    print_summary(out);
    for f in &out.failures {
        eprintln!(
            "warning: {} {} replication {} failed: {}",
            f.label, f.agent, f.replication, f.message
        );
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn print_summary(out: &RunOutput) {
    println!(
        "{:<10} {:<10} {:>12} {:>12} {:>12} {:>5}",
        "label", "agent", "q50", "mean", "std", "n"
    );
    for row in out.summaries() {
        let s = row.stats;
        println!(
            "{:<10} {:<10} {:>12.3} {:>12.3} {:>12.3} {:>5}",
            row.label, row.agent, s.q50, s.mean, s.std, s.n
        );
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::Sweep {
            t,
            reps,
            seed,
            grid_step,
            p_max,
            out,
        } => {
            let grid = presets::sweep_grid(*grid_step, *p_max)?;
            let agents = presets::sweep_agents();
            let opts = options(&cli, *t, *reps, *seed, None);
            let (run, rows) = sweep_noncompliance(&grid, &agents, &opts)?;
            let mut manifest = Manifest::new("sweep", *seed, *t, *reps);
            manifest.parameters = json!({
                "mu": presets::SWEEP_MU,
                "grid": grid.iter().map(|p| fmt_g17(*p)).collect::<Vec<_>>(),
                "agents": agent_names(&agents),
            });
            finish(out, &run, &manifest)?;
            println!("wrote {}", write_sweep_table(out, &rows)?.display());
        }
        Command::Cb {
            env,
            m,
            t,
            reps,
            seed,
            out,
        } => {
            let envs = parse_env_ids(env)?;
            let agents = presets::cb_agents(m);
            let opts = options(&cli, *t, *reps, *seed, None);
            let run = run_cb_suite(&envs, &agents, &opts)?;
            let mut manifest = Manifest::new("cb", *seed, *t, *reps);
            manifest.parameters = json!({
                "environments": envs,
                "agents": agent_names(&agents),
            });
            finish(out, &run, &manifest)?;
        }
        Command::Ist {
            class,
            t,
            reps,
            seed,
            out,
        } => {
            let classes = parse_classes(class)?;
            let agents = presets::ist_agents();
            let opts = options(&cli, *t, *reps, *seed, None);
            let (run, reports) = run_ist_classes(&classes, &agents, &opts)?;
            let mut manifest = Manifest::new("ist", *seed, *t, *reps);
            manifest.parameters = json!({
                "classes": classes.iter().map(|c| c.as_str()).collect::<Vec<_>>(),
                "agents": agent_names(&agents),
            });
            finish(out, &run, &manifest)?;
            for report in &reports {
                for r in &report.rows {
                    println!(
                        "{} {:<10} excess successes {:>10.2} (se {:.2})",
                        report.class.as_str(),
                        r.agent,
                        r.excess,
                        r.sem
                    );
                }
            }
            println!("wrote {}", write_excess(out, &reports)?.display());
        }
        Command::Verify { trials, seed } => {
            let report = verify_theorems(*trials, *seed)?;
            print!("{}", report.render());
            if !report.passed() {
                return Ok(2);
            }
        }
        Command::Run { config, out } => {
            let cfg = parse_config(config)?;
            let dir = out.clone().unwrap_or_else(|| cfg.output_dir.clone());
            let opts = RunOptions {
                workers: cli.workers.or_else(env_workers).or(cfg.workers),
                keep_traces: cli.traces,
                timing: cli.timing,
                ..options_for(&cfg)
            };
            let run = run_replications(&cfg, &opts)?;
            let mut manifest =
                Manifest::new(&cfg.experiment, cfg.seed, cfg.horizon, cfg.replications);
            manifest.parameters = json!({
                "environment": cfg.environment.label,
                "agents": agent_names(&cfg.agents),
            });
            manifest.config_toml = Some(to_toml(&cfg)?);
            finish(&dir, &run, &manifest)?;
        }
    }
    Ok(0)
}

fn agent_names(agents: &[AgentSpec]) -> Vec<String> {
    agents.iter().map(AgentSpec::name).collect()
}

fn parse_env_ids(s: &str) -> Result<Vec<usize>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(CB_ENV_IDS.to_vec());
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .ok()
                .filter(|id| CB_ENV_IDS.contains(id))
                .ok_or_else(|| {
                    crate::Error::validation(format!("--env expects 1..4 or all, got {part:?}"))
                })
        })
        .collect()
}

fn parse_classes(s: &str) -> Result<Vec<IstClass>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(IstClass::ALL.to_vec());
    }
    s.split(',')
        .map(|part| {
            IstClass::parse(part.trim()).ok_or_else(|| {
                crate::Error::validation(format!(
                    "--class expects sts, lts, ltr or all, got {part:?}"
                ))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_and_class_lists() {
        assert_eq!(parse_env_ids("all").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_env_ids("2").unwrap(), vec![2]);
        assert_eq!(parse_env_ids("1,3").unwrap(), vec![1, 3]);
        assert!(parse_env_ids("5").is_err());
        assert_eq!(parse_classes("LTR").unwrap(), vec![IstClass::Ltr]);
        assert!(parse_classes("foo").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(cli_main(["ncbandit", "sweep", "--bogus"]), 1);
        assert_eq!(cli_main(["ncbandit"]), 1);
        assert_eq!(cli_main(["ncbandit", "--help"]), 0);
        assert_eq!(cli_main(["ncbandit", "cb", "--env", "9"]), 1);
    }
}
