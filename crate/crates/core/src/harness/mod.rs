//! Seeded, parallel experiment execution.
//!
//! Every episode draws from its own stream `(master_seed, replication)`, so a
//! result depends only on the configuration and the master seed. Jobs are
//! dispatched to a bounded rayon pool and collected in job order.

pub mod presets;
pub mod verify;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use crate::agents::{Agent, AgentKind, AgentSpec, Feedback};
use crate::env::{Environment, EnvironmentSpec};
use crate::error::{Error, Result};
use crate::sampling::RngStream;

pub use presets::IstClass;

/// Environment variable that overrides the worker count.
pub const WORKERS_ENV: &str = "NCBANDIT_WORKERS";

/// One fully specified experiment: an environment, the agents to run on it,
/// and the run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub environment: EnvironmentSpec,
    pub agents: Vec<AgentSpec>,
    pub horizon: usize,
    pub replications: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub output_dir: PathBuf,
}

/// Cumulative expected regret of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub agent: String,
    pub replication: u64,
    pub seed: u64,
    /// `cumulative[t]` is the regret after `t + 1` rounds.
    pub cumulative: Vec<f64>,
    pub vi_runs: usize,
    pub vi_converged: usize,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Fraction of VI runs that converged; 1 when no VI ran.
    pub fn vi_converged_frac(&self) -> f64 {
        if self.vi_runs == 0 {
            1.0
        } else {
            self.vi_converged as f64 / self.vi_runs as f64
        }
    }
}

/// Runs `horizon` rounds of the propose / implement / observe loop.
pub fn run_episode(
    env: &Environment,
    agent: &mut dyn Agent,
    horizon: usize,
    rng: &mut RngStream,
) -> Result<RegretTrace> {
    let sees_action = agent.observes_implemented_action();
    let mut cumulative = Vec::with_capacity(horizon);
    let mut total = 0.0;
    for t in 0..horizon {
        let x = env.sample_context(rng);
        let z = agent
            .propose(rng, x)
            .map_err(|e| annotate(e, &agent.name(), t))?;
        let out = env.step_with_context(rng, x, z)?;
        total += env.instantaneous_regret(x, z)?;
        cumulative.push(total);
        let feedback = Feedback {
            context: x,
            proposed: z,
            implemented: sees_action.then_some(out.implemented),
            reward: out.reward,
        };
        agent
            .observe(&feedback, rng)
            .map_err(|e| annotate(e, &agent.name(), t))?;
    }
    let (vi_runs, vi_converged) = agent.vi_counts();
    Ok(RegretTrace {
        agent: agent.name(),
        replication: rng.stream_id(),
        seed: rng.seed(),
        cumulative,
        vi_runs,
        vi_converged,
    })
}

fn annotate(e: Error, agent: &str, t: usize) -> Error {
    Error::State(format!("{agent} failed at round {}: {e}", t + 1))
}

/// Median (midpoint of the two central values for even `n`), mean and sample
/// standard deviation (`n - 1`; 0 when `n = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub q50: f64,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl SummaryStats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation(
                "summary statistics need at least one value",
            ));
        }
        let n = values.len();
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q50 = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self { q50, mean, std, n })
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        self.std / (self.n as f64).sqrt()
    }
}

/// One row per `(label, agent, replication)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub experiment: String,
    pub agent: String,
    pub replication: u64,
    pub seed: u64,
    pub label: String,
    pub final_regret: f64,
    pub vi_converged_frac: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub label: String,
    pub agent: String,
    pub replication: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    pub agent: String,
    pub stats: SummaryStats,
}

/// Execution knobs shared by every experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub horizon: usize,
    pub replications: usize,
    pub seed: u64,
    /// `None` picks [`WORKERS_ENV`] or the machine's parallelism.
    pub workers: Option<usize>,
    pub keep_traces: bool,
    /// Record wall time per episode. Off by default so outputs stay
    /// byte-identical across runs.
    pub timing: bool,
}

impl RunOptions {
    pub fn new(horizon: usize, replications: usize, seed: u64) -> Self {
        Self {
            horizon,
            replications,
            seed,
            workers: None,
            keep_traces: false,
            timing: false,
        }
    }

    fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if self.horizon == 0 {
            issues.push("horizon must be >= 1".to_string());
        }
        if self.replications == 0 {
            issues.push("replications must be >= 1".to_string());
        }
        if self.workers == Some(0) {
            issues.push("workers must be >= 1".to_string());
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }
}

/// Positive worker count from [`WORKERS_ENV`], if set.
pub fn env_workers() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&w| w > 0)
}

/// Worker count: explicit value, then [`WORKERS_ENV`], then available parallelism.
pub fn resolve_workers(explicit: Option<usize>) -> usize {
    explicit
        .filter(|&w| w > 0)
        .or_else(env_workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from))
}

/// Everything an experiment produced, in job order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub records: Vec<ResultRecord>,
    /// Parallel to `records` when traces were requested, otherwise empty.
    pub traces: Vec<Vec<f64>>,
    pub failures: Vec<Failure>,
}

impl RunOutput {
    /// One row per `(label, agent)` in first-appearance order, over successful
    /// replications.
    pub fn summaries(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(&str, &str)> = Vec::new();
        for r in &self.records {
            let key = (r.label.as_str(), r.agent.as_str());
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        keys.into_iter()
            .filter_map(|(label, agent)| {
                let values: Vec<f64> = self
                    .records
                    .iter()
                    .filter(|r| r.label == label && r.agent == agent)
                    .map(|r| r.final_regret)
                    .collect();
                SummaryStats::from_values(&values)
                    .ok()
                    .map(|stats| SummaryRow {
                        label: label.to_string(),
                        agent: agent.to_string(),
                        stats,
                    })
            })
            .collect()
    }

    pub fn summary(&self, label: &str, agent: &str) -> Option<SummaryStats> {
        self.summaries()
            .into_iter()
            .find(|row| row.label == label && row.agent == agent)
            .map(|row| row.stats)
    }

    pub fn final_regrets(&self, label: &str, agent: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.label == label && r.agent == agent)
            .map(|r| r.final_regret)
            .collect()
    }

    fn extend(&mut self, other: RunOutput) {
        self.records.extend(other.records);
        self.traces.extend(other.traces);
        self.failures.extend(other.failures);
    }
}

/// Runs every agent on every labelled environment for every replication.
/// Jobs are ordered by environment, then agent, then replication.
pub fn run_grid(
    experiment: &str,
    cells: &[(String, Environment)],
    agents: &[AgentSpec],
    opts: &RunOptions,
) -> Result<RunOutput> {
    opts.validate()?;
    let mut jobs = Vec::with_capacity(cells.len() * agents.len() * opts.replications);
    for (label, env) in cells {
        for spec in agents {
            for rep in 0..opts.replications as u64 {
                jobs.push((label.as_str(), env, spec, rep));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_workers(opts.workers))
        .build()
        .map_err(|e| Error::State(format!("cannot start worker pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        jobs.par_iter()
            .map(|&(label, env, spec, rep)| {
                let started = Instant::now();
                let mut rng = RngStream::new(opts.seed, rep);
                let trace = spec
                    .build(env)
                    .and_then(|mut agent| run_episode(env, agent.as_mut(), opts.horizon, &mut rng));
                let wall_ms = if opts.timing {
                    started.elapsed().as_secs_f64() * 1e3
                } else {
                    0.0
                };
                (label, spec, rep, trace, wall_ms)
            })
            .collect()
    });

    let mut out = RunOutput::default();
    for (label, spec, rep, trace, wall_ms) in results {
        match trace {
            Ok(trace) => {
                out.records.push(ResultRecord {
                    experiment: experiment.to_string(),
                    agent: trace.agent.clone(),
                    replication: rep,
                    seed: opts.seed,
                    label: label.to_string(),
                    final_regret: trace.final_regret(),
                    vi_converged_frac: trace.vi_converged_frac(),
                    wall_ms,
                });
                if opts.keep_traces {
                    out.traces.push(trace.cumulative);
                }
            }
            Err(e) => out.failures.push(Failure {
                label: label.to_string(),
                agent: spec.name(),
                replication: rep,
                message: e.to_string(),
            }),
        }
    }
    Ok(out)
}

/// Runs a single configured experiment.
pub fn run_replications(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput> {
    let env = config.environment.build()?;
    run_grid(
        &config.experiment,
        &[(config.environment.label.clone(), env)],
        &config.agents,
        opts,
    )
}

/// Run options taken from a config's `[run]` table.
pub fn options_for(config: &ExperimentConfig) -> RunOptions {
    RunOptions {
        workers: config.workers,
        ..RunOptions::new(config.horizon, config.replications, config.seed)
    }
}

/// One `(p, agent)` cell of the compliance sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub agent: String,
    pub stats: SummaryStats,
    /// TS-Check beyond `p = 0.5`, where its updates see mostly swapped arms.
    pub flagged: bool,
}

/// Symmetric noncompliance sweep on `mu = (0.75, 0.25)`.
pub fn sweep_noncompliance(
    grid: &[f64],
    agents: &[AgentSpec],
    opts: &RunOptions,
) -> Result<(RunOutput, Vec<SweepRow>)> {
    let cells = grid
        .iter()
        .map(|&p| Ok((presets::sweep_label(p), presets::sweep_environment(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let out = run_grid("sweep", &cells, agents, opts)?;
    let mut rows = Vec::new();
    for (&p, (label, _)) in grid.iter().zip(&cells) {
        for spec in agents {
            let agent = spec.name();
            if let Some(stats) = out.summary(label, &agent) {
                rows.push(SweepRow {
                    p,
                    flagged: spec.kind == AgentKind::TsCheck && p > 0.5,
                    agent,
                    stats,
                });
            }
        }
    }
    Ok((out, rows))
}

/// Runs agents over the selected contextual environments (1-based ids).
pub fn run_cb_suite(envs: &[usize], agents: &[AgentSpec], opts: &RunOptions) -> Result<RunOutput> {
    let cells = envs
        .iter()
        .map(|&id| Ok((format!("env{id}"), presets::cb_environment(id)?.build()?)))
        .collect::<Result<Vec<_>>>()?;
    run_grid("cb", &cells, agents, opts)
}

/// Expected additional successes of each agent over uniform exploration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcessSuccessReport {
    pub class: IstClass,
    pub baseline_mean_regret: f64,
    pub rows: Vec<ExcessRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcessRow {
    pub agent: String,
    pub mean_regret: f64,
    /// `baseline_mean_regret - mean_regret`
    pub excess: f64,
    /// Standard error of the per-replication paired differences.
    pub sem: f64,
    pub n: usize,
}

impl ExcessSuccessReport {
    pub fn excess(&self, agent: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.agent == agent)
            .map(|r| r.excess)
    }
}

/// Stroke-trial replay for one reward class. A uniform baseline is always run
/// (and reported with excess 0).
pub fn run_ist(
    class: IstClass,
    agents: &[AgentSpec],
    opts: &RunOptions,
) -> Result<(RunOutput, ExcessSuccessReport)> {
    let mut specs: Vec<AgentSpec> = agents
        .iter()
        .copied()
        .filter(|s| s.kind != AgentKind::Uniform)
        .collect();
    specs.push(AgentSpec::new(AgentKind::Uniform));
    let label = class.as_str().to_string();
    let env = presets::ist_environment(class).build()?;
    let out = run_grid("ist", &[(label.clone(), env)], &specs, opts)?;

    let baseline = out.final_regrets(&label, "Uniform");
    if baseline.is_empty() {
        return Err(Error::State(
            "uniform baseline produced no replications".into(),
        ));
    }
    let baseline_mean = baseline.iter().sum::<f64>() / baseline.len() as f64;
    let mut rows = Vec::new();
    for spec in &specs {
        let agent = spec.name();
        let mut diffs = Vec::new();
        for r in out
            .records
            .iter()
            .filter(|r| r.label == label && r.agent == agent)
        {
            if let Some(b) = out.records.iter().find(|b| {
                b.label == label && b.agent == "Uniform" && b.replication == r.replication
            }) {
                diffs.push(b.final_regret - r.final_regret);
            }
        }
        let Ok(stats) = SummaryStats::from_values(&out.final_regrets(&label, &agent)) else {
            continue;
        };
        let sem = SummaryStats::from_values(&diffs).map_or(f64::NAN, |s| s.sem());
        let excess = if spec.kind == AgentKind::Uniform {
            0.0
        } else {
            baseline_mean - stats.mean
        };
        rows.push(ExcessRow {
            agent,
            mean_regret: stats.mean,
            excess,
            sem,
            n: stats.n,
        });
    }
    Ok((
        out,
        ExcessSuccessReport {
            class,
            baseline_mean_regret: baseline_mean,
            rows,
        },
    ))
}

/// [`run_ist`] over several classes, outputs concatenated.
pub fn run_ist_classes(
    classes: &[IstClass],
    agents: &[AgentSpec],
    opts: &RunOptions,
) -> Result<(RunOutput, Vec<ExcessSuccessReport>)> {
    let mut all = RunOutput::default();
    let mut reports = Vec::new();
    for &class in classes {
        let (out, report) = run_ist(class, agents, opts)?;
        all.extend(out);
        reports.push(report);
    }
    Ok((all, reports))
}
