//! Thompson sampling for Bernoulli bandits whose proposed actions are not
//! always the ones implemented.
//!
//! - [`special`]: digamma, log-gamma, KL divergences and the regret-bound coefficient `f`
//! - [`sampling`]: seeded streams and Beta / Dirichlet / categorical draws
//! - [`env`]: contextual bandit with a compliance matrix per context
//! - [`agents`]: TS, TS-Check, TS-Obs and TS-Lat
//! - [`vi`]: variational inference behind TS-Lat
//! - [`harness`]: parallel replications, presets and the bound checks
//! - [`config`], [`output`], [`cli`]: TOML configs, CSV results, command line

pub mod agents;
pub mod cli;
pub mod config;
pub mod env;
pub mod error;
pub mod harness;
pub mod output;
pub mod sampling;
pub mod special;
pub mod vi;

pub use agents::{Agent, AgentKind, AgentSpec};
pub use env::{Environment, EnvironmentSpec};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, RunOptions, RunOutput};
