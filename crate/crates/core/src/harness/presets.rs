//! Built-in environments and agent line-ups.

use crate::agents::{AgentKind, AgentSpec};
use crate::env::{Environment, EnvironmentSpec};
use crate::error::{Error, Result};

/// Arm means of the compliance sweep.
pub const SWEEP_MU: [f64; 2] = [0.75, 0.25];

/// `Pi = ((1 - p, p), (p, 1 - p))` on [`SWEEP_MU`].
pub fn sweep_environment(p: f64) -> Result<Environment> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::validation(format!(
            "noncompliance p = {p} is outside [0, 1]"
        )));
    }
    Environment::bandit(SWEEP_MU.to_vec(), vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
}

pub fn sweep_label(p: f64) -> String {
    format!("p={p}")
}

/// `p_i = i / n` for `i = 0..=n * p_max`, where `n = 1 / step` must be an integer.
pub fn sweep_grid(step: f64, p_max: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::validation(format!(
            "grid step must be in (0, 1], got {step}"
        )));
    }
    if !(0.0..=1.0).contains(&p_max) {
        return Err(Error::validation(format!(
            "grid maximum must be in [0, 1], got {p_max}"
        )));
    }
    let n = (1.0 / step).round();
    if (n * step - 1.0).abs() > 1e-9 {
        return Err(Error::validation(format!(
            "grid step {step} does not divide 1"
        )));
    }
    let n = n as usize;
    let last = (p_max * n as f64 + 1e-9).floor() as usize;
    Ok((0..=last).map(|i| i as f64 / n as f64).collect())
}

pub fn sweep_agents() -> Vec<AgentSpec> {
    vec![
        AgentSpec::new(AgentKind::Ts),
        AgentSpec::new(AgentKind::TsCheck),
        AgentSpec::new(AgentKind::TsObs),
    ]
}

const CB_MU: [[f64; 2]; 2] = [[0.65, 0.35], [0.25, 0.75]];

/// Compliance per context for the four contextual environments.
const CB_PI: [[[[f64; 2]; 2]; 2]; 4] = [
    [[[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]]],
    [[[0.0, 1.0], [1.0, 0.0]], [[0.0, 1.0], [1.0, 0.0]]],
    [[[0.7, 0.3], [0.4, 0.6]], [[0.6, 0.4], [0.3, 0.7]]],
    [[[0.3, 0.7], [0.6, 0.4]], [[0.4, 0.6], [0.7, 0.3]]],
];

pub const CB_ENV_IDS: [usize; 4] = [1, 2, 3, 4];

/// Two-context environment `id` in `1..=4`, contexts equally likely.
pub fn cb_environment(id: usize) -> Result<EnvironmentSpec> {
    let pi = CB_PI.get(id.wrapping_sub(1)).ok_or_else(|| {
        Error::validation(format!("contextual environment must be 1..=4, got {id}"))
    })?;
    Ok(EnvironmentSpec {
        label: format!("env{id}"),
        mu: CB_MU.iter().map(|r| r.to_vec()).collect(),
        pi: pi
            .iter()
            .map(|m| m.iter().map(|r| r.to_vec()).collect())
            .collect(),
        context_probs: vec![0.5, 0.5],
    })
}

/// TS, TS-Check, TS-Obs and one TS-Lat per soft start.
pub fn cb_agents(soft_starts: &[usize]) -> Vec<AgentSpec> {
    let mut agents = sweep_agents();
    agents.extend(soft_starts.iter().map(|&m| AgentSpec::ts_lat(m)));
    agents
}

/// Outcome measured in the stroke-trial replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IstClass {
    /// Short-term survival.
    Sts,
    /// Long-term survival.
    Lts,
    /// Long-term recovery.
    Ltr,
}

impl IstClass {
    pub const ALL: [IstClass; 3] = [IstClass::Sts, IstClass::Lts, IstClass::Ltr];

    pub fn as_str(self) -> &'static str {
        match self {
            IstClass::Sts => "sts",
            IstClass::Lts => "lts",
            IstClass::Ltr => "ltr",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s.to_ascii_lowercase())
    }

    pub fn mu(self) -> [f64; 6] {
        match self {
            IstClass::Sts => [0.886, 0.886, 0.888, 0.903, 0.896, 0.910],
            IstClass::Lts => [0.760, 0.749, 0.747, 0.785, 0.775, 0.782],
            IstClass::Ltr => [0.181, 0.178, 0.181, 0.201, 0.208, 0.206],
        }
    }
}

/// Empirical compliance of the stroke trial, rounded to three places; rows are
/// renormalized on load.
pub const IST_PI: [[f64; 6]; 6] = [
    [0.980, 0.002, 0.002, 0.014, 0.001, 0.001],
    [0.000, 0.975, 0.009, 0.000, 0.014, 0.002],
    [0.000, 0.005, 0.983, 0.000, 0.000, 0.012],
    [0.068, 0.001, 0.001, 0.928, 0.000, 0.001],
    [0.000, 0.102, 0.001, 0.000, 0.882, 0.015],
    [0.000, 0.001, 0.082, 0.000, 0.004, 0.914],
];

pub fn ist_environment(class: IstClass) -> EnvironmentSpec {
    EnvironmentSpec::bandit(
        class.as_str(),
        class.mu().to_vec(),
        IST_PI.iter().map(|r| r.to_vec()).collect(),
    )
}

/// Agents replayed on the stroke trial (the uniform baseline is implicit).
pub fn ist_agents() -> Vec<AgentSpec> {
    sweep_agents()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grid_is_exact() {
        let grid = sweep_grid(0.05, 1.0).unwrap();
        assert_eq!(grid.len(), 21);
        assert_eq!(grid[10], 0.5);
        assert_eq!(grid[20], 1.0);
        assert_eq!(sweep_grid(0.05, 0.5).unwrap().len(), 11);
        assert!(sweep_grid(0.3, 1.0).is_err());
        assert!(sweep_grid(0.0, 1.0).is_err());
        assert_eq!(sweep_label(0.05), "p=0.05");
    }

    #[test]
    fn sweep_zero_is_fully_compliant() {
        let env = sweep_environment(0.0).unwrap();
        assert_eq!(env.expected_rewards(0).unwrap(), &[0.75, 0.25]);
        assert!(sweep_environment(1.5).is_err());
    }

    #[test]
    fn contextual_environments() {
        let e1 = cb_environment(1).unwrap().build().unwrap();
        assert_eq!(e1.compliance().row(0, 0), &[1.0, 0.0]);
        assert_eq!(e1.compliance().row(1, 1), &[0.0, 1.0]);
        let e2 = cb_environment(2).unwrap().build().unwrap();
        assert_eq!(e2.compliance().row(0, 0), &[0.0, 1.0]);
        let e3 = cb_environment(3).unwrap().build().unwrap();
        assert_eq!(e3.compliance().row(1, 0), &[0.6, 0.4]);
        assert_eq!(e3.context_probs(), &[0.5, 0.5]);
        assert_eq!(e3.reward().row(0), &[0.65, 0.35]);
        assert!(cb_environment(0).is_err());
        assert!(cb_environment(5).is_err());
    }

    #[test]
    fn stroke_trial_constants() {
        let ltr = IstClass::Ltr.mu();
        let best = (0..6).max_by(|&a, &b| ltr[a].total_cmp(&ltr[b])).unwrap();
        assert_eq!(best, 4);
        assert_eq!(IST_PI[0], [0.980, 0.002, 0.002, 0.014, 0.001, 0.001]);
        let env = ist_environment(IstClass::Ltr).build().unwrap();
        for z in 0..6 {
            let s: f64 = env.compliance().row(0, z).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert_eq!(IstClass::parse("LTS"), Some(IstClass::Lts));
        assert_eq!(IstClass::parse("x"), None);
    }
}
