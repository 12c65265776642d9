//! Bernoulli bandit environment with stochastic noncompliance.
//!
//! Each round the environment reveals a context `x`, the agent proposes an arm
//! `z`, the environment implements `a ~ Cat(Pi[x][z])` and pays
//! `r ~ Bern(mu[x][a])`. Regret is measured against the proposal, using the
//! true expected reward of each proposal `(Pi[x] * mu[x])[z]`.

use crate::error::{Error, Result};
use crate::sampling::{categorical_unchecked, RngStream};

/// Rows whose sum falls inside this band are renormalized on load; anything
/// else is rejected.
pub const ROW_SUM_BAND: (f64, f64) = (0.99, 1.01);

/// Success probability of each implemented arm, per context.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardParams {
    num_contexts: usize,
    arms: usize,
    mu: Vec<f64>,
}

impl RewardParams {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let issues = reward_issues(&rows);
        if !issues.is_empty() {
            return Err(Error::Validation(issues.join("; ")));
        }
        let num_contexts = rows.len();
        let arms = rows[0].len();
        Ok(Self {
            num_contexts,
            arms,
            mu: rows.into_iter().flatten().collect(),
        })
    }

    pub fn num_contexts(&self) -> usize {
        self.num_contexts
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.mu[x * self.arms..(x + 1) * self.arms]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.mu.chunks(self.arms).map(<[f64]>::to_vec).collect()
    }
}

pub(crate) fn reward_issues(rows: &[Vec<f64>]) -> Vec<String> {
    let mut issues = Vec::new();
    if rows.is_empty() {
        issues.push("mu needs at least one context".to_string());
        return issues;
    }
    let arms = rows[0].len();
    if arms < 2 {
        issues.push(format!("mu needs at least 2 arms, got {arms}"));
    }
    for (x, row) in rows.iter().enumerate() {
        if row.len() != arms {
            issues.push(format!("mu[{x}] has {} arms, expected {arms}", row.len()));
        }
        for (a, v) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(v) {
                issues.push(format!("mu[{x}][{a}] = {v} is outside [0, 1]"));
            }
        }
    }
    issues
}

/// Row-stochastic map from proposed to implemented arm, per context.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplianceMatrix {
    num_contexts: usize,
    arms: usize,
    pi: Vec<f64>,
}

impl ComplianceMatrix {
    /// Builds `pi[x][z][a]`, renormalizing rows whose sums land in [`ROW_SUM_BAND`].
    pub fn new(tensor: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let issues = compliance_issues(&tensor);
        if !issues.is_empty() {
            return Err(Error::Validation(issues.join("; ")));
        }
        let num_contexts = tensor.len();
        let arms = tensor[0].len();
        let mut pi = Vec::with_capacity(num_contexts * arms * arms);
        for row in tensor.into_iter().flatten() {
            let total: f64 = row.iter().sum();
            if total == 1.0 {
                pi.extend(row);
            } else {
                pi.extend(row.into_iter().map(|v| v / total));
            }
        }
        Ok(Self {
            num_contexts,
            arms,
            pi,
        })
    }

    /// Same map for every context.
    pub fn identity(num_contexts: usize, arms: usize) -> Self {
        let mut pi = vec![0.0; num_contexts * arms * arms];
        for x in 0..num_contexts {
            for z in 0..arms {
                pi[(x * arms + z) * arms + z] = 1.0;
            }
        }
        Self {
            num_contexts,
            arms,
            pi,
        }
    }

    pub fn num_contexts(&self) -> usize {
        self.num_contexts
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn row(&self, x: usize, z: usize) -> &[f64] {
        let start = (x * self.arms + z) * self.arms;
        &self.pi[start..start + self.arms]
    }

    pub fn to_tensor(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.num_contexts)
            .map(|x| (0..self.arms).map(|z| self.row(x, z).to_vec()).collect())
            .collect()
    }
}

pub(crate) fn compliance_issues(tensor: &[Vec<Vec<f64>>]) -> Vec<String> {
    let mut issues = Vec::new();
    if tensor.is_empty() {
        issues.push("pi needs at least one context".to_string());
        return issues;
    }
    let arms = tensor[0].len();
    for (x, matrix) in tensor.iter().enumerate() {
        if matrix.len() != arms {
            issues.push(format!(
                "pi[{x}] has {} rows, expected {arms}",
                matrix.len()
            ));
        }
        for (z, row) in matrix.iter().enumerate() {
            // K_z = K_a: every matrix is square
            if row.len() != matrix.len() {
                issues.push(format!(
                    "pi[{x}][{z}] has {} entries, expected {} (square compliance matrix)",
                    row.len(),
                    matrix.len()
                ));
                continue;
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                issues.push(format!("pi[{x}][{z}] has invalid entry {v}"));
                continue;
            }
            let total: f64 = row.iter().sum();
            if total < ROW_SUM_BAND.0 || total > ROW_SUM_BAND.1 {
                issues.push(format!(
                    "pi[{x}][{z}] (context {x}, row {z}) sums to {total}, outside [{}, {}]",
                    ROW_SUM_BAND.0, ROW_SUM_BAND.1
                ));
            }
        }
    }
    issues
}

pub(crate) fn context_issues(probs: &[f64], num_contexts: usize) -> Vec<String> {
    let mut issues = Vec::new();
    if probs.len() != num_contexts {
        issues.push(format!(
            "context_probs has {} entries for {num_contexts} contexts",
            probs.len()
        ));
    }
    if let Some(v) = probs.iter().find(|v| !v.is_finite() || **v < 0.0) {
        issues.push(format!("context_probs has invalid entry {v}"));
    } else {
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            issues.push(format!("context_probs sums to {total}, expected 1"));
        }
    }
    issues
}

/// Outcome of one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub context: usize,
    pub proposed: usize,
    pub implemented: usize,
    pub reward: bool,
}

/// Immutable noncompliant bandit. Shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    reward: RewardParams,
    compliance: ComplianceMatrix,
    context_probs: Vec<f64>,
    expected: Vec<f64>,
    optimal: Vec<(usize, f64)>,
}

impl Environment {
    pub fn new(
        reward: RewardParams,
        compliance: ComplianceMatrix,
        context_probs: Vec<f64>,
    ) -> Result<Self> {
        let mut issues = Vec::new();
        if reward.num_contexts != compliance.num_contexts {
            issues.push(format!(
                "mu has {} contexts but pi has {}",
                reward.num_contexts, compliance.num_contexts
            ));
        }
        if reward.arms != compliance.arms {
            issues.push(format!(
                "mu has {} arms but pi is {}x{}",
                reward.arms, compliance.arms, compliance.arms
            ));
        }
        issues.extend(context_issues(&context_probs, reward.num_contexts));
        if !issues.is_empty() {
            return Err(Error::Validation(issues.join("; ")));
        }

        let k = reward.arms;
        let mut expected = Vec::with_capacity(reward.num_contexts * k);
        let mut optimal = Vec::with_capacity(reward.num_contexts);
        for x in 0..reward.num_contexts {
            let mu = reward.row(x);
            let mut best = (0, f64::NEG_INFINITY);
            for z in 0..k {
                let value: f64 = compliance
                    .row(x, z)
                    .iter()
                    .zip(mu)
                    .map(|(p, m)| p * m)
                    .sum();
                if value > best.1 {
                    best = (z, value);
                }
                expected.push(value);
            }
            optimal.push(best);
        }
        Ok(Self {
            reward,
            compliance,
            context_probs,
            expected,
            optimal,
        })
    }

    /// Single-context environment (plain multi-armed bandit).
    pub fn bandit(mu: Vec<f64>, pi: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            RewardParams::new(vec![mu])?,
            ComplianceMatrix::new(vec![pi])?,
            vec![1.0],
        )
    }

    pub fn reward(&self) -> &RewardParams {
        &self.reward
    }

    pub fn compliance(&self) -> &ComplianceMatrix {
        &self.compliance
    }

    pub fn context_probs(&self) -> &[f64] {
        &self.context_probs
    }

    pub fn num_contexts(&self) -> usize {
        self.reward.num_contexts
    }

    pub fn arms(&self) -> usize {
        self.reward.arms
    }

    fn check(&self, x: usize, z: usize) -> Result<()> {
        if x >= self.num_contexts() {
            return Err(Error::validation(format!(
                "context {x} out of range (have {})",
                self.num_contexts()
            )));
        }
        if z >= self.arms() {
            return Err(Error::validation(format!(
                "arm {z} out of range (have {})",
                self.arms()
            )));
        }
        Ok(())
    }

    /// `E[r | x, z] = sum_a Pi[x][z][a] mu[x][a]`.
    pub fn expected_reward(&self, x: usize, z: usize) -> Result<f64> {
        self.check(x, z)?;
        Ok(self.expected[x * self.arms() + z])
    }

    /// Expected rewards of every proposal in context `x` (the vector `Pi * mu`).
    pub fn expected_rewards(&self, x: usize) -> Result<&[f64]> {
        self.check(x, 0)?;
        let k = self.arms();
        Ok(&self.expected[x * k..(x + 1) * k])
    }

    /// Best proposal and its expected reward; ties go to the lowest index.
    pub fn optimal_proposal(&self, x: usize) -> Result<(usize, f64)> {
        self.check(x, 0)?;
        Ok(self.optimal[x])
    }

    pub fn instantaneous_regret(&self, x: usize, z: usize) -> Result<f64> {
        self.check(x, z)?;
        Ok(self.optimal[x].1 - self.expected[x * self.arms() + z])
    }

    pub fn sample_context(&self, rng: &mut RngStream) -> usize {
        if self.context_probs.len() == 1 {
            0
        } else {
            categorical_unchecked(rng, &self.context_probs, 1.0)
        }
    }

    /// Draws a context, then the implemented arm and reward for proposal `z`.
    pub fn step(&self, rng: &mut RngStream, z: usize) -> Result<StepOutcome> {
        let x = self.sample_context(rng);
        self.step_with_context(rng, x, z)
    }

    /// Implemented arm and reward for proposal `z` in a context drawn by the caller.
    pub fn step_with_context(
        &self,
        rng: &mut RngStream,
        x: usize,
        z: usize,
    ) -> Result<StepOutcome> {
        self.check(x, z)?;
        let implemented = categorical_unchecked(rng, self.compliance.row(x, z), 1.0);
        let reward = rng.uniform() < self.reward.row(x)[implemented];
        Ok(StepOutcome {
            context: x,
            proposed: z,
            implemented,
            reward,
        })
    }
}

/// Plain-data description of an environment, as written in configs and presets.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSpec {
    pub label: String,
    /// `mu[x][a]`
    pub mu: Vec<Vec<f64>>,
    /// `pi[x][z][a]`
    pub pi: Vec<Vec<Vec<f64>>>,
    pub context_probs: Vec<f64>,
}

impl EnvironmentSpec {
    /// Single-context spec.
    pub fn bandit(label: impl Into<String>, mu: Vec<f64>, pi: Vec<Vec<f64>>) -> Self {
        Self {
            label: label.into(),
            mu: vec![mu],
            pi: vec![pi],
            context_probs: vec![1.0],
        }
    }

    /// Every problem with the spec, empty when it builds.
    pub fn issues(&self) -> Vec<String> {
        let mut issues = reward_issues(&self.mu);
        issues.extend(compliance_issues(&self.pi));
        if issues.is_empty() {
            if self.mu.len() != self.pi.len() {
                issues.push(format!(
                    "mu has {} contexts but pi has {}",
                    self.mu.len(),
                    self.pi.len()
                ));
            } else if self.mu[0].len() != self.pi[0].len() {
                issues.push(format!(
                    "mu has {} arms but pi is {}x{}",
                    self.mu[0].len(),
                    self.pi[0].len(),
                    self.pi[0].len()
                ));
            }
        }
        issues.extend(context_issues(&self.context_probs, self.mu.len()));
        issues
    }

    pub fn build(&self) -> Result<Environment> {
        let issues = self.issues();
        if !issues.is_empty() {
            return Err(Error::Validation(issues.join("; ")));
        }
        Environment::new(
            RewardParams::new(self.mu.clone())?,
            ComplianceMatrix::new(self.pi.clone())?,
            self.context_probs.clone(),
        )
    }
}
